#include <doctest.h>

#include <cmath>
#include <limits>

#include "rcp/hjb.hpp"
#include "rcp/pde.hpp"
#include "test_models.hpp"

using namespace rcp;
using rcp_test::single_regime;

namespace {

PDECoefficients constant_source(double k) {
    PDECoefficients c;
    c.diffusion = [](double, double) { return 0.0; };
    c.drift = [](double, double) { return 0.0; };
    c.source = [k](double, double) { return k; };
    c.terminal = [](double) { return 1.0; };
    return c;
}

double max_abs_row_diff(const ValueSurface& a, const ValueSurface& b, int row_a, int row_b,
                        int stride) {
    // compare row_a of the coarse surface against row_b of the fine one on shared nodes
    double dev = 0.0;
    for (int j = 0; j < a.grid.n_space; ++j)
        dev = std::max(dev, std::abs(a.at(row_a, j) - b.at(row_b, j * stride)));
    return dev;
}

} // namespace

TEST_CASE("scalar source reduces to the exponential ODE") {
    Grid1D grid{11, 2000, 1.0};
    ValueSurface u = solve_backward(constant_source(0.7), grid);
    CHECK(u.at(grid.n_time, 5) == 1.0);  // terminal row exact
    CHECK(u.at(0, 5) == doctest::Approx(std::exp(0.7)).epsilon(1e-3));
    CHECK(u.at(0, 0) == doctest::Approx(u.at(0, 10)).epsilon(1e-14));
}

TEST_CASE("degenerate heat equation self-converges at the expected rate") {
    PDECoefficients c;
    c.diffusion = [](double, double p) { return p * (1.0 - p); };
    c.drift = [](double, double) { return 0.0; };
    c.source = [](double, double) { return 0.0; };
    c.terminal = [](double p) { return p * (1.0 - p); };

    Grid1D coarse{51, 100, 1.0};
    Grid1D medium{101, 200, 1.0};
    Grid1D fine{401, 1600, 1.0};
    ValueSurface uc = solve_backward(c, coarse);
    ValueSurface um = solve_backward(c, medium);
    ValueSurface uf = solve_backward(c, fine);

    const double err_c = max_abs_row_diff(uc, uf, 0, 0, 8);
    const double err_m = max_abs_row_diff(um, uf, 0, 0, 4);
    const double ratio = err_c / err_m;
    CHECK(ratio > 1.7);
    CHECK(ratio < 4.5);

    // decay: the solution shrinks monotonically toward the terminal time 0 limit
    CHECK(uc.at(0, 25) < uc.at(50, 25));
    CHECK(uc.at(0, 25) > 0.0);
}

TEST_CASE("pure drift transports the profile along characteristics") {
    const double b = 0.3;
    PDECoefficients c;
    c.diffusion = [](double, double) { return 0.0; };
    c.drift = [b](double, double) { return b; };
    c.source = [](double, double) { return 0.0; };
    c.terminal = [](double p) { return std::exp(-20.0 * (p - 0.35) * (p - 0.35)); };

    Grid1D grid{401, 800, 1.0};
    ValueSurface u = solve_backward(c, grid);
    double max_err = 0.0;
    for (int j = 0; j < grid.n_space; ++j) {
        const double p = grid.node(j);
        if (p + b > 0.95) continue;  // characteristics crossing the boundary row
        max_err = std::max(max_err, std::abs(u.at(0, j) - c.terminal(p + b)));
    }
    // first-order upwind smears the bump; the profile location must be right
    CHECK(max_err < 0.08);
}

TEST_CASE("interpolation is exact at nodes, averages linear data, rejects outside points") {
    Grid1D grid{5, 4, 1.0};
    ValueSurface u;
    u.grid = grid;
    u.values.resize(static_cast<std::size_t>(5) * 5);
    for (int k = 0; k <= 4; ++k)
        for (int j = 0; j < 5; ++j) u.at(k, j) = 2.0 * grid.node(j) + 0.5 * grid.time(k);

    CHECK(u.interpolate(grid.time(2), grid.node(3)) == doctest::Approx(u.at(2, 3)).epsilon(1e-15));
    const double mid = 0.5 * (u.at(1, 1) + u.at(1, 2));
    CHECK(u.interpolate(grid.time(1), 0.5 * (grid.node(1) + grid.node(2))) ==
          doctest::Approx(mid).epsilon(1e-14));
    CHECK_THROWS_AS(u.interpolate(0.5, 1.2), OutOfDomain);
    CHECK_THROWS_AS(u.interpolate(1.4, 0.5), OutOfDomain);

    ValueSurface flat = u;
    for (double& v : flat.values) v = 3.25;
    CHECK(flat.interpolate(0.37, 0.11) == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("Picard iteration settles fast on a semilinear source") {
    PDECoefficients c;
    c.diffusion = [](double, double p) { return 0.5 * p * (1.0 - p); };
    c.drift = [](double, double) { return 0.1; };
    c.source = [](double, double) { return -0.4; };
    c.nonlinear = [](double, double, double u) {
        return 0.6 * std::pow(std::max(u, 1e-300), 0.5);
    };
    c.terminal = [](double) { return 1.0; };

    Grid1D grid{101, 400, 1.0};
    ValueSurface u = solve_backward(c, grid);
    CHECK(u.max_picard_iterations <= 5);
    for (double v : u.values) CHECK(v > 0.0);
}

TEST_CASE("theta scheme stores the explicit stability diagnostic") {
    PDECoefficients c;
    c.diffusion = [](double, double p) { return p * (1.0 - p); };
    c.drift = [](double, double) { return 0.2; };
    c.source = [](double, double) { return 0.0; };
    c.terminal = [](double p) { return p; };

    Grid1D grid{51, 100, 1.0};
    SolveScheme implicit_scheme;
    CHECK(solve_backward(c, grid, implicit_scheme).cfl_ratio == 0.0);

    SolveScheme cn;
    cn.theta = 0.5;
    const double ratio = solve_backward(c, grid, cn).cfl_ratio;
    CHECK(ratio > 0.0);
    // 0.5 * dt * 2 d_max / dp^2 with d_max = 1/4
    CHECK(ratio == doctest::Approx(0.5 * 0.01 * (2.0 * 0.25 * 2500 + 0.2 * 50)).epsilon(0.05));
}

TEST_CASE("non-finite surfaces are flagged") {
    PDECoefficients c = constant_source(0.1);
    c.terminal = [](double) { return std::numeric_limits<double>::infinity(); };
    Grid1D grid{11, 10, 1.0};
    CHECK_THROWS_AS(solve_backward(c, grid), NonFiniteSurface);
}

TEST_CASE("simplex cutoff is one inside, zero far outside, smooth between") {
    std::vector<double> inside = {0.4};
    CHECK(simplex_cutoff(inside) == 1.0);
    std::vector<double> far = {-0.2};
    CHECK(simplex_cutoff(far) == 0.0);
    std::vector<double> near = {-0.05};
    const double v = simplex_cutoff(near);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    std::vector<double> above = {1.05};
    CHECK(simplex_cutoff(above) > 0.0);
    CHECK(simplex_cutoff(above) < 1.0);
}

TEST_CASE("Feynman-Kac estimate: deterministic degenerate cases") {
    SUBCASE("identical regimes make the exponent deterministic") {
        rcp::MarketModel m = rcp_test::merton_degenerate(0.1, 0.02, 0.2, 0.5, 1.0);
        auto coeffs = post_fk_coefficients(m);
        std::vector<double> x0 = {0.5};
        auto fk = feynman_kac_estimate(coeffs, m.gamma, 0.0, x0, m.horizon, 1e-2, 200, 99);
        // Psi = gamma r + gamma/(2(1-gamma)) ((mu - r)/sigma)^2 = 0.09
        CHECK(fk.value == doctest::Approx(std::exp(0.09 / 0.5)).epsilon(1e-12));
        CHECK(fk.se == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("vanishing risk aversion drives the estimate to one") {
        rcp::MarketModel m = rcp_test::merton_degenerate(0.1, 0.02, 0.2, 0.5, 1.0);
        m.gamma = 1e-8;
        auto coeffs = post_fk_coefficients(m);
        std::vector<double> x0 = {0.5};
        auto fk = feynman_kac_estimate(coeffs, m.gamma, 0.0, x0, m.horizon, 1e-2, 200, 100);
        CHECK(fk.value == doctest::Approx(1.0).epsilon(1e-6));
    }
}
