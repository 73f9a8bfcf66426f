#ifndef RCP_PDE_HPP
#define RCP_PDE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rcp/errors.hpp"

namespace rcp {

// Uniform space-time grid: n_space nodes on [0,1], n_time steps on [0,T].
struct Grid1D {
    int n_space = 0;
    int n_time = 0;
    double T = 0.0;

    double dp() const { return 1.0 / (n_space - 1); }
    double dt() const { return T / n_time; }
    double node(int j) const { return static_cast<double>(j) / (n_space - 1); }
    double time(int k) const { return T * k / n_time; }
};

// Backward problem u_t + d u_pp + b u_p + c u + f(t,p,u) = 0, u(T,.) = g.
// The paper-facing problems have d(t,0) = d(t,1) = 0 (degenerate boundary);
// the solver imposes no boundary condition and reduces the endpoint rows to
// the one-sided drift-source ODE.
struct PDECoefficients {
    std::function<double(double, double)> diffusion;            // d(t,p) >= 0
    std::function<double(double, double)> drift;                // b(t,p)
    std::function<double(double, double)> source;               // c(t,p)
    std::function<double(double, double, double)> nonlinear;    // f(t,p,u); may be null
    std::function<double(double)> terminal;                     // g(p)
};

struct SolveScheme {
    double theta = 1.0;       // implicit weight of the linear part
    int picard_max = 25;
    double picard_tol = 1e-11;
};

enum class SurfaceKind { Raw, HopfCole };

// Time x space grid of values; row k holds u(t_k, .), the terminal row equals
// g exactly.
struct ValueSurface {
    Grid1D grid;
    SurfaceKind kind = SurfaceKind::Raw;
    std::vector<double> values;  // (n_time+1) x n_space, row-major
    double cfl_ratio = 0.0;      // explicit-part stability diagnostic
    std::uint64_t model_hash = 0;
    int max_picard_iterations = 0;

    double at(int k, int j) const {
        return values[static_cast<std::size_t>(k) * grid.n_space + j];
    }
    double& at(int k, int j) {
        return values[static_cast<std::size_t>(k) * grid.n_space + j];
    }
    std::span<const double> row(int k) const {
        return {values.data() + static_cast<std::size_t>(k) * grid.n_space,
                static_cast<std::size_t>(grid.n_space)};
    }

    // Bilinear interpolation, exact at nodes; throws OutOfDomain outside the hull.
    double interpolate(double t, double p) const;
};

// Theta-scheme in time (fully implicit linear part by default), central
// diffusion, first-order upwind drift, frozen-coefficient Picard iteration for
// the nonlinear source.
ValueSurface solve_backward(const PDECoefficients& coeffs, const Grid1D& grid,
                            const SolveScheme& scheme = {});

// Diffusion on the projected simplex with a rank-one diffusion column driven
// by a scalar Brownian motion; coefficients are smoothly truncated outside a
// 0.1-neighborhood of the simplex.
struct SimplexDiffusionCoefficients {
    int dim = 0;  // N-1
    std::function<void(double, std::span<const double>, std::span<double>)> drift;
    std::function<void(double, std::span<const double>, std::span<double>)> diffusion;
    std::function<double(double, std::span<const double>)> source;
};

struct FKResult {
    double value = 0.0;
    double se = 0.0;
};

// Smooth cutoff: 1 on the simplex, 0 outside its width-neighborhood.
double simplex_cutoff(std::span<const double> x, double width = 0.1);

// Monte Carlo representation of the transformed post-default value:
// mean of exp((1/(1-gamma)) int tau(X) Psi(s, X) ds) along the truncated diffusion.
FKResult feynman_kac_estimate(const SimplexDiffusionCoefficients& coeffs, double gamma, double t0,
                              std::span<const double> x0, double T, double dt, int n_paths,
                              std::uint64_t seed, int workers = 1);

} // namespace rcp

#endif
