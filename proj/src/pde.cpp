#include "rcp/pde.hpp"

#include <algorithm>
#include <cmath>

#include "rcp/rng.hpp"

namespace rcp {

double ValueSurface::interpolate(double t, double p) const {
    const double eps = 1e-9;
    if (t < -eps || t > grid.T + eps || p < -eps || p > 1.0 + eps)
        throw OutOfDomain("interpolation point outside the grid hull");
    t = std::clamp(t, 0.0, grid.T);
    p = std::clamp(p, 0.0, 1.0);

    const double kf = t / grid.dt();
    const double jf = p / grid.dp();
    int k = std::min(static_cast<int>(kf), grid.n_time - 1);
    int j = std::min(static_cast<int>(jf), grid.n_space - 2);
    const double wt = kf - k;
    const double wp = jf - j;
    return (1.0 - wt) * ((1.0 - wp) * at(k, j) + wp * at(k, j + 1)) +
           wt * ((1.0 - wp) * at(k + 1, j) + wp * at(k + 1, j + 1));
}

namespace {

// Row coefficients of the spatial operator L u = d u_pp + b u_p + c u with
// upwind drift; endpoint rows carry no diffusion (degenerate boundary).
struct OperatorRow {
    double lower = 0.0, diag = 0.0, upper = 0.0;
};

OperatorRow operator_row(const PDECoefficients& c, double t, const Grid1D& g, int j) {
    OperatorRow row;
    const double dp = g.dp();
    const double p = g.node(j);
    const double b = c.drift(t, p);
    const double cc = c.source(t, p);
    if (j == 0) {
        row.diag = -b / dp + cc;
        row.upper = b / dp;
    } else if (j == g.n_space - 1) {
        row.lower = -b / dp;
        row.diag = b / dp + cc;
    } else {
        const double d = c.diffusion(t, p);
        row.lower = d / (dp * dp);
        row.diag = -2.0 * d / (dp * dp) + cc;
        row.upper = d / (dp * dp);
        if (b > 0.0) {
            row.diag -= b / dp;
            row.upper += b / dp;
        } else {
            row.diag += b / dp;
            row.lower -= b / dp;
        }
    }
    return row;
}

// Thomas solve of (I - theta*dt*L) u = rhs; lower/diag/upper hold L's rows.
void solve_tridiagonal(const std::vector<OperatorRow>& L, double theta_dt,
                       const std::vector<double>& rhs, std::vector<double>& u,
                       std::vector<double>& cp, std::vector<double>& dp_work) {
    const std::size_t n = rhs.size();
    const double a0 = 1.0 - theta_dt * L[0].diag;
    cp[0] = -theta_dt * L[0].upper / a0;
    dp_work[0] = rhs[0] / a0;
    for (std::size_t j = 1; j < n; ++j) {
        const double lower = -theta_dt * L[j].lower;
        const double diag = 1.0 - theta_dt * L[j].diag;
        const double upper = -theta_dt * L[j].upper;
        const double m = diag - lower * cp[j - 1];
        cp[j] = upper / m;
        dp_work[j] = (rhs[j] - lower * dp_work[j - 1]) / m;
    }
    u[n - 1] = dp_work[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) u[j] = dp_work[j] - cp[j] * u[j + 1];
}

} // namespace

ValueSurface solve_backward(const PDECoefficients& coeffs, const Grid1D& grid,
                            const SolveScheme& scheme) {
    const int np = grid.n_space;
    const int nt = grid.n_time;
    const double dt = grid.dt();
    const double theta = scheme.theta;

    ValueSurface surf;
    surf.grid = grid;
    surf.values.assign(static_cast<std::size_t>(nt + 1) * np, 0.0);
    for (int j = 0; j < np; ++j) surf.at(nt, j) = coeffs.terminal(grid.node(j));

    std::vector<OperatorRow> L_impl(static_cast<std::size_t>(np));
    std::vector<OperatorRow> L_expl(static_cast<std::size_t>(np));
    std::vector<double> rhs_base(static_cast<std::size_t>(np));
    std::vector<double> rhs(static_cast<std::size_t>(np));
    std::vector<double> u_prev(static_cast<std::size_t>(np));
    std::vector<double> u_iter(static_cast<std::size_t>(np));
    std::vector<double> u_next(static_cast<std::size_t>(np));
    std::vector<double> cp(static_cast<std::size_t>(np)), dw(static_cast<std::size_t>(np));

    double cfl = 0.0;
    const bool has_f = static_cast<bool>(coeffs.nonlinear);

    for (int k = nt - 1; k >= 0; --k) {
        const double t_impl = grid.time(k);
        const double t_expl = grid.time(k + 1);
        for (int j = 0; j < np; ++j) {
            L_impl[static_cast<std::size_t>(j)] = operator_row(coeffs, t_impl, grid, j);
            u_prev[static_cast<std::size_t>(j)] = surf.at(k + 1, j);
        }
        if (theta < 1.0)
            for (int j = 0; j < np; ++j)
                L_expl[static_cast<std::size_t>(j)] = operator_row(coeffs, t_expl, grid, j);

        // explicit-part stability diagnostic
        for (int j = 1; j + 1 < np; ++j) {
            const double d = coeffs.diffusion(t_impl, grid.node(j));
            const double b = coeffs.drift(t_impl, grid.node(j));
            const double ratio =
                (1.0 - theta) * dt * (2.0 * d / (grid.dp() * grid.dp()) + std::abs(b) / grid.dp());
            if (ratio > cfl) cfl = ratio;
        }

        for (int j = 0; j < np; ++j) {
            double v = u_prev[static_cast<std::size_t>(j)];
            if (theta < 1.0) {
                const OperatorRow& r = L_expl[static_cast<std::size_t>(j)];
                double Lu = r.diag * u_prev[static_cast<std::size_t>(j)];
                if (j > 0) Lu += r.lower * u_prev[static_cast<std::size_t>(j) - 1];
                if (j + 1 < np) Lu += r.upper * u_prev[static_cast<std::size_t>(j) + 1];
                v += (1.0 - theta) * dt * Lu;
            }
            if (has_f && theta < 1.0)
                v += (1.0 - theta) * dt *
                     coeffs.nonlinear(t_expl, grid.node(j), u_prev[static_cast<std::size_t>(j)]);
            rhs_base[static_cast<std::size_t>(j)] = v;
        }

        if (!has_f) {
            solve_tridiagonal(L_impl, theta * dt, rhs_base, u_next, cp, dw);
        } else {
            u_iter = u_prev;
            double first_resid = -1.0, resid = 0.0;
            int m = 0;
            for (; m < scheme.picard_max; ++m) {
                for (int j = 0; j < np; ++j)
                    rhs[static_cast<std::size_t>(j)] =
                        rhs_base[static_cast<std::size_t>(j)] +
                        theta * dt *
                            coeffs.nonlinear(t_impl, grid.node(j),
                                             u_iter[static_cast<std::size_t>(j)]);
                solve_tridiagonal(L_impl, theta * dt, rhs, u_next, cp, dw);
                resid = 0.0;
                double scale = 1.0;
                for (int j = 0; j < np; ++j) {
                    resid = std::max(resid, std::abs(u_next[static_cast<std::size_t>(j)] -
                                                     u_iter[static_cast<std::size_t>(j)]));
                    scale = std::max(scale, std::abs(u_next[static_cast<std::size_t>(j)]));
                }
                u_iter = u_next;
                if (first_resid < 0.0) first_resid = resid;
                if (resid < scheme.picard_tol * scale) {
                    ++m;
                    break;
                }
            }
            if (m >= scheme.picard_max && resid > first_resid)
                throw PicardDivergence("Picard iteration diverged at t = " + std::to_string(t_impl));
            if (m > surf.max_picard_iterations) surf.max_picard_iterations = m;
        }

        for (int j = 0; j < np; ++j) {
            const double v = u_next[static_cast<std::size_t>(j)];
            if (!std::isfinite(v))
                throw NonFiniteSurface("non-finite value at t = " + std::to_string(t_impl));
            surf.at(k, j) = v;
        }
    }
    surf.cfl_ratio = cfl;
    return surf;
}

double simplex_cutoff(std::span<const double> x, double width) {
    double viol2 = 0.0;
    double sum = 0.0;
    for (double xi : x) {
        if (xi < 0.0) viol2 += xi * xi;
        sum += xi;
    }
    if (sum > 1.0) viol2 += (sum - 1.0) * (sum - 1.0);
    if (viol2 == 0.0) return 1.0;
    const double s = std::sqrt(viol2) / width;
    if (s >= 1.0) return 0.0;
    const double f1 = std::exp(-1.0 / (1.0 - s));
    const double f0 = std::exp(-1.0 / s);
    return f1 / (f1 + f0);
}

FKResult feynman_kac_estimate(const SimplexDiffusionCoefficients& coeffs, double gamma, double t0,
                              std::span<const double> x0, double T, double dt, int n_paths,
                              std::uint64_t seed, int workers) {
    const int m = coeffs.dim;
    const int n_steps = std::max(1, static_cast<int>(std::llround((T - t0) / dt)));
    const double h = (T - t0) / n_steps;
    const double sqrt_h = std::sqrt(h);

    std::vector<double> values(static_cast<std::size_t>(n_paths));
    std::vector<double> start(x0.begin(), x0.end());

    parallel_for_paths(n_paths, workers, [&](std::int64_t i) {
        std::mt19937_64 rng = path_rng(seed, 0xfe, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> x = start;
        std::vector<double> drift(static_cast<std::size_t>(m));
        std::vector<double> diff(static_cast<std::size_t>(m));
        double integral = 0.0;
        double t = t0;
        for (int k = 0; k < n_steps; ++k) {
            const double cut = simplex_cutoff(x);
            integral += cut * coeffs.source(t, x) * h;
            coeffs.drift(t, x, drift);
            coeffs.diffusion(t, x, diff);
            const double z = normal(rng) * sqrt_h;
            for (int d = 0; d < m; ++d)
                x[static_cast<std::size_t>(d)] +=
                    cut * (drift[static_cast<std::size_t>(d)] * h + diff[static_cast<std::size_t>(d)] * z);
            t += h;
        }
        values[static_cast<std::size_t>(i)] = std::exp(integral / (1.0 - gamma));
    });

    const MeanSE ms = mean_se(values);
    return {ms.mean, ms.se};
}

} // namespace rcp
