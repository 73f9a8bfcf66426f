#include "rcp/hjb.hpp"

#include <algorithm>
#include <cmath>

#include "rcp/filtering.hpp"

namespace rcp {

namespace {

void require_two_regimes(const MarketModel& model, const char* what) {
    if (model.n_regimes != 2)
        throw ConfigError(std::string(what) + " needs a two-regime model; use the "
                                              "Feynman-Kac estimator for general N");
}

// beta_varpi for N == 2 reduced to a scalar.
double beta_varpi_2(const MarketModel& model, double t, double p) {
    const SquareMatrix& A = model.generator.at(t);
    return A(1, 0) + (A(0, 0) - A(1, 0)) * p;
}

double mu_tilde_2(const MarketModel& model, double p) {
    return model.mu[1] + (model.mu[0] - model.mu[1]) * p;
}

double a_tilde_2(const MarketModel& model, double t, double p) {
    const auto& a = model.credit_drift.at(t);
    return a[1] + (a[0] - a[1]) * p;
}

double h_tilde_2(const MarketModel& model, double p) {
    return model.hazard[1] + (model.hazard[0] - model.hazard[1]) * p;
}

// One-sided at the endpoints, central inside.
double space_gradient(const ValueSurface& s, int k, int j) {
    const double dp = s.grid.dp();
    if (j == 0) return (s.at(k, 1) - s.at(k, 0)) / dp;
    if (j == s.grid.n_space - 1) return (s.at(k, j) - s.at(k, j - 1)) / dp;
    return (s.at(k, j + 1) - s.at(k, j - 1)) / (2.0 * dp);
}

ValueSurface log_transform(const ValueSurface& psi, double gamma) {
    ValueSurface w = psi;
    w.kind = SurfaceKind::Raw;
    for (double& v : w.values) v = (1.0 - gamma) * std::log(v);
    return w;
}

} // namespace

PostCoefficients post_coefficients(const MarketModel& model, double t,
                                   std::span<const double> p_tilde) {
    const int m = model.n_regimes - 1;
    PostCoefficients out;
    out.alpha.resize(static_cast<std::size_t>(m));
    out.phi.resize(static_cast<std::size_t>(m));

    const double mu_t = tilde_project(model.mu, p_tilde);
    const double excess = (mu_t - model.rate) / model.sigma;
    const double g = model.gamma;
    const SquareMatrix& A = model.generator.at(t);

    for (int i = 0; i < m; ++i) {
        const double pt = p_tilde[static_cast<std::size_t>(i)];
        out.alpha[static_cast<std::size_t>(i)] =
            pt * (model.mu[static_cast<std::size_t>(i)] - mu_t) / model.sigma;
        double b = A(m, i);
        for (int l = 0; l < m; ++l)
            b += (A(l, i) - A(m, i)) * p_tilde[static_cast<std::size_t>(l)];
        out.phi[static_cast<std::size_t>(i)] =
            b + g / (1.0 - g) * excess * out.alpha[static_cast<std::size_t>(i)];
    }
    out.psi = g * model.rate + 0.5 * g / (1.0 - g) * excess * excess;
    return out;
}

PreCoefficients pre_coefficients(const MarketModel& model, double t,
                                 std::span<const double> p_tilde) {
    const int m = model.n_regimes - 1;
    PreCoefficients out;
    out.alpha.resize(static_cast<std::size_t>(m) * 2);
    out.phi.resize(static_cast<std::size_t>(m));

    const auto& a_now = model.credit_drift.at(t);
    const double mu_t = tilde_project(model.mu, p_tilde);
    const double a_t = tilde_project(a_now, p_tilde);
    const double h_t = tilde_project(model.hazard, p_tilde);
    const double g = model.gamma;
    const SquareMatrix& A = model.generator.at(t);

    out.upsilon = {model.rate - mu_t, model.rate - a_t};
    const double exc_s = (mu_t - model.rate) / model.sigma;
    const double exc_p = (a_t - model.rate) / model.upsilon;

    for (int i = 0; i < m; ++i) {
        const double pt = p_tilde[static_cast<std::size_t>(i)];
        const double a1 = pt * (model.mu[static_cast<std::size_t>(i)] - mu_t) / model.sigma;
        const double a2 = pt * (a_now[static_cast<std::size_t>(i)] - a_t) / model.upsilon;
        out.alpha[static_cast<std::size_t>(i) * 2] = a1;
        out.alpha[static_cast<std::size_t>(i) * 2 + 1] = a2;

        double b = A(m, i);
        for (int l = 0; l < m; ++l)
            b += (A(l, i) - A(m, i)) * p_tilde[static_cast<std::size_t>(l)];
        // - (gamma/(1-gamma)) alpha Sigma^{-1} Upsilon, with Upsilon = -(excess returns)
        out.phi[static_cast<std::size_t>(i)] = b + g / (1.0 - g) * (a1 * exc_s + a2 * exc_p);
    }
    out.psi = 0.5 * g / (1.0 - g) * (exc_s * exc_s + exc_p * exc_p) + g * model.rate - h_t;
    return out;
}

PostDefaultProblem solve_post(const MarketModel& model, const Grid1D& grid,
                              const SolveScheme& scheme) {
    require_two_regimes(model, "solve_post");
    const double g = model.gamma;

    PDECoefficients c;
    c.diffusion = [&model](double, double p) {
        const double a = p * (1.0 - p) * (model.mu[0] - model.mu[1]) / model.sigma;
        return 0.5 * a * a;
    };
    c.drift = [&model](double t, double p) {
        const double mu_t = mu_tilde_2(model, p);
        const double a = p * (1.0 - p) * (model.mu[0] - model.mu[1]) / model.sigma;
        return beta_varpi_2(model, t, p) +
               model.gamma / (1.0 - model.gamma) * (mu_t - model.rate) / model.sigma * a;
    };
    c.source = [&model](double, double p) {
        const double exc = (mu_tilde_2(model, p) - model.rate) / model.sigma;
        const double psi = model.gamma * model.rate +
                           0.5 * model.gamma / (1.0 - model.gamma) * exc * exc;
        return psi / (1.0 - model.gamma);
    };
    c.terminal = [](double) { return 1.0; };

    PostDefaultProblem post;
    post.grid = grid;
    post.psi = solve_backward(c, grid, scheme);
    post.psi.kind = SurfaceKind::HopfCole;
    post.psi.model_hash = model_hash(model);
    post.w = log_transform(post.psi, g);

    post.policy_piS = post.w;
    for (int k = 0; k <= grid.n_time; ++k)
        for (int j = 0; j < grid.n_space; ++j) {
            const double p = grid.node(j);
            const double alpha = p * (1.0 - p) * (model.mu[0] - model.mu[1]) / model.sigma;
            const double grad = space_gradient(post.w, k, j);
            post.policy_piS.at(k, j) =
                (mu_tilde_2(model, p) - model.rate + model.sigma * grad * alpha) /
                (model.sigma * model.sigma * (1.0 - g));
        }
    return post;
}

double post_policy(const PostDefaultProblem& post, double t, double p) {
    return post.policy_at(t, p);
}

double default_jump_argument(const MarketModel& model, double p) {
    return p * model.hazard[0] / h_tilde_2(model, p);
}

PreDefaultProblem solve_pre(const MarketModel& model, const PostDefaultProblem& post,
                            const Grid1D& grid, const SolveScheme& scheme) {
    require_two_regimes(model, "solve_pre");
    const double g = model.gamma;

    PDECoefficients c;
    c.diffusion = [&model](double t, double p) {
        const double a1 = p * (1.0 - p) * (model.mu[0] - model.mu[1]) / model.sigma;
        const auto& a = model.credit_drift.at(t);
        const double a2 = p * (1.0 - p) * (a[0] - a[1]) / model.upsilon;
        return 0.5 * (a1 * a1 + a2 * a2);
    };
    c.drift = [&model](double t, double p) {
        std::array<double, 1> pt = {p};
        const PreCoefficients pc = pre_coefficients(model, t, pt);
        return pc.phi[0];
    };
    c.source = [&model](double t, double p) {
        std::array<double, 1> pt = {p};
        return pre_coefficients(model, t, pt).psi / (1.0 - model.gamma);
    };
    c.nonlinear = [&model, &post](double t, double p, double u) {
        const double h_t = h_tilde_2(model, p);
        const double jumped = default_jump_argument(model, p);
        const double w_post = post.w.interpolate(t, jumped);
        const double u_pos = u > 0.0 ? u : 1e-300;
        return h_t * std::exp(w_post) * std::pow(u_pos, model.gamma) / (1.0 - model.gamma);
    };
    c.terminal = [](double) { return 1.0; };

    PreDefaultProblem pre;
    pre.grid = grid;
    pre.psi = solve_backward(c, grid, scheme);
    pre.psi.kind = SurfaceKind::HopfCole;
    pre.psi.model_hash = model_hash(model);
    pre.w = log_transform(pre.psi, g);

    pre.policy_piS = pre.w;
    pre.policy_piP = pre.w;
    for (int k = 0; k <= grid.n_time; ++k) {
        const double t = grid.time(k);
        const auto& a = model.credit_drift.at(t);
        for (int j = 0; j < grid.n_space; ++j) {
            const double p = grid.node(j);
            const double a1 = p * (1.0 - p) * (model.mu[0] - model.mu[1]) / model.sigma;
            const double a2 = p * (1.0 - p) * (a[0] - a[1]) / model.upsilon;
            const double grad = space_gradient(pre.w, k, j);
            pre.policy_piS.at(k, j) =
                (mu_tilde_2(model, p) - model.rate + model.sigma * a1 * grad) /
                (model.sigma * model.sigma * (1.0 - g));
            pre.policy_piP.at(k, j) =
                (a_tilde_2(model, t, p) - model.rate + model.upsilon * a2 * grad) /
                (model.upsilon * model.upsilon * (1.0 - g));
        }
    }
    return pre;
}

PolicyValue pre_policy(const PreDefaultProblem& pre, const PostDefaultProblem& post,
                       double t, double p, int z) {
    if (z == 1) return {post.policy_at(t, p), 0.0};
    return pre.policy_at(t, p);
}

double hjb_residual(const MarketModel& model, const PostDefaultProblem& post,
                    const PreDefaultProblem* pre, int z, int k, int j, const PolicyValue& pi) {
    const ValueSurface& w = z == 1 ? post.w : pre->w;
    const Grid1D& grid = w.grid;
    if (k < 1 || k > grid.n_time - 1 || j < 1 || j > grid.n_space - 2)
        throw OutOfDomain("hjb_residual expects an interior grid node");

    const double dt = grid.dt(), dp = grid.dp();
    const double t = grid.time(k);
    const double p = grid.node(j);
    const double w_t = (w.at(k + 1, j) - w.at(k - 1, j)) / (2.0 * dt);
    const double w_p = (w.at(k, j + 1) - w.at(k, j - 1)) / (2.0 * dp);
    const double w_pp = (w.at(k, j + 1) - 2.0 * w.at(k, j) + w.at(k, j - 1)) / (dp * dp);

    const double g = model.gamma;
    const double r = model.rate;
    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;
    const double mu_t = mu_tilde_2(model, p);
    const double bw = beta_varpi_2(model, t, p);
    const double a1 = p * (1.0 - p) * (model.mu[0] - model.mu[1]) / model.sigma;

    if (z == 1) {
        const double beta_g = bw + g * model.sigma * pi.piS * a1;
        return w_t + 0.5 * a1 * a1 * w_pp + 0.5 * w_p * a1 * a1 * w_p + g * r + w_p * beta_g -
               g * pi.piS * (r - mu_t) - 0.5 * s2 * g * (1.0 - g) * pi.piS * pi.piS;
    }

    const auto& a = model.credit_drift.at(t);
    const double a2 = p * (1.0 - p) * (a[0] - a[1]) / model.upsilon;
    const double a_t = a_tilde_2(model, t, p);
    const double h_t = h_tilde_2(model, p);
    const double asq = a1 * a1 + a2 * a2;
    const double beta_g = bw + g * (model.sigma * a1 * pi.piS + model.upsilon * a2 * pi.piP);
    const double w_post = post.w.interpolate(t, default_jump_argument(model, p));
    return w_t + 0.5 * asq * w_pp + 0.5 * w_p * asq * w_p + g * r +
           h_t * (std::exp(w_post - w.at(k, j)) - 1.0) + w_p * beta_g -
           g * pi.piS * (r - mu_t) - g * pi.piP * (r - a_t) -
           0.5 * g * (1.0 - g) * (s2 * pi.piS * pi.piS + u2 * pi.piP * pi.piP);
}

PolicyValue SolvedPolicy::value(double t, std::span<const double> p_tilde, int z) const {
    const double p = std::clamp(p_tilde[0], 0.0, 1.0);
    if (z == 1) return {post_->policy_at(t, p), 0.0};
    return pre_->policy_at(t, p);
}

SimplexDiffusionCoefficients post_fk_coefficients(const MarketModel& model) {
    SimplexDiffusionCoefficients c;
    c.dim = model.n_regimes - 1;
    c.drift = [&model](double t, std::span<const double> x, std::span<double> out) {
        const PostCoefficients pc = post_coefficients(model, t, x);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = pc.phi[i];
    };
    c.diffusion = [&model](double t, std::span<const double> x, std::span<double> out) {
        const PostCoefficients pc = post_coefficients(model, t, x);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = pc.alpha[i];
    };
    c.source = [&model](double t, std::span<const double> x) {
        return post_coefficients(model, t, x).psi;
    };
    return c;
}

} // namespace rcp
