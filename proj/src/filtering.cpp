#include "rcp/filtering.hpp"

#include <cmath>

#include "rcp/errors.hpp"

namespace rcp {

namespace {

bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

// Clamp to the positivity floor and renormalize; returns the clamp count.
long clamp_and_renormalize(std::span<double> p) {
    long hits = 0;
    double sum = 0.0;
    for (double& x : p) {
        if (!(x >= kFilterFloor)) {
            x = kFilterFloor;
            ++hits;
        }
        sum += x;
    }
    for (double& x : p) x /= sum;
    return hits;
}

} // namespace

double hat_project(std::span<const double> values, std::span<const double> p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += values[i] * p[i];
    return acc;
}

double tilde_project(std::span<const double> values, std::span<const double> p_tilde) {
    const std::size_t n1 = values.size() - 1;
    double acc = values[n1];
    for (std::size_t i = 0; i < p_tilde.size(); ++i) acc += (values[i] - values[n1]) * p_tilde[i];
    return acc;
}

std::vector<double> default_jump(const MarketModel& model, std::span<const double> p) {
    const double h_hat = hat_project(model.hazard, p);
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * model.hazard[i] / h_hat;
    return out;
}

void filter_step_P_inplace(FilterState& state, const MarketModel& model,
                           const std::array<double, 2>& dY, int dH, double dt,
                           std::vector<double>& scratch) {
    const int n = model.n_regimes;
    std::vector<double>& p = state.p;

    if (dH == 1 && state.z == 0) {
        // exact jump map; positivity and the simplex are preserved automatically.
        // evaluation order matches default_jump so the two agree bit-for-bit
        const double h_hat = hat_project(model.hazard, p);
        for (int i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)] * model.hazard[i] / h_hat;
        state.z = 1;
        state.t += dt;
        return;
    }

    if (!std::isfinite(dY[0]) || (state.z == 0 && !std::isfinite(dY[1])))
        throw NonFiniteIncrement("filter_step_P received a non-finite observation");

    const double t = state.t;
    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;
    const std::vector<double>& a_now = model.credit_drift.at(t);
    const SquareMatrix& A = model.generator.at(t);

    const double mu_hat = hat_project(model.mu, p);
    const double a_hat = hat_project(a_now, p);
    const double h_hat = hat_project(model.hazard, p);

    const double innov1 = dY[0] - (mu_hat - 0.5 * s2) * dt;
    const double innov2 = dY[1] - (a_hat - 0.5 * u2) * dt;

    // chain-mixing drift (A' p) needs the untouched state
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += A(l, i) * p[static_cast<std::size_t>(l)];
        scratch[static_cast<std::size_t>(i)] = acc;
    }

    for (int i = 0; i < n; ++i) {
        const double pi_i = p[static_cast<std::size_t>(i)];
        double incr = scratch[static_cast<std::size_t>(i)] * dt;
        incr += pi_i * (model.mu[static_cast<std::size_t>(i)] - mu_hat) / s2 * innov1;
        if (state.z == 0) {
            incr += pi_i * (a_now[static_cast<std::size_t>(i)] - a_hat) / u2 * innov2;
            // compensated jump part with dH == 0
            incr -= pi_i * (model.hazard[static_cast<std::size_t>(i)] - h_hat) * dt;
        }
        p[static_cast<std::size_t>(i)] = pi_i + incr;
    }

    state.floor_hits += clamp_and_renormalize(p);
    state.t += dt;
    if (!all_finite(p)) throw NonFiniteIncrement("filter_step_P produced a non-finite state");
}

FilterState filter_step_P(const FilterState& state, const MarketModel& model,
                          const std::array<double, 2>& dY, int dH, double dt) {
    FilterState out = state;
    std::vector<double> scratch(static_cast<std::size_t>(model.n_regimes));
    filter_step_P_inplace(out, model, dY, dH, dt, scratch);
    return out;
}

void unnormalized_filter_step_inplace(UnnormalizedFilterState& state, const MarketModel& model,
                                      const PolicyValue& pi, const std::array<double, 2>& dW_hat,
                                      int dH, double dt, std::vector<double>& scratch) {
    const int n = model.n_regimes;
    std::vector<double>& q = state.q;

    const double t = state.t;
    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;
    const std::vector<double>& a_now = model.credit_drift.at(t);
    const SquareMatrix& A = model.generator.at(t);
    const double gamma = model.gamma;
    const double r = model.rate;

    if (dH == 1 && state.z == 0) {
        // jump factor plus the step's eta accrual, matching the ledger convention
        for (int i = 0; i < n; ++i) {
            const double mu_i = model.mu[static_cast<std::size_t>(i)];
            const double a_i = a_now[static_cast<std::size_t>(i)];
            const double eta_i = -r + pi.piS * (r - mu_i) + pi.piP * (r - a_i) +
                                 0.5 * (1.0 - gamma) *
                                     (s2 * pi.piS * pi.piS + u2 * pi.piP * pi.piP);
            q[static_cast<std::size_t>(i)] *=
                model.hazard[static_cast<std::size_t>(i)] * std::exp(-gamma * eta_i * dt);
        }
        state.z = 1;
        state.t += dt;
        return;
    }

    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += A(l, i) * q[static_cast<std::size_t>(l)];
        scratch[static_cast<std::size_t>(i)] = acc;
    }

    for (int i = 0; i < n; ++i) {
        const double mu_i = model.mu[static_cast<std::size_t>(i)];
        const double a_i = a_now[static_cast<std::size_t>(i)];
        const double q1 = (mu_i - 0.5 * s2) / s2 + gamma * pi.piS;
        const double q2 = (a_i - 0.5 * u2) / u2 + gamma * pi.piP;
        const double eta_i = -r + pi.piS * (r - mu_i) + pi.piP * (r - a_i) +
                             0.5 * (1.0 - gamma) * (s2 * pi.piS * pi.piS + u2 * pi.piP * pi.piP);

        double drift = scratch[static_cast<std::size_t>(i)] / q[static_cast<std::size_t>(i)] -
                       gamma * eta_i;
        double diff, quad;
        if (state.z == 0) {
            drift -= model.hazard[static_cast<std::size_t>(i)] - 1.0;
            diff = q1 * model.sigma * dW_hat[0] + q2 * model.upsilon * dW_hat[1];
            quad = s2 * q1 * q1 + u2 * q2 * q2;
        } else {
            diff = q1 * model.sigma * dW_hat[0];
            quad = s2 * q1 * q1;
        }
        q[static_cast<std::size_t>(i)] *= std::exp((drift - 0.5 * quad) * dt + diff);
    }
    state.t += dt;
}

UnnormalizedFilterState unnormalized_filter_step(const UnnormalizedFilterState& state,
                                                 const MarketModel& model, const PolicyValue& pi,
                                                 const std::array<double, 2>& dW_hat, int dH,
                                                 double dt) {
    UnnormalizedFilterState out = state;
    std::vector<double> scratch(static_cast<std::size_t>(model.n_regimes));
    unnormalized_filter_step_inplace(out, model, pi, dW_hat, dH, dt, scratch);
    return out;
}

ProjectedCoefficients projected_coefficients(const MarketModel& model, double t,
                                             std::span<const double> p_tilde,
                                             const PolicyValue& pi, int z) {
    const int n = model.n_regimes;
    const int m = n - 1;
    ProjectedCoefficients out;
    out.dim = m;
    out.alpha.assign(static_cast<std::size_t>(m) * 2, 0.0);
    out.beta_gamma.assign(static_cast<std::size_t>(m), 0.0);
    out.beta_varpi.assign(static_cast<std::size_t>(m), 0.0);
    out.varrho.assign(static_cast<std::size_t>(m), 0.0);

    const std::vector<double>& a_now = model.credit_drift.at(t);
    const SquareMatrix& A = model.generator.at(t);
    const double mu_t = tilde_project(model.mu, p_tilde);
    const double a_t = tilde_project(a_now, p_tilde);
    const double h_t = tilde_project(model.hazard, p_tilde);

    for (int i = 0; i < m; ++i) {
        const double pt = p_tilde[static_cast<std::size_t>(i)];
        const double a1 = pt * (model.mu[static_cast<std::size_t>(i)] - mu_t) / model.sigma;
        const double a2 =
            z == 0 ? pt * (a_now[static_cast<std::size_t>(i)] - a_t) / model.upsilon : 0.0;
        out.alpha[static_cast<std::size_t>(i) * 2] = a1;
        out.alpha[static_cast<std::size_t>(i) * 2 + 1] = a2;

        double b = A(m, i);
        for (int l = 0; l < m; ++l)
            b += (A(l, i) - A(m, i)) * p_tilde[static_cast<std::size_t>(l)];
        out.beta_varpi[static_cast<std::size_t>(i)] = b;
        out.beta_gamma[static_cast<std::size_t>(i)] =
            b + model.gamma * (a1 * model.sigma * pi.piS + a2 * model.upsilon * pi.piP);

        out.varrho[static_cast<std::size_t>(i)] =
            pt * (model.hazard[static_cast<std::size_t>(i)] - h_t) / h_t;
    }
    return out;
}

void filter_step_tilde_inplace(ProjectedFilterState& state, const MarketModel& model,
                               const PolicyValue& pi, const std::array<double, 2>& dW_tilde,
                               int dH, double dt, std::vector<double>& scratch) {
    const int n = model.n_regimes;
    const int m = n - 1;
    std::vector<double>& pt = state.p_tilde;

    if (dH == 1 && state.z == 0) {
        const double h_t = tilde_project(model.hazard, pt);
        for (int i = 0; i < m; ++i)
            pt[static_cast<std::size_t>(i)] =
                pt[static_cast<std::size_t>(i)] * model.hazard[static_cast<std::size_t>(i)] / h_t;
        state.z = 1;
        state.t += dt;
        return;
    }

    if (!std::isfinite(dW_tilde[0]) || !std::isfinite(dW_tilde[1]))
        throw NonFiniteIncrement("filter_step_tilde received a non-finite increment");

    const ProjectedCoefficients cf = projected_coefficients(model, state.t, pt, pi, state.z);
    const double h_t = tilde_project(model.hazard, pt);

    for (int i = 0; i < m; ++i) {
        double incr = cf.beta_gamma[static_cast<std::size_t>(i)] * dt +
                      cf.alpha_at(i, 0) * dW_tilde[0] + cf.alpha_at(i, 1) * dW_tilde[1];
        if (state.z == 0) incr -= cf.varrho[static_cast<std::size_t>(i)] * h_t * dt;
        pt[static_cast<std::size_t>(i)] += incr;
    }

    // clamp/renormalize through the full simplex vector
    scratch.resize(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        scratch[static_cast<std::size_t>(i)] = pt[static_cast<std::size_t>(i)];
        sum += pt[static_cast<std::size_t>(i)];
    }
    scratch[static_cast<std::size_t>(m)] = 1.0 - sum;
    long hits = 0;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double& x = scratch[static_cast<std::size_t>(i)];
        if (!(x >= kFilterFloor)) {
            x = kFilterFloor;
            ++hits;
        }
        total += x;
    }
    for (int i = 0; i < m; ++i) pt[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(i)] / total;
    state.floor_hits += hits;
    state.t += dt;

    if (!all_finite(pt)) throw NonFiniteIncrement("filter_step_tilde produced a non-finite state");
}

ProjectedFilterState filter_step_tilde(const ProjectedFilterState& state, const MarketModel& model,
                                       const PolicyValue& pi, const std::array<double, 2>& dW_tilde,
                                       int dH, double dt) {
    ProjectedFilterState out = state;
    std::vector<double> scratch;
    filter_step_tilde_inplace(out, model, pi, dW_tilde, dH, dt, scratch);
    return out;
}

} // namespace rcp
