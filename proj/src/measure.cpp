#include "rcp/measure.hpp"

#include <cmath>

#include "rcp/errors.hpp"
#include "rcp/filtering.hpp"

namespace rcp {

namespace {

double eta_from_scalars(const MarketModel& model, double mu_val, double a_val,
                        const PolicyValue& pi) {
    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;
    return -model.rate + pi.piS * (model.rate - mu_val) + pi.piP * (model.rate - a_val) +
           0.5 * (1.0 - model.gamma) * (s2 * pi.piS * pi.piS + u2 * pi.piP * pi.piP);
}

std::array<double, 2> q_from_scalars(const MarketModel& model, double mu_val, double a_val,
                                     const PolicyValue& pi) {
    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;
    return {(mu_val - 0.5 * s2) / s2 + model.gamma * pi.piS,
            (a_val - 0.5 * u2) / u2 + model.gamma * pi.piP};
}

} // namespace

double eta(const MarketModel& model, double t, int regime, const PolicyValue& pi) {
    return eta_from_scalars(model, model.mu_of(regime), model.a(t, regime), pi);
}

double eta_hat(const MarketModel& model, double t, std::span<const double> p,
               const PolicyValue& pi) {
    return eta_from_scalars(model, hat_project(model.mu, p),
                            hat_project(model.credit_drift.at(t), p), pi);
}

double eta_tilde(const MarketModel& model, double t, std::span<const double> p_tilde,
                 const PolicyValue& pi) {
    return eta_from_scalars(model, tilde_project(model.mu, p_tilde),
                            tilde_project(model.credit_drift.at(t), p_tilde), pi);
}

std::array<double, 2> q_vector(const MarketModel& model, double t, int regime,
                               const PolicyValue& pi) {
    return q_from_scalars(model, model.mu_of(regime), model.a(t, regime), pi);
}

std::array<double, 2> q_hat(const MarketModel& model, double t, std::span<const double> p,
                            const PolicyValue& pi) {
    return q_from_scalars(model, hat_project(model.mu, p),
                          hat_project(model.credit_drift.at(t), p), pi);
}

void DensityLedger::init(int n_steps) {
    const std::size_t n = static_cast<std::size_t>(n_steps) + 1;
    log_rho.assign(n, 0.0);
    log_hatL.assign(n, 0.0);
    log_zeta.assign(n, 0.0);
    int_eta_hat.assign(n, 0.0);
}

void DensityLedger::step(const MarketModel& model, int k, double dt,
                         const std::array<double, 2>& dW, const std::array<double, 2>& dY,
                         int regime_left, int regime_tau_minus, int H_k, int H_k1,
                         std::span<const double> p_left, const PolicyValue& pi) {
    const std::size_t uk = static_cast<std::size_t>(k);
    const double t = k * dt;
    const bool alive = H_k == 0;
    const bool jump = alive && H_k1 == 1;
    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;

    // The default step advances the measure-change factors by their jump
    // increments alone, mirroring the filter's exact jump map; the pathwise
    // identity q == hatL p and the single-regime cancellation rho zeta == 1
    // then survive the jump. The eta integral accrues on every step.
    if (jump) {
        const double log_h_hat = std::log(hat_project(model.hazard, p_left));
        const double eta_j = eta_hat(model, t, p_left, pi);
        log_rho[uk + 1] = log_rho[uk] - std::log(model.hazard_of(regime_tau_minus));
        log_zeta[uk + 1] = log_zeta[uk] + log_h_hat;
        log_hatL[uk + 1] = log_hatL[uk] + log_h_hat - model.gamma * eta_j * dt;
        int_eta_hat[uk + 1] = int_eta_hat[uk] + eta_j * dt;
        return;
    }

    // rho: exponent against the true chain regime
    const auto theta = log_price_drift(model, t, regime_left);
    double d_rho = -(theta[0] / model.sigma) * dW[0] - 0.5 * theta[0] * theta[0] / s2 * dt;
    if (alive) {
        d_rho += -(theta[1] / model.upsilon) * dW[1] - 0.5 * theta[1] * theta[1] / u2 * dt;
        d_rho -= (1.0 - model.hazard_of(regime_left)) * dt;
    }
    log_rho[uk + 1] = log_rho[uk] + d_rho;

    // zeta and hatL: exponents against the filter
    const double eta_h = eta_hat(model, t, p_left, pi);
    int_eta_hat[uk + 1] = int_eta_hat[uk] + eta_h * dt;

    const auto qh = q_hat(model, t, p_left, pi);
    double d_zeta = qh[0] * dY[0] - 0.5 * s2 * qh[0] * qh[0] * dt;
    if (alive) {
        const double h_hat = hat_project(model.hazard, p_left);
        d_zeta += qh[1] * dY[1] - 0.5 * u2 * qh[1] * qh[1] * dt;
        d_zeta -= (h_hat - 1.0) * dt;
    }
    log_zeta[uk + 1] = log_zeta[uk] + d_zeta;
    log_hatL[uk + 1] = log_hatL[uk] + d_zeta - model.gamma * eta_h * dt;
}

double DensityLedger::rho(int k) const { return std::exp(log_rho[static_cast<std::size_t>(k)]); }
double DensityLedger::hatL(int k) const { return std::exp(log_hatL[static_cast<std::size_t>(k)]); }
double DensityLedger::zeta(int k) const { return std::exp(log_zeta[static_cast<std::size_t>(k)]); }

NovikovReport novikov_check(const MarketModel& model, const Policy& policy, int n_time_samples,
                            int n_space_samples) {
    const double dt = model.horizon / n_time_samples;
    const int m = model.n_regimes > 1 ? model.n_regimes - 1 : 1;
    std::vector<double> p_tilde(static_cast<std::size_t>(m), 0.0);
    const double g2 = model.gamma * model.gamma;

    double worst = 0.0;
    bool finite = true;
    for (int j = 0; j < n_space_samples; ++j) {
        // sweep the first projected coordinate; remaining mass on the last regime
        p_tilde[0] = n_space_samples == 1 ? 0.5 : static_cast<double>(j) / (n_space_samples - 1);
        for (int z : {0, 1}) {
            double acc_s = 0.0, acc_p = 0.0;
            for (int k = 0; k < n_time_samples; ++k) {
                const PolicyValue pi = policy.value(k * dt, p_tilde, z);
                if (!std::isfinite(pi.piS) || !std::isfinite(pi.piP)) finite = false;
                acc_s += pi.piS * pi.piS * dt;
                acc_p += pi.piP * pi.piP * dt;
            }
            const double bound = 0.5 * g2 * model.sigma * model.sigma * acc_s +
                                 0.5 * g2 * model.upsilon * model.upsilon * acc_p;
            if (!std::isfinite(bound)) finite = false;
            if (bound > worst || !std::isfinite(bound)) worst = bound;
        }
    }
    return {finite && std::isfinite(worst), worst};
}

} // namespace rcp
