#ifndef RCP_MEASURE_HPP
#define RCP_MEASURE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rcp/market_model.hpp"
#include "rcp/policy.hpp"

namespace rcp {

// Wealth-exponent coefficient eta: per-regime, filter-averaged, and projected forms.
double eta(const MarketModel& model, double t, int regime, const PolicyValue& pi);
double eta_hat(const MarketModel& model, double t, std::span<const double> p,
               const PolicyValue& pi);
double eta_tilde(const MarketModel& model, double t, std::span<const double> p_tilde,
                 const PolicyValue& pi);

// Exponent vector Q of the chain-decoupling density, per regime and filter-averaged.
std::array<double, 2> q_vector(const MarketModel& model, double t, int regime,
                               const PolicyValue& pi);
std::array<double, 2> q_hat(const MarketModel& model, double t, std::span<const double> p,
                            const PolicyValue& pi);

// Per-grid-point density processes, all accumulated in log space: rho changes
// the historical measure to the chain-decoupling one, zeta changes the latter
// to the risk-sensitive one, and hatL is the reduced criterion density. Jumps
// enter as discrete log increments at the default grid point; continuous parts
// and compensators use left-endpoint data. Post-default steps use only the
// stock coordinate.
struct DensityLedger {
    std::vector<double> log_rho;
    std::vector<double> log_hatL;
    std::vector<double> log_zeta;
    std::vector<double> int_eta_hat;  // running integral of eta_hat

    void init(int n_steps);

    // Advances point k -> k+1. regime_left is the chain at the step's left
    // endpoint, regime_tau_minus the exact left limit at the default time
    // (only read on the default step). p_left is the filter at the left
    // endpoint; pi the policy applied on the step.
    void step(const MarketModel& model, int k, double dt, const std::array<double, 2>& dW,
              const std::array<double, 2>& dY, int regime_left, int regime_tau_minus, int H_k,
              int H_k1, std::span<const double> p_left, const PolicyValue& pi);

    double rho(int k) const;
    double hatL(int k) const;
    double zeta(int k) const;
};

struct NovikovReport {
    bool pass = false;
    double bound = 0.0;  // value of the exponent bound over the sampled grid
};

// Evaluates the policy over a (t, p_tilde) grid and reports the exponential
// integrability bound (sigma^2 gamma^2 / 2) int (pi^S)^2 + (upsilon^2 gamma^2 / 2)
// int (pi^P)^2; passes iff every sampled value is finite.
NovikovReport novikov_check(const MarketModel& model, const Policy& policy, int n_time_samples,
                            int n_space_samples);

struct CriterionIdentityReport {
    double estimate_a = 0.0, se_a = 0.0;  // direct expected utility
    double estimate_b = 0.0, se_b = 0.0;  // via the reduced criterion density
    double estimate_c = 0.0, se_c = 0.0;  // via the risk-sensitive factorization
};

// Monte Carlo check of the criterion identities: (a) E[V_T^gamma]/gamma,
// (b) (v^gamma/gamma) E[rho_T hatL_T], (c) (v^gamma/gamma) E[rho_T zeta_T
// exp(-gamma int eta_hat)], estimated on shared historical-measure paths.
CriterionIdentityReport criterion_identity_check(const MarketModel& model, const Policy& policy,
                                                 int n_paths, double dt, std::uint64_t seed,
                                                 int workers = 1);

} // namespace rcp

#endif
