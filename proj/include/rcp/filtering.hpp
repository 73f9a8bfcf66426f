#ifndef RCP_FILTERING_HPP
#define RCP_FILTERING_HPP

#include <array>
#include <span>
#include <vector>

#include "rcp/market_model.hpp"
#include "rcp/policy.hpp"

namespace rcp {

// Positivity floor for filter coordinates under discretization error.
inline constexpr double kFilterFloor = 1e-12;

// Normalized filter probabilities plus the default indicator.
struct FilterState {
    std::vector<double> p;  // simplex vector, length N
    int z = 0;              // default indicator
    double t = 0.0;
    long floor_hits = 0;    // clamp events so far
};

// Unnormalized filter coordinates (all strictly positive), q_0 = p_0.
struct UnnormalizedFilterState {
    std::vector<double> q;
    int z = 0;
    double t = 0.0;
};

// Projected (N-1)-dimensional controlled state.
struct ProjectedFilterState {
    std::vector<double> p_tilde;  // first N-1 coordinates
    int z = 0;
    double t = 0.0;
    long floor_hits = 0;
};

// Coefficients of the projected filter SDE at (t, p_tilde, pi, z).
struct ProjectedCoefficients {
    int dim = 0;                     // N-1
    std::vector<double> alpha;       // (N-1) x 2, row-major; second column zero post-default
    std::vector<double> beta_gamma;  // drift including the policy term
    std::vector<double> beta_varpi;  // pure chain-mixing drift
    std::vector<double> varrho;      // default-jump coefficient

    double alpha_at(int i, int col) const { return alpha[static_cast<std::size_t>(i) * 2 + col]; }
};

// Probability-weighted average sum_i values[i] p[i].
double hat_project(std::span<const double> values, std::span<const double> p);

// l_N + sum_i (l_i - l_N) p_tilde_i: the same average through projected coordinates.
double tilde_project(std::span<const double> values, std::span<const double> p_tilde);

// Exact default-jump map p_i -> p_i h_i / h_hat(p); stays on the simplex.
std::vector<double> default_jump(const MarketModel& model, std::span<const double> p);

// One Euler step of the normalized filter SDE under the historical measure,
// driven by the observed log-price increment and the default increment. A step
// with dH == 1 applies the exact jump map and nothing else. Post-default steps
// use only the stock coordinate of the innovation. scratch must have length N.
void filter_step_P_inplace(FilterState& state, const MarketModel& model,
                           const std::array<double, 2>& dY, int dH, double dt,
                           std::vector<double>& scratch);
FilterState filter_step_P(const FilterState& state, const MarketModel& model,
                          const std::array<double, 2>& dY, int dH, double dt);

// One log-Euler step of the unnormalized filter SDE (valid under the chain-
// decoupling measure), driven by dW_hat = Sigma_Y^{-1} dY and the default
// increment. scratch must have length N.
void unnormalized_filter_step_inplace(UnnormalizedFilterState& state, const MarketModel& model,
                                      const PolicyValue& pi, const std::array<double, 2>& dW_hat,
                                      int dH, double dt, std::vector<double>& scratch);
UnnormalizedFilterState unnormalized_filter_step(const UnnormalizedFilterState& state,
                                                 const MarketModel& model, const PolicyValue& pi,
                                                 const std::array<double, 2>& dW_hat, int dH,
                                                 double dt);

// Coefficient fields of the projected controlled SDE.
ProjectedCoefficients projected_coefficients(const MarketModel& model, double t,
                                             std::span<const double> p_tilde,
                                             const PolicyValue& pi, int z);

// One Euler step of the projected controlled SDE (risk-sensitive measure),
// with the default jump compensated at intensity h_tilde while alive. dH == 1
// applies the exact jump map.
void filter_step_tilde_inplace(ProjectedFilterState& state, const MarketModel& model,
                               const PolicyValue& pi, const std::array<double, 2>& dW_tilde,
                               int dH, double dt, std::vector<double>& scratch);
ProjectedFilterState filter_step_tilde(const ProjectedFilterState& state, const MarketModel& model,
                                       const PolicyValue& pi, const std::array<double, 2>& dW_tilde,
                                       int dH, double dt);

} // namespace rcp

#endif
