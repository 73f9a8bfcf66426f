#ifndef RCP_SIMULATE_HPP
#define RCP_SIMULATE_HPP

#include <random>

#include "rcp/market_model.hpp"
#include "rcp/paths.hpp"
#include "rcp/policy.hpp"

namespace rcp {

// Event-driven chain simulation under the historical measure: per-segment
// exponential holding times (exact for piecewise-constant generators); the
// initial state is drawn from p0.
ChainPath simulate_chain(const MarketModel& model, std::mt19937_64& rng);

// Canonical default-time construction: first t with int_0^t h(X_u) du >= chi,
// chi ~ Exp(1), inverted exactly on the piecewise-constant hazard path.
// Returns horizon + 1 when no default occurs on [0, T].
double simulate_default(const MarketModel& model, const ChainPath& chain, std::mt19937_64& rng);

// Exact hazard integral int_{t0}^{t1} h(X_u) du along a chain path.
double hazard_integral(const MarketModel& model, const ChainPath& chain, double t0, double t1);

// Log-Euler price path on a uniform grid of step dt (must divide the horizon).
// Log increments use the exact occupation integral of the regime drift plus
// Sigma_Y dW; P and H snap the default to the first grid point >= tau.
PricePath simulate_prices(const MarketModel& model, const ChainPath& chain, double tau,
                          double dt, std::mt19937_64& rng);

// Same, with externally supplied Brownian increments (size T/dt).
PricePath simulate_prices(const MarketModel& model, const ChainPath& chain, double tau,
                          double dt, const std::vector<std::array<double, 2>>& dW);

// Wealth under a feedback policy evaluated at the grid's left endpoints, using
// the same Brownian increments as the price path. Stepping is in log space;
// pi^P is forced to zero from the default grid point on.
WealthPath simulate_wealth(const MarketModel& model, const PricePath& prices,
                           const Policy& policy, const FilterPath& filter);

} // namespace rcp

#endif
