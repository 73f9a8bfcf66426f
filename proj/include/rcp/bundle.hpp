#ifndef RCP_BUNDLE_HPP
#define RCP_BUNDLE_HPP

#include <cstdint>
#include <random>

#include "rcp/filtering.hpp"
#include "rcp/measure.hpp"
#include "rcp/paths.hpp"
#include "rcp/policy.hpp"
#include "rcp/simulate.hpp"

namespace rcp {

struct BundleOptions {
    double dt = 1e-3;
    bool with_ledger = true;
    bool with_unnormalized = false;  // co-simulate the unnormalized filter
};

// One complete trajectory under the historical measure: chain, default time,
// prices, filter, wealth, and the density processes, all on a shared grid and
// driven by the same Brownian increments.
struct PathBundle {
    ChainPath chain;
    double tau = 0.0;
    PricePath prices;
    FilterPath filter;
    WealthPath wealth;
    DensityLedger ledger;
    std::vector<double> q;  // (n_steps+1) x N when enabled

    std::span<const double> q_at(int k, int n_regimes) const {
        return {q.data() + static_cast<std::size_t>(k) * n_regimes,
                static_cast<std::size_t>(n_regimes)};
    }
};

// Simulates chain -> default -> prices, then runs the filter on the observed
// increments, wealth under the feedback policy, and the density ledger.
void simulate_bundle(const MarketModel& model, const Policy& policy, const BundleOptions& opts,
                     std::mt19937_64& rng, PathBundle& out);

// Same downstream passes for an externally built chain/default/price triple
// (out.chain, out.tau, out.prices must be set).
void run_bundle_from_prices(const MarketModel& model, const Policy& policy,
                            const BundleOptions& opts, PathBundle& out);

// Filter pass alone: consumes the observed increments of an existing price path.
FilterPath run_filter(const MarketModel& model, const PricePath& prices);

} // namespace rcp

#endif
