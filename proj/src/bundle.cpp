#include "rcp/bundle.hpp"

#include <cmath>

namespace rcp {

FilterPath run_filter(const MarketModel& model, const PricePath& prices) {
    const int n = prices.n_steps;
    const int nr = model.n_regimes;

    FilterPath out;
    out.n_regimes = nr;
    out.n_steps = n;
    out.dt = prices.dt;
    out.p.resize(static_cast<std::size_t>(n + 1) * nr);
    out.z.resize(static_cast<std::size_t>(n) + 1);

    FilterState state;
    state.p = model.p0;
    state.z = prices.H[0];
    state.t = 0.0;
    std::vector<double> scratch(static_cast<std::size_t>(nr));

    auto record = [&](int k) {
        for (int i = 0; i < nr; ++i)
            out.p[static_cast<std::size_t>(k) * nr + i] = state.p[static_cast<std::size_t>(i)];
        out.z[static_cast<std::size_t>(k)] = state.z;
        for (int i = 0; i < nr; ++i)
            if (state.p[static_cast<std::size_t>(i)] < out.min_coordinate)
                out.min_coordinate = state.p[static_cast<std::size_t>(i)];
    };
    record(0);

    for (int k = 0; k < n; ++k) {
        const int dH = prices.H[static_cast<std::size_t>(k) + 1] - prices.H[static_cast<std::size_t>(k)];
        if (dH == 1) out.pre_jump = state.p;
        filter_step_P_inplace(state, model, prices.dY[static_cast<std::size_t>(k)], dH, prices.dt,
                              scratch);
        if (dH == 1) out.post_jump = state.p;
        record(k + 1);
    }
    out.floor_hits = state.floor_hits;
    return out;
}

void simulate_bundle(const MarketModel& model, const Policy& policy, const BundleOptions& opts,
                     std::mt19937_64& rng, PathBundle& out) {
    out.chain = simulate_chain(model, rng);
    out.tau = simulate_default(model, out.chain, rng);
    out.prices = simulate_prices(model, out.chain, out.tau, opts.dt, rng);
    run_bundle_from_prices(model, policy, opts, out);
}

void run_bundle_from_prices(const MarketModel& model, const Policy& policy,
                            const BundleOptions& opts, PathBundle& out) {
    out.filter = run_filter(model, out.prices);
    out.wealth = simulate_wealth(model, out.prices, policy, out.filter);

    const int n = out.prices.n_steps;
    const int nr = model.n_regimes;

    if (opts.with_ledger) {
        out.ledger.init(n);
        for (int k = 0; k < n; ++k) {
            const int regime_left = out.chain.regime_at(out.prices.time(k));
            const int regime_tau_minus =
                out.tau <= model.horizon ? out.chain.regime_before(out.tau) : regime_left;
            out.ledger.step(model, k, opts.dt, out.prices.dW[static_cast<std::size_t>(k)],
                            out.prices.dY[static_cast<std::size_t>(k)], regime_left,
                            regime_tau_minus, out.prices.H[static_cast<std::size_t>(k)],
                            out.prices.H[static_cast<std::size_t>(k) + 1], out.filter.at(k),
                            out.wealth.pi[static_cast<std::size_t>(k)]);
        }
    }

    if (opts.with_unnormalized) {
        out.q.resize(static_cast<std::size_t>(n + 1) * nr);
        UnnormalizedFilterState qs;
        qs.q = model.p0;
        qs.z = out.prices.H[0];
        qs.t = 0.0;
        std::vector<double> scratch(static_cast<std::size_t>(nr));
        for (int i = 0; i < nr; ++i) out.q[static_cast<std::size_t>(i)] = qs.q[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) {
            const int dH =
                out.prices.H[static_cast<std::size_t>(k) + 1] - out.prices.H[static_cast<std::size_t>(k)];
            const std::array<double, 2> dW_hat = {
                out.prices.dY[static_cast<std::size_t>(k)][0] / model.sigma,
                out.prices.dY[static_cast<std::size_t>(k)][1] / model.upsilon};
            unnormalized_filter_step_inplace(qs, model, out.wealth.pi[static_cast<std::size_t>(k)],
                                             dW_hat, dH, opts.dt, scratch);
            for (int i = 0; i < nr; ++i)
                out.q[static_cast<std::size_t>(k + 1) * nr + i] = qs.q[static_cast<std::size_t>(i)];
        }
    }
}

} // namespace rcp
