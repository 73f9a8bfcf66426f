#include <cmath>

#include "rcp/bundle.hpp"
#include "rcp/measure.hpp"
#include "rcp/rng.hpp"

namespace rcp {

CriterionIdentityReport criterion_identity_check(const MarketModel& model, const Policy& policy,
                                                 int n_paths, double dt, std::uint64_t seed,
                                                 int workers) {
    const double v_g = std::pow(model.v0, model.gamma) / model.gamma;
    std::vector<double> xa(static_cast<std::size_t>(n_paths));
    std::vector<double> xb(static_cast<std::size_t>(n_paths));
    std::vector<double> xc(static_cast<std::size_t>(n_paths));

    BundleOptions opts;
    opts.dt = dt;
    opts.with_ledger = true;

    parallel_for_paths(n_paths, workers, [&](std::int64_t i) {
        thread_local PathBundle bundle;
        std::mt19937_64 rng = path_rng(seed, 0x1d, static_cast<std::uint64_t>(i));
        simulate_bundle(model, policy, opts, rng, bundle);
        const int n = bundle.prices.n_steps;
        const double vT = bundle.wealth.V[static_cast<std::size_t>(n)];
        xa[static_cast<std::size_t>(i)] = std::pow(vT, model.gamma) / model.gamma;
        xb[static_cast<std::size_t>(i)] = v_g * bundle.ledger.rho(n) * bundle.ledger.hatL(n);
        xc[static_cast<std::size_t>(i)] =
            v_g * bundle.ledger.rho(n) * bundle.ledger.zeta(n) *
            std::exp(-model.gamma * bundle.ledger.int_eta_hat[static_cast<std::size_t>(n)]);
    });

    const MeanSE a = mean_se(xa), b = mean_se(xb), c = mean_se(xc);
    return {a.mean, a.se, b.mean, b.se, c.mean, c.se};
}

} // namespace rcp
