#include "rcp/montecarlo.hpp"

#include <cmath>

#include "rcp/bundle.hpp"
#include "rcp/filtering.hpp"
#include "rcp/measure.hpp"

namespace rcp {

MeanSE evaluate_policy_historical(const ExperimentConfig& config) {
    const MarketModel& model = *config.model;
    std::vector<double> xs(static_cast<std::size_t>(config.n_paths));
    BundleOptions opts;
    opts.dt = config.dt;
    opts.with_ledger = false;

    parallel_for_paths(config.n_paths, config.workers, [&](std::int64_t i) {
        thread_local PathBundle bundle;
        std::mt19937_64 rng = path_rng(config.seed, 0x11, static_cast<std::uint64_t>(i));
        simulate_bundle(model, *config.policy, opts, rng, bundle);
        const double vT = bundle.wealth.V[static_cast<std::size_t>(bundle.prices.n_steps)];
        xs[static_cast<std::size_t>(i)] = std::pow(vT, model.gamma) / model.gamma;
    });
    return mean_se(xs);
}

std::vector<double> tilde_criterion_samples(const MarketModel& model, const Policy& policy,
                                            double t0, std::span<const double> p_tilde0, int z0,
                                            int n_paths, double dt, std::uint64_t seed,
                                            int workers) {
    const int n_steps = static_cast<int>(std::llround((model.horizon - t0) / dt));
    std::vector<double> out(static_cast<std::size_t>(n_paths));
    std::vector<double> start(p_tilde0.begin(), p_tilde0.end());

    parallel_for_paths(n_paths, workers, [&](std::int64_t i) {
        std::mt19937_64 rng = path_rng(seed, 0x7e, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        ProjectedFilterState state;
        state.p_tilde = start;
        state.z = z0;
        state.t = t0;
        std::vector<double> scratch;
        const double sqrt_dt = std::sqrt(dt);
        double int_eta = 0.0;
        for (int k = 0; k < n_steps; ++k) {
            // fixed draw order per step keeps noise shared across policies
            const std::array<double, 2> dw = {normal(rng) * sqrt_dt, normal(rng) * sqrt_dt};
            const double u = unif(rng);
            PolicyValue pi = policy.value(state.t, state.p_tilde, state.z);
            require_finite(pi);
            if (state.z == 1) pi.piP = 0.0;
            int_eta += eta_tilde(model, state.t, state.p_tilde, pi) * dt;
            int dH = 0;
            if (state.z == 0) {
                const double h_t = tilde_project(model.hazard, state.p_tilde);
                if (u < -std::expm1(-h_t * dt)) dH = 1;
            }
            filter_step_tilde_inplace(state, model, pi, dw, dH, dt, scratch);
        }
        out[static_cast<std::size_t>(i)] = std::exp(-model.gamma * int_eta);
    });
    return out;
}

MeanSE evaluate_criterion_tilde(const ExperimentConfig& config, int z0) {
    const MarketModel& model = *config.model;
    std::vector<double> p_tilde0(model.p0.begin(), model.p0.end() - 1);
    auto samples = tilde_criterion_samples(model, *config.policy, 0.0, p_tilde0, z0,
                                           config.n_paths, config.dt, config.seed, config.workers);
    return mean_se(samples);
}

VerificationReport supermartingale_test(const MarketModel& model, const PostDefaultProblem& post,
                                        const PreDefaultProblem& pre,
                                        const SupermartingaleOptions& opts) {
    VerificationReport report;
    auto post_ptr = std::shared_ptr<const PostDefaultProblem>(&post, [](const PostDefaultProblem*) {});
    auto pre_ptr = std::shared_ptr<const PreDefaultProblem>(&pre, [](const PreDefaultProblem*) {});
    const std::shared_ptr<const Policy> solved = std::make_shared<SolvedPolicy>(post_ptr, pre_ptr);
    const std::shared_ptr<const Policy> base_policy =
        opts.base_policy ? opts.base_policy : solved;

    int node_id = 0;
    for (const auto& node : opts.nodes) {
        const std::array<double, 1> p_tilde0 = {node.p};
        const double w_ref = node.z == 1 ? post.w.interpolate(node.t, node.p)
                                         : pre.w.interpolate(node.t, node.p);
        const double ref = std::exp(w_ref);
        const std::uint64_t node_seed = opts.seed + 977 * static_cast<std::uint64_t>(node_id);

        const auto base = tilde_criterion_samples(model, *base_policy, node.t, p_tilde0, node.z,
                                                  opts.n_paths, opts.dt, node_seed, opts.workers);
        const MeanSE base_ms = mean_se(base);
        {
            CheckResult c;
            c.name = "supermartingale_equality z=" + std::to_string(node.z) +
                     " node=" + std::to_string(node_id);
            c.estimate = base_ms.mean;
            c.se = base_ms.se;
            c.reference = ref;
            c.tolerance = std::max(3.0 * base_ms.se, 2e-2 * ref);
            c.pass = std::abs(base_ms.mean - ref) <= c.tolerance;
            report.checks.push_back(c);
        }

        // dominance always perturbs the solved optimizer
        const auto solved_base =
            base_policy == solved
                ? base
                : tilde_criterion_samples(model, *solved, node.t, p_tilde0, node.z, opts.n_paths,
                                          opts.dt, node_seed, opts.workers);

        for (const auto& delta : opts.deltas) {
            if (node.z == 1 && delta.piS == 0.0) continue;  // pi^P is inactive post-default
            PerturbedPolicy perturbed(solved, delta.piS, node.z == 1 ? 0.0 : delta.piP);
            const auto pert = tilde_criterion_samples(model, perturbed, node.t, p_tilde0, node.z,
                                                      opts.n_paths, opts.dt, node_seed, opts.workers);
            std::vector<double> diff(solved_base.size());
            for (std::size_t i = 0; i < solved_base.size(); ++i) diff[i] = solved_base[i] - pert[i];
            const MeanSE d = mean_se(diff);
            CheckResult c;
            c.name = "supermartingale_dominance z=" + std::to_string(node.z) +
                     " node=" + std::to_string(node_id) + " dS=" + std::to_string(delta.piS) +
                     " dP=" + std::to_string(delta.piP);
            c.estimate = d.mean;
            c.se = d.se;
            c.reference = 0.0;
            c.tolerance = 2.0 * d.se;
            c.pass = d.mean > 2.0 * d.se;
            report.checks.push_back(c);
        }
        ++node_id;
    }
    return report;
}

FilterIdentityStats filter_identity_suite(const ExperimentConfig& config, double noise_dt) {
    const MarketModel& model = *config.model;
    const int nr = model.n_regimes;
    const int n_steps = static_cast<int>(std::llround(model.horizon / config.dt));
    const int agg = noise_dt > 0.0 ? static_cast<int>(std::llround(config.dt / noise_dt)) : 1;
    if (noise_dt > 0.0 && std::abs(agg * noise_dt - config.dt) > 1e-12)
        throw GridMisalignment("noise_dt must divide dt");

    std::vector<FilterIdentityStats> per_path(static_cast<std::size_t>(config.n_paths));
    std::vector<long> steps_per_path(static_cast<std::size_t>(config.n_paths), 0);
    std::vector<long> hits_per_path(static_cast<std::size_t>(config.n_paths), 0);

    BundleOptions opts;
    opts.dt = config.dt;
    opts.with_ledger = true;
    opts.with_unnormalized = true;

    parallel_for_paths(config.n_paths, config.workers, [&](std::int64_t i) {
        thread_local PathBundle bundle;
        // separate streams so the chain and the noise are resolution-independent
        std::mt19937_64 rng_chain = path_rng(config.seed, 0xc4, static_cast<std::uint64_t>(i));
        bundle.chain = simulate_chain(model, rng_chain);
        bundle.tau = simulate_default(model, bundle.chain, rng_chain);

        std::mt19937_64 rng_noise = path_rng(config.seed, 0xb0, static_cast<std::uint64_t>(i));
        const double fine_dt = noise_dt > 0.0 ? noise_dt : config.dt;
        std::normal_distribution<double> normal(0.0, std::sqrt(fine_dt));
        std::vector<std::array<double, 2>> dW(static_cast<std::size_t>(n_steps), {0.0, 0.0});
        for (int k = 0; k < n_steps; ++k)
            for (int s = 0; s < agg; ++s) {
                dW[static_cast<std::size_t>(k)][0] += normal(rng_noise);
                dW[static_cast<std::size_t>(k)][1] += normal(rng_noise);
            }
        bundle.prices = simulate_prices(model, bundle.chain, bundle.tau, config.dt, dW);
        run_bundle_from_prices(model, *config.policy, opts, bundle);

        FilterIdentityStats st;
        st.min_coordinate = bundle.filter.min_coordinate;
        for (int k = 0; k <= n_steps; ++k) {
            const double hatL = bundle.ledger.hatL(k);
            double qsum = 0.0;
            for (int c = 0; c < nr; ++c) qsum += bundle.q[static_cast<std::size_t>(k) * nr + c];
            for (int c = 0; c < nr; ++c) {
                const double q = bundle.q[static_cast<std::size_t>(k) * nr + c];
                const double p = bundle.filter.p[static_cast<std::size_t>(k) * nr + c];
                st.max_dev_q_vs_Lp = std::max(st.max_dev_q_vs_Lp, std::abs(q - hatL * p) / hatL);
                st.max_dev_p_vs_qnorm = std::max(st.max_dev_p_vs_qnorm, std::abs(p - q / qsum));
            }
        }
        if (!bundle.filter.pre_jump.empty()) {
            st.defaulted_paths = 1;
            const auto mapped = default_jump(model, bundle.filter.pre_jump);
            for (int c = 0; c < nr; ++c)
                st.max_jump_map_error =
                    std::max(st.max_jump_map_error,
                             std::abs(mapped[static_cast<std::size_t>(c)] -
                                      bundle.filter.post_jump[static_cast<std::size_t>(c)]));
        }
        per_path[static_cast<std::size_t>(i)] = st;
        steps_per_path[static_cast<std::size_t>(i)] = n_steps;
        hits_per_path[static_cast<std::size_t>(i)] = bundle.filter.floor_hits;
    });

    FilterIdentityStats total;
    long steps = 0, hits = 0;
    for (std::size_t i = 0; i < per_path.size(); ++i) {
        const auto& st = per_path[i];
        total.max_dev_q_vs_Lp = std::max(total.max_dev_q_vs_Lp, st.max_dev_q_vs_Lp);
        total.max_dev_p_vs_qnorm = std::max(total.max_dev_p_vs_qnorm, st.max_dev_p_vs_qnorm);
        total.min_coordinate = std::min(total.min_coordinate, st.min_coordinate);
        total.max_jump_map_error = std::max(total.max_jump_map_error, st.max_jump_map_error);
        total.defaulted_paths += st.defaulted_paths;
        steps += steps_per_path[i];
        hits += hits_per_path[i];
    }
    total.floor_hit_fraction = steps > 0 ? static_cast<double>(hits) / static_cast<double>(steps) : 0.0;
    return total;
}

} // namespace rcp
