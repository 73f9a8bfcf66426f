#include "rcp/simulate.hpp"

#include <cmath>

#include "rcp/errors.hpp"

namespace rcp {

namespace {

double draw_uniform(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double draw_exponential(std::mt19937_64& rng) {
    // inverse CDF keeps the draw count at one uniform per event
    return -std::log1p(-draw_uniform(rng));
}

int draw_discrete(std::span<const double> weights, double total, std::mt19937_64& rng) {
    const double u = draw_uniform(rng) * total;
    double acc = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        acc += weights[j];
        if (u < acc) return static_cast<int>(j);
    }
    return static_cast<int>(weights.size()) - 1;
}

// int_{t0}^{t1} mu(X_u) du along the chain, exact.
double mu_occupation(const MarketModel& model, const ChainPath& chain, double t0, double t1) {
    double acc = 0.0;
    chain.for_each_segment(t0, t1, [&](int regime, double u0, double u1) {
        acc += model.mu_of(regime) * (u1 - u0);
    });
    return acc;
}

// int_{t0}^{t1} a(u, X_u) du, splitting on both chain jumps and schedule breakpoints.
double credit_occupation(const MarketModel& model, const ChainPath& chain, double t0, double t1) {
    double acc = 0.0;
    chain.for_each_segment(t0, t1, [&](int regime, double u0, double u1) {
        double u = u0;
        while (u < u1) {
            const double seg_end = model.credit_drift.segment_end(u, u1);
            acc += model.a(u, regime) * (seg_end - u);
            if (seg_end <= u) break;
            u = seg_end;
        }
    });
    return acc;
}

int steps_for(double horizon, double dt) {
    const int n = static_cast<int>(std::llround(horizon / dt));
    if (n < 1 || std::abs(n * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw GridMisalignment("dt must divide the horizon");
    return n;
}

} // namespace

ChainPath simulate_chain(const MarketModel& model, std::mt19937_64& rng) {
    ChainPath path;
    path.horizon = model.horizon;
    path.times.push_back(0.0);
    path.regimes.push_back(draw_discrete(model.p0, 1.0, rng));

    std::vector<double> weights(static_cast<std::size_t>(model.n_regimes));
    double t = 0.0;
    while (t < model.horizon) {
        const int i = path.regimes.back();
        const SquareMatrix& A = model.generator.at(t);
        const double seg_end = model.generator.segment_end(t, model.horizon);
        const double rate = -A(i, i);
        if (rate <= 0.0) {
            t = seg_end;
            continue;
        }
        const double hold = draw_exponential(rng) / rate;
        if (t + hold >= seg_end) {
            // no jump within this constant segment; memorylessness lets us redraw
            t = seg_end;
            continue;
        }
        t += hold;
        double total = 0.0;
        for (int j = 0; j < model.n_regimes; ++j) {
            weights[static_cast<std::size_t>(j)] = j == i ? 0.0 : A(i, j);
            total += weights[static_cast<std::size_t>(j)];
        }
        path.times.push_back(t);
        path.regimes.push_back(draw_discrete(weights, total, rng));
    }
    return path;
}

double hazard_integral(const MarketModel& model, const ChainPath& chain, double t0, double t1) {
    double acc = 0.0;
    chain.for_each_segment(t0, t1, [&](int regime, double u0, double u1) {
        acc += model.hazard_of(regime) * (u1 - u0);
    });
    return acc;
}

double simulate_default(const MarketModel& model, const ChainPath& chain, std::mt19937_64& rng) {
    const double chi = draw_exponential(rng);
    double acc = 0.0;
    double tau = chain.horizon + 1.0;
    chain.for_each_segment(0.0, chain.horizon, [&](int regime, double u0, double u1) {
        if (tau <= chain.horizon) return;
        const double h = model.hazard_of(regime);
        const double inc = h * (u1 - u0);
        if (acc + inc >= chi) tau = u0 + (chi - acc) / h;
        acc += inc;
    });
    return tau;
}

namespace {

PricePath build_prices(const MarketModel& model, const ChainPath& chain, double tau, double dt,
                       std::vector<std::array<double, 2>> dW) {
    const int n = steps_for(model.horizon, dt);
    if (static_cast<int>(dW.size()) != n)
        throw GridMisalignment("Brownian increment count does not match the grid");

    PricePath path;
    path.dt = dt;
    path.n_steps = n;
    path.dW = std::move(dW);
    path.dY.resize(static_cast<std::size_t>(n));
    path.S.resize(static_cast<std::size_t>(n) + 1);
    path.P.resize(static_cast<std::size_t>(n) + 1);
    path.H.resize(static_cast<std::size_t>(n) + 1, 0);
    path.log_S.resize(static_cast<std::size_t>(n) + 1);
    path.tau = tau;

    if (tau <= model.horizon) {
        int k = static_cast<int>(std::ceil(tau / dt - 1e-12));
        if (k * dt < tau) ++k;
        if (k < 1) k = 1;
        path.default_step = k > n ? -1 : k;
        if (path.default_step < 0) path.tau = model.horizon + 1.0;
    }

    const double half_s2 = 0.5 * model.sigma * model.sigma;
    const double half_u2 = 0.5 * model.upsilon * model.upsilon;

    double log_P = 0.0;
    path.S[0] = model.s0;
    path.P[0] = model.P0;
    for (int k = 0; k < n; ++k) {
        const double t0 = k * dt, t1 = (k + 1) * dt;
        const double int_mu = mu_occupation(model, chain, t0, t1);
        const double int_a = credit_occupation(model, chain, t0, t1);
        path.dY[k][0] = int_mu - half_s2 * dt + model.sigma * path.dW[k][0];
        path.dY[k][1] = int_a - half_u2 * dt + model.upsilon * path.dW[k][1];
        path.log_S[k + 1] = path.log_S[k] + path.dY[k][0];
        log_P += path.dY[k][1];
        path.S[k + 1] = model.s0 * std::exp(path.log_S[k + 1]);
        const bool dead = path.default_step >= 0 && k + 1 >= path.default_step;
        path.P[k + 1] = dead ? 0.0 : model.P0 * std::exp(log_P);
        path.H[k + 1] = dead ? 1 : 0;
    }
    return path;
}

} // namespace

PricePath simulate_prices(const MarketModel& model, const ChainPath& chain, double tau,
                          double dt, std::mt19937_64& rng) {
    const int n = steps_for(model.horizon, dt);
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    std::vector<std::array<double, 2>> dW(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        dW[k][0] = normal(rng);
        dW[k][1] = normal(rng);
    }
    return build_prices(model, chain, tau, dt, std::move(dW));
}

PricePath simulate_prices(const MarketModel& model, const ChainPath& chain, double tau,
                          double dt, const std::vector<std::array<double, 2>>& dW) {
    return build_prices(model, chain, tau, dt, dW);
}

WealthPath simulate_wealth(const MarketModel& model, const PricePath& prices,
                           const Policy& policy, const FilterPath& filter) {
    const int n = prices.n_steps;
    if (filter.n_steps != n || filter.dt != prices.dt)
        throw GridMisalignment("filter path grid does not match the price grid");

    WealthPath wealth;
    wealth.dt = prices.dt;
    wealth.n_steps = n;
    wealth.V.resize(static_cast<std::size_t>(n) + 1);
    wealth.log_V.resize(static_cast<std::size_t>(n) + 1);
    wealth.pi.resize(static_cast<std::size_t>(n));
    wealth.V[0] = model.v0;

    const double s2 = model.sigma * model.sigma;
    const double u2 = model.upsilon * model.upsilon;
    const double dt = prices.dt;

    for (int k = 0; k < n; ++k) {
        const int z = prices.H[static_cast<std::size_t>(k)];
        PolicyValue pi = policy.value(prices.time(k), filter.tilde_at(k), z);
        require_finite(pi);
        if (z == 1) pi.piP = 0.0;
        wealth.pi[static_cast<std::size_t>(k)] = pi;

        // Written as a combination of the observed log-price increments so that
        // pi == (1,0) reproduces the stock return bit-for-bit.
        const double extra = model.rate * (1.0 - pi.piS - pi.piP) +
                             0.5 * (pi.piS * s2 + pi.piP * u2) -
                             0.5 * (pi.piS * pi.piS * s2 + pi.piP * pi.piP * u2);
        const double dlog = pi.piS * prices.dY[static_cast<std::size_t>(k)][0] +
                            pi.piP * prices.dY[static_cast<std::size_t>(k)][1] + extra * dt;
        wealth.log_V[k + 1] = wealth.log_V[k] + dlog;
        wealth.V[k + 1] = model.v0 * std::exp(wealth.log_V[k + 1]);
    }
    return wealth;
}

} // namespace rcp
