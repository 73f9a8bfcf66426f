#ifndef RCP_PATHS_HPP
#define RCP_PATHS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rcp/policy.hpp"

namespace rcp {

// Piecewise-constant, right-continuous regime trajectory on [0, horizon].
// Segment k occupies [times[k], times[k+1]) (the last one runs to the horizon).
struct ChainPath {
    std::vector<double> times;  // segment start times; times[0] == 0
    std::vector<int> regimes;   // regime per segment
    double horizon = 0.0;

    std::size_t jump_count() const { return times.size() - 1; }

    int regime_at(double t) const {
        std::size_t k = times.size() - 1;
        while (k > 0 && times[k] > t) --k;
        return regimes[k];
    }

    // Left limit X_{t-}; differs from regime_at only at jump times.
    int regime_before(double t) const {
        std::size_t k = times.size() - 1;
        while (k > 0 && times[k] >= t) --k;
        return regimes[k];
    }

    // Calls f(regime, u0, u1) over the constant pieces covering [t0, t1].
    template <typename F>
    void for_each_segment(double t0, double t1, F&& f) const {
        if (t1 <= t0) return;
        std::size_t k = times.size() - 1;
        while (k > 0 && times[k] > t0) --k;
        for (; k < times.size(); ++k) {
            const double seg_lo = times[k] > t0 ? times[k] : t0;
            const double seg_hi = (k + 1 < times.size() && times[k + 1] < t1) ? times[k + 1] : t1;
            if (seg_hi > seg_lo) f(regimes[k], seg_lo, seg_hi);
            if (k + 1 >= times.size() || times[k + 1] >= t1) break;
        }
    }
};

// Uniform-grid market path. Arrays of size n_steps+1 are grid-point values;
// per-step arrays (dW, dY) are indexed by the step's left endpoint.
// dY carries the full latent log-price increments on every step; observers
// must ignore the second coordinate from the default step on.
struct PricePath {
    double dt = 0.0;
    int n_steps = 0;
    std::vector<double> S;                 // strictly positive
    std::vector<double> P;                 // zero from default_step on
    std::vector<int> H;                    // default indicator, snapped to grid
    std::vector<double> log_S;             // cumulative log(S/s0)
    std::vector<std::array<double, 2>> dW; // Brownian increments used
    std::vector<std::array<double, 2>> dY; // log-price increments
    double tau = 0.0;                      // exact default time; horizon+1 if none
    int default_step = -1;                 // first grid index with H == 1, or -1

    double time(int k) const { return dt * k; }
    bool alive_at(int k) const { return H[static_cast<std::size_t>(k)] == 0; }
};

struct WealthPath {
    double dt = 0.0;
    int n_steps = 0;
    std::vector<double> V;       // strictly positive
    std::vector<double> log_V;   // cumulative log(V/v0)
    std::vector<PolicyValue> pi; // policy applied per step (left endpoint)
};

// Grid-aligned filter trajectory; p is row-major (n_steps+1) x N.
struct FilterPath {
    int n_regimes = 0;
    int n_steps = 0;
    double dt = 0.0;
    std::vector<double> p;
    std::vector<int> z;
    long floor_hits = 0;              // clamp events across all steps
    double min_coordinate = 1.0;      // smallest p_i seen post-renormalization
    std::vector<double> pre_jump;     // filter state just before the default jump
    std::vector<double> post_jump;    // state right after applying the jump map

    std::span<const double> at(int k) const {
        return {p.data() + static_cast<std::size_t>(k) * n_regimes,
                static_cast<std::size_t>(n_regimes)};
    }
    std::span<const double> tilde_at(int k) const {
        return {p.data() + static_cast<std::size_t>(k) * n_regimes,
                static_cast<std::size_t>(n_regimes - 1)};
    }
};

} // namespace rcp

#endif
