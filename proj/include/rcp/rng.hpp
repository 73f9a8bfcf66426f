#ifndef RCP_RNG_HPP
#define RCP_RNG_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace rcp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4ecb874323217ULL;
    return x ^ (x >> 31);
}

// Counter-based per-path engine: path `index` of stream `stream` always sees
// the same sequence, independent of thread scheduling.
inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(stream ^ splitmix64(index)));
    return std::mt19937_64(s);
}

// Runs fn(i) for i in [0, n). Results must be written to per-index slots so the
// outcome does not depend on the worker count.
template <typename Fn>
void parallel_for_paths(std::int64_t n, int workers, Fn&& fn) {
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto body = [&]() {
        const std::int64_t chunk = 64;
        for (;;) {
            std::int64_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            std::int64_t end = begin + chunk < n ? begin + chunk : n;
            for (std::int64_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
}

// Pairwise (tree) summation over per-path slots; deterministic for a fixed
// slot order regardless of how the slots were filled.
inline double pairwise_sum(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += xs[i];
        return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(xs, lo, mid) + pairwise_sum(xs, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : pairwise_sum(xs, 0, xs.size());
}

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

// Sample mean and its standard error from per-path values.
inline MeanSE mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    if (xs.empty()) return {};
    const double mean = pairwise_sum(xs) / n;
    if (xs.size() < 2) return {mean, 0.0};
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

} // namespace rcp

#endif
