#ifndef RCP_SCHEDULE_HPP
#define RCP_SCHEDULE_HPP

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "rcp/errors.hpp"

namespace rcp {

// Right-continuous piecewise-constant schedule t -> value. Breakpoints must be
// strictly increasing and the first one must be at t = 0.
template <typename T>
class PiecewiseSchedule {
public:
    PiecewiseSchedule() = default;

    explicit PiecewiseSchedule(std::vector<std::pair<double, T>> knots)
        : knots_(std::move(knots)) {
        if (knots_.empty())
            throw ConfigError("schedule needs at least one breakpoint");
        if (knots_.front().first != 0.0)
            throw ConfigError("schedule must start at t = 0");
        for (std::size_t k = 1; k < knots_.size(); ++k)
            if (knots_[k].first <= knots_[k - 1].first)
                throw ConfigError("schedule breakpoints must be increasing");
    }

    static PiecewiseSchedule constant(T value) {
        return PiecewiseSchedule({{0.0, std::move(value)}});
    }

    const T& at(double t) const { return knots_[segment_index(t)].second; }

    std::size_t segment_index(double t) const {
        // last breakpoint <= t (values before t=0 use the first segment)
        std::size_t lo = 0;
        for (std::size_t k = 1; k < knots_.size() && knots_[k].first <= t; ++k)
            lo = k;
        return lo;
    }

    std::size_t size() const { return knots_.size(); }
    double breakpoint(std::size_t k) const { return knots_[k].first; }
    const T& value(std::size_t k) const { return knots_[k].second; }
    const std::vector<std::pair<double, T>>& knots() const { return knots_; }

    // End of the constant segment containing t (0-based segment), capped at `horizon`.
    double segment_end(double t, double horizon) const {
        std::size_t idx = segment_index(t);
        return idx + 1 < knots_.size() ? std::min(knots_[idx + 1].first, horizon)
                                       : horizon;
    }

private:
    std::vector<std::pair<double, T>> knots_;
};

} // namespace rcp

#endif
