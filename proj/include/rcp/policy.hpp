#ifndef RCP_POLICY_HPP
#define RCP_POLICY_HPP

#include <cmath>
#include <memory>
#include <span>

#include "rcp/errors.hpp"

namespace rcp {

struct PolicyValue {
    double piS = 0.0;
    double piP = 0.0;
};

// Feedback map (t, p_tilde, z) -> (pi^S, pi^P). p_tilde holds the first N-1
// filter coordinates. Implementations must be safe for concurrent calls.
class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicyValue value(double t, std::span<const double> p_tilde, int z) const = 0;
};

class ConstantPolicy : public Policy {
public:
    ConstantPolicy(double piS, double piP) : pi_{piS, piP} {}
    PolicyValue value(double, std::span<const double>, int z) const override {
        return z == 0 ? pi_ : PolicyValue{pi_.piS, 0.0};
    }

private:
    PolicyValue pi_;
};

// Adds a fixed offset to another policy's output; the post-default pi^P stays 0.
class PerturbedPolicy : public Policy {
public:
    PerturbedPolicy(std::shared_ptr<const Policy> base, double deltaS, double deltaP)
        : base_(std::move(base)), dS_(deltaS), dP_(deltaP) {}
    PolicyValue value(double t, std::span<const double> p_tilde, int z) const override {
        PolicyValue v = base_->value(t, p_tilde, z);
        v.piS += dS_;
        if (z == 0) v.piP += dP_;
        return v;
    }

private:
    std::shared_ptr<const Policy> base_;
    double dS_, dP_;
};

inline void require_finite(const PolicyValue& v) {
    if (!std::isfinite(v.piS) || !std::isfinite(v.piP))
        throw PolicyNonFinite("policy produced a non-finite value");
}

} // namespace rcp

#endif
