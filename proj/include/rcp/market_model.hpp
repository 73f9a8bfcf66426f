#ifndef RCP_MARKET_MODEL_HPP
#define RCP_MARKET_MODEL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rcp/schedule.hpp"

namespace rcp {

// Dense row-major square matrix, sized for regime counts (N small).
struct SquareMatrix {
    int n = 0;
    std::vector<double> a;

    SquareMatrix() = default;
    explicit SquareMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
    SquareMatrix(int size, std::vector<double> data) : n(size), a(std::move(data)) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static SquareMatrix identity(int size) {
        SquareMatrix m(size);
        for (int i = 0; i < size; ++i) m(i, i) = 1.0;
        return m;
    }
};

// Full parameterization of the hidden-regime market with a defaultable security.
// Regime-dependent quantities are indexed 0..N-1; the generator A(t) and the
// credit drift a(t, e_i) are piecewise-constant-in-time schedules.
struct MarketModel {
    int n_regimes = 0;
    PiecewiseSchedule<SquareMatrix> generator;              // A(t), rate matrix
    std::vector<double> mu;                                 // stock drift per regime
    PiecewiseSchedule<std::vector<double>> credit_drift;    // a(t, e_i) per regime
    std::vector<double> hazard;                             // default intensity per regime
    double sigma = 0.0;        // stock volatility
    double upsilon = 0.0;      // defaultable-security volatility
    double rate = 0.0;         // risk-free r
    double gamma = 0.0;        // risk aversion, in (0,1)
    double horizon = 0.0;      // T
    std::vector<double> p0;    // initial regime distribution
    double s0 = 1.0;
    double P0 = 1.0;
    double v0 = 1.0;

    double a(double t, int regime) const { return credit_drift.at(t)[static_cast<std::size_t>(regime)]; }
    double mu_of(int regime) const { return mu[static_cast<std::size_t>(regime)]; }
    double hazard_of(int regime) const { return hazard[static_cast<std::size_t>(regime)]; }
};

enum class ModelErrorCode {
    NonConservativeGenerator,
    NonPositiveHazard,
    GammaOutOfRange,
    BadInitialDistribution,
    InvalidField,
};

struct ValidationIssue {
    ModelErrorCode code;
    std::string message;
};

// Raised by validate_or_throw; carries the complete violation list.
class ModelValidationError : public Error {
public:
    ModelValidationError(std::string msg, std::vector<ValidationIssue> issues)
        : Error(std::move(msg)), issues(std::move(issues)) {}
    std::vector<ValidationIssue> issues;
};

// Checks every model invariant; returns the complete list of violations
// (empty when the model is valid). `warnings`, when given, collects
// non-fatal findings such as tied stock drifts.
std::vector<ValidationIssue> validate_model(const MarketModel& model,
                                            std::vector<std::string>* warnings = nullptr);

// validate_model, throwing ModelValidationError when any violation exists.
void validate_or_throw(const MarketModel& model);

// Row-stochastic matrix of p_{ij}(t, s) = P(X_s = e_j | X_t = e_i), computed as
// the ordered product of per-segment matrix exponentials of the generator.
SquareMatrix transition_matrix(const MarketModel& model, double t, double s);

// Drift vector of the observed pre-default log prices for a given regime:
// [mu_i - sigma^2/2, a(t, e_i) - upsilon^2/2].
std::array<double, 2> log_price_drift(const MarketModel& model, double t, int regime);

// FNV-1a hash of a canonical serialization; stable across runs for identical models.
std::uint64_t model_hash(const MarketModel& model);
std::string model_hash_hex(const MarketModel& model);

} // namespace rcp

#endif
