#include "rcp/market_model.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace rcp {

namespace {

bool finite(double x) { return std::isfinite(x); }

void append(std::vector<ValidationIssue>& out, ModelErrorCode code, std::string msg) {
    out.push_back({code, std::move(msg)});
}

} // namespace

std::vector<ValidationIssue> validate_model(const MarketModel& model,
                                            std::vector<std::string>* warnings) {
    std::vector<ValidationIssue> issues;
    const int n = model.n_regimes;
    const std::size_t un = static_cast<std::size_t>(n);

    if (n < 1) {
        append(issues, ModelErrorCode::InvalidField, "n_regimes must be >= 1");
        return issues; // nothing else is checkable
    }
    if (model.mu.size() != un)
        append(issues, ModelErrorCode::InvalidField, "mu must have one entry per regime");
    if (model.hazard.size() != un)
        append(issues, ModelErrorCode::InvalidField, "hazard must have one entry per regime");
    if (model.p0.size() != un)
        append(issues, ModelErrorCode::BadInitialDistribution, "p0 must have one entry per regime");

    if (model.generator.size() == 0) {
        append(issues, ModelErrorCode::InvalidField, "generator schedule is empty");
    } else {
        for (std::size_t k = 0; k < model.generator.size(); ++k) {
            const SquareMatrix& A = model.generator.value(k);
            if (A.n != n || A.a.size() != un * un) {
                append(issues, ModelErrorCode::InvalidField, "generator matrix has wrong shape");
                continue;
            }
            for (int i = 0; i < n; ++i) {
                double row_sum = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double v = A(i, j);
                    if (!finite(v)) {
                        append(issues, ModelErrorCode::NonConservativeGenerator,
                               "generator entry is not finite");
                        continue;
                    }
                    if (i != j && v < 0.0)
                        append(issues, ModelErrorCode::NonConservativeGenerator,
                               "generator off-diagonal is negative at row " + std::to_string(i));
                    row_sum += v;
                }
                if (std::abs(row_sum) > 1e-10)
                    append(issues, ModelErrorCode::NonConservativeGenerator,
                           "generator row " + std::to_string(i) + " does not sum to zero");
            }
        }
    }

    for (std::size_t k = 0; k < model.credit_drift.size(); ++k) {
        const auto& vals = model.credit_drift.value(k);
        if (vals.size() != un)
            append(issues, ModelErrorCode::InvalidField, "credit_drift values must have one entry per regime");
        for (double v : vals)
            if (!finite(v))
                append(issues, ModelErrorCode::InvalidField, "credit_drift value is not finite");
    }
    if (model.credit_drift.size() == 0)
        append(issues, ModelErrorCode::InvalidField, "credit_drift schedule is empty");

    for (std::size_t i = 0; i < model.hazard.size(); ++i)
        if (!(model.hazard[i] > 0.0) || !finite(model.hazard[i]))
            append(issues, ModelErrorCode::NonPositiveHazard,
                   "hazard[" + std::to_string(i) + "] must be strictly positive");

    if (!(model.gamma > 0.0 && model.gamma < 1.0))
        append(issues, ModelErrorCode::GammaOutOfRange, "gamma must lie in (0,1)");

    if (model.p0.size() == un) {
        double sum = 0.0;
        bool positive = true;
        for (double p : model.p0) {
            if (!(p > 0.0) || !finite(p)) positive = false;
            sum += p;
        }
        if (!positive)
            append(issues, ModelErrorCode::BadInitialDistribution, "p0 entries must be strictly positive");
        if (std::abs(sum - 1.0) > 1e-10)
            append(issues, ModelErrorCode::BadInitialDistribution, "p0 must sum to one");
    }

    if (!(model.sigma > 0.0))
        append(issues, ModelErrorCode::InvalidField, "sigma must be positive");
    if (!(model.upsilon > 0.0))
        append(issues, ModelErrorCode::InvalidField, "upsilon must be positive");
    if (!(model.horizon > 0.0))
        append(issues, ModelErrorCode::InvalidField, "horizon must be positive");
    if (!(model.s0 > 0.0) || !(model.P0 > 0.0) || !(model.v0 > 0.0))
        append(issues, ModelErrorCode::InvalidField, "initial prices and wealth must be positive");
    if (!finite(model.rate))
        append(issues, ModelErrorCode::InvalidField, "rate must be finite");

    if (warnings && model.mu.size() == un) {
        for (std::size_t i = 0; i < un; ++i)
            for (std::size_t j = i + 1; j < un; ++j)
                if (model.mu[i] == model.mu[j])
                    warnings->push_back("mu has tied components (" + std::to_string(i) + "," +
                                        std::to_string(j) + "); filtering stays well-defined");
    }

    return issues;
}

void validate_or_throw(const MarketModel& model) {
    auto issues = validate_model(model);
    if (issues.empty()) return;
    std::string msg = "invalid market model:";
    for (const auto& it : issues) msg += "\n  - " + it.message;
    throw ModelValidationError(msg, std::move(issues));
}

SquareMatrix transition_matrix(const MarketModel& model, double t, double s) {
    const int n = model.n_regimes;
    if (s < t) throw OutOfDomain("transition_matrix requires s >= t");
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    double u = t;
    while (u < s) {
        const double seg_end = model.generator.segment_end(u, s);
        const double du = seg_end - u;
        if (du <= 0.0) break;
        const SquareMatrix& A = model.generator.at(u);
        Eigen::MatrixXd Ae(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Ae(i, j) = A(i, j);
        P = P * (Ae * du).exp().eval();
        u = seg_end;
    }
    SquareMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = P(i, j);
    return out;
}

std::array<double, 2> log_price_drift(const MarketModel& model, double t, int regime) {
    return {model.mu_of(regime) - 0.5 * model.sigma * model.sigma,
            model.a(t, regime) - 0.5 * model.upsilon * model.upsilon};
}

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

void hash_double(std::uint64_t& h, double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    hash_bytes(h, buf, std::char_traits<char>::length(buf));
    hash_bytes(h, ";", 1);
}

} // namespace

std::uint64_t model_hash(const MarketModel& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_double(h, static_cast<double>(model.n_regimes));
    for (std::size_t k = 0; k < model.generator.size(); ++k) {
        hash_double(h, model.generator.breakpoint(k));
        for (double v : model.generator.value(k).a) hash_double(h, v);
    }
    for (double v : model.mu) hash_double(h, v);
    for (std::size_t k = 0; k < model.credit_drift.size(); ++k) {
        hash_double(h, model.credit_drift.breakpoint(k));
        for (double v : model.credit_drift.value(k)) hash_double(h, v);
    }
    for (double v : model.hazard) hash_double(h, v);
    hash_double(h, model.sigma);
    hash_double(h, model.upsilon);
    hash_double(h, model.rate);
    hash_double(h, model.gamma);
    hash_double(h, model.horizon);
    for (double v : model.p0) hash_double(h, v);
    hash_double(h, model.s0);
    hash_double(h, model.P0);
    hash_double(h, model.v0);
    return h;
}

std::string model_hash_hex(const MarketModel& model) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(model_hash(model)));
    return std::string(buf);
}

} // namespace rcp
