#include "rcp/config.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

namespace rcp {

namespace {

using nlohmann::json;

std::vector<double> parse_vector(const json& j, const char* name, std::size_t n) {
    if (!j.is_array() || j.size() != n)
        throw ConfigError(std::string(name) + " must be an array of length " + std::to_string(n));
    std::vector<double> out;
    out.reserve(n);
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

SquareMatrix parse_matrix(const json& j, int n) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(n))
        throw ConfigError("generator matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    SquareMatrix m(n);
    for (int i = 0; i < n; ++i) {
        const auto row = parse_vector(j[static_cast<std::size_t>(i)], "generator row",
                                      static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) m(i, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

PiecewiseSchedule<SquareMatrix> parse_generator(const json& j, int n) {
    std::vector<std::pair<double, SquareMatrix>> knots;
    if (j.is_array() && !j.empty() && j[0].is_array()) {
        // constant-generator shorthand: a bare matrix
        knots.emplace_back(0.0, parse_matrix(j, n));
    } else if (j.is_array()) {
        for (const auto& item : j)
            knots.emplace_back(item.at("t").get<double>(), parse_matrix(item.at("matrix"), n));
    } else {
        throw ConfigError("generator must be a matrix or a schedule of {t, matrix}");
    }
    return PiecewiseSchedule<SquareMatrix>(std::move(knots));
}

PiecewiseSchedule<std::vector<double>> parse_credit_drift(const json& j, int n) {
    std::vector<std::pair<double, std::vector<double>>> knots;
    if (j.is_array() && !j.empty() && j[0].is_number()) {
        knots.emplace_back(0.0, parse_vector(j, "credit_drift", static_cast<std::size_t>(n)));
    } else if (j.is_array()) {
        for (const auto& item : j)
            knots.emplace_back(item.at("t").get<double>(),
                               parse_vector(item.at("values"), "credit_drift values",
                                            static_cast<std::size_t>(n)));
    } else {
        throw ConfigError("credit_drift must be a vector or a schedule of {t, values}");
    }
    return PiecewiseSchedule<std::vector<double>>(std::move(knots));
}

PolicySpec parse_policy(const json& j) {
    PolicySpec spec;
    const std::string type = j.value("type", "zero");
    if (type == "zero") {
        spec.type = PolicySpec::Type::Zero;
    } else if (type == "constant") {
        spec.type = PolicySpec::Type::Constant;
        spec.piS = j.value("piS", 0.0);
        spec.piP = j.value("piP", 0.0);
    } else if (type == "solved") {
        spec.type = PolicySpec::Type::Solved;
    } else if (type == "perturbed") {
        spec.type = PolicySpec::Type::Perturbed;
        spec.deltaS = j.value("deltaS", 0.0);
        spec.deltaP = j.value("deltaP", 0.0);
    } else {
        throw ConfigError("unknown policy type '" + type + "'");
    }
    return spec;
}

} // namespace

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }

    LoadedConfig out;
    try {
        MarketModel& m = out.model;
        m.n_regimes = j.at("n_regimes").get<int>();
        if (m.n_regimes < 1) throw ConfigError("n_regimes must be >= 1");
        const std::size_t n = static_cast<std::size_t>(m.n_regimes);
        m.generator = parse_generator(j.at("generator"), m.n_regimes);
        m.mu = parse_vector(j.at("mu"), "mu", n);
        m.credit_drift = parse_credit_drift(j.at("credit_drift"), m.n_regimes);
        m.hazard = parse_vector(j.at("hazard"), "hazard", n);
        m.sigma = j.at("sigma").get<double>();
        m.upsilon = j.at("upsilon").get<double>();
        m.rate = j.at("rate").get<double>();
        m.gamma = j.at("gamma").get<double>();
        m.horizon = j.at("horizon").get<double>();
        m.p0 = parse_vector(j.at("p0"), "p0", n);
        m.s0 = j.value("s0", 1.0);
        m.P0 = j.value("P0", 1.0);
        m.v0 = j.value("v0", 1.0);

        if (j.contains("experiment")) {
            const json& e = j["experiment"];
            out.experiment.n_paths = e.value("n_paths", out.experiment.n_paths);
            out.experiment.dt = e.value("dt", out.experiment.dt);
            out.experiment.seed = e.value("seed", out.experiment.seed);
            out.experiment.workers = e.value("workers", out.experiment.workers);
            out.experiment.n_space = e.value("n_space", out.experiment.n_space);
            out.experiment.n_time = e.value("n_time", out.experiment.n_time);
            if (e.contains("policy")) out.experiment.policy = parse_policy(e["policy"]);
        }
    } catch (const json::exception& e) {
        throw ConfigError("bad config " + path + ": " + e.what());
    }

    const auto issues = validate_model(out.model, &out.warnings);
    if (!issues.empty()) {
        std::string msg = "invalid market model in " + path + ":";
        for (const auto& it : issues) msg += "\n  - " + it.message;
        throw ModelValidationError(msg, issues);
    }
    return out;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config_path;
    j["out_dir"] = manifest.out_dir;
    j["seed"] = manifest.seed;
    j["grid"] = {{"n_space", manifest.n_space},
                 {"n_time", manifest.n_time},
                 {"dt", manifest.dt},
                 {"n_paths", manifest.n_paths}};
    j["workers"] = manifest.workers;
    j["model_hash"] = manifest.model_hash;
    j["timestamp"] = manifest.timestamp;
    j["outputs"] = manifest.outputs;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest " + path);
    out << j.dump(2) << '\n';
}

} // namespace rcp
