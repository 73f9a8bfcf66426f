#ifndef RCP_CONFIG_HPP
#define RCP_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rcp/market_model.hpp"

namespace rcp {

struct PolicySpec {
    enum class Type { Zero, Constant, Solved, Perturbed };
    Type type = Type::Zero;
    double piS = 0.0, piP = 0.0;      // constant policy values
    double deltaS = 0.0, deltaP = 0.0;  // offsets for the perturbed solved policy
};

struct ExperimentSettings {
    int n_paths = 1000;
    double dt = 1e-3;
    std::uint64_t seed = 12345;
    int workers = 1;
    int n_space = 201;
    int n_time = 2000;
    PolicySpec policy;
};

struct LoadedConfig {
    MarketModel model;
    ExperimentSettings experiment;
    std::vector<std::string> warnings;
};

// Parses and validates a model configuration file; throws ConfigError on
// malformed input and ModelValidationError on invariant violations.
LoadedConfig load_config(const std::string& path);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int n_space = 0;
    int n_time = 0;
    double dt = 0.0;
    int n_paths = 0;
    int workers = 1;
    std::string model_hash;
    std::string timestamp;
    std::vector<std::string> outputs;  // files the run must produce
};

// Written before any computation starts.
void write_manifest(const std::string& path, const RunManifest& manifest);

} // namespace rcp

#endif
