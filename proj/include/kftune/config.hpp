#pragma once

#include "kftune/tuner.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kftune {

/// Raised for malformed or inconsistent configuration files.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One grid axis of a cost sweep.
struct SweepAxis {
    std::string param;  // one of the system's free parameter names
    double lower = 0.0;
    double upper = 0.0;
    int n = 1;
    bool log_scale = false;

    std::vector<double> values() const;
};

enum class SweepMode { PerDt, Reduced, Both };

struct SweepConfig {
    std::vector<SweepAxis> axes;  // parameters without an axis stay at truth_params
    SweepMode mode = SweepMode::Both;
};

struct CheckConfig {
    std::optional<Vector> params;  // default: truth_params
    std::optional<double> dt;      // interval for steps.csv; default: first of dt_list
    double alpha = 0.05;
};

struct RunConfig {
    TuneProblem problem;
    TunerConfig tuner;
    std::vector<TunerKind> tuners;  // tuner.kind may be a single name or a list
    std::uint64_t seed = 1;         // campaign seed (sim.seed)
    int repeats = 1;
    SweepConfig sweep;
    CheckConfig check;
    std::filesystem::path output_dir = "out";
};

/// Builds a run configuration from a JSON tree. Every key is optional except `system`;
/// missing values fall back to the benchmark's defaults. Unknown keys raise ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace kftune
