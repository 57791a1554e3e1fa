#pragma once

#include "kftune/config.hpp"
#include "kftune/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace kftune::cli {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;  // overrides sim.seed
    int threads = 1;
    bool quiet = false;
};

struct CheckOutput {
    ConsistencyReport report;
    CsvTable steps;  // k, t, avg_nis, nis_lower, nis_upper, avg_nees, nees_lower, nees_upper, err_<i>, two_sigma_<i>
    double steps_dt = 0.0;
    std::vector<double> two_sigma_fraction;  // per state, over all runs and steps
};

/// Long-format cost surface: <param>..., dt, cost, log10cost. The dt column holds the
/// interval for per-interval rows and the reducer name for reduced rows.
CsvTable run_sweep(const RunConfig& rc, std::uint64_t seed);

/// Filter at check.params (default truth) against the truth model for every dt in dt_list.
CheckOutput run_check(const RunConfig& rc, std::uint64_t seed);

/// Writes result.json and history.csv (one subdirectory per tuner/repeat when there are several).
int cmd_tune(const Options& opts, std::ostream& log);
/// Writes sweep.csv.
int cmd_sweep(const Options& opts, std::ostream& log);
/// Writes consistency.json and steps.csv.
int cmd_check(const Options& opts, std::ostream& log);
int cmd_list_systems(std::ostream& out);

}  // namespace kftune::cli
