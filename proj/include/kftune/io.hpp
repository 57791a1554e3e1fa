#pragma once

#include "kftune/consistency.hpp"
#include "kftune/montecarlo.hpp"
#include "kftune/tuner.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace kftune {

/// Shortest round-trip text for a double: 17 significant digits, "inf"/"-inf"/"nan".
std::string format_double(double v);
double parse_double(const std::string& s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// iter, phase, <param>..., y, best_so_far, ls_<i>..., signal_variance
CsvTable history_table(const TuneResult& result, const std::vector<std::string>& param_names);

/// k, truth_<i>..., est_<i>..., innov_<j>..., S_<j><j>...
CsvTable runlog_table(const RunLog& log);

nlohmann::json to_json(const ConsistencyReport& report);
nlohmann::json to_json(const TuneResult& result, const TuneProblem& problem,
                       const std::vector<std::string>& param_names);

}  // namespace kftune
