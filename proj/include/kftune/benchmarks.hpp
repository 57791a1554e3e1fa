#pragma once

#include "kftune/acquisition.hpp"
#include "kftune/montecarlo.hpp"
#include "kftune/statespace.hpp"

#include <string>
#include <vector>

namespace kftune {

/// Benchmark system together with its ground truth and default experiment settings.
struct BenchmarkSpec {
    std::string name;
    std::string description;
    std::vector<std::string> free_params;  // process intensities first, then measurement
    Vector truth;
    SearchSpace search;
    std::vector<double> dt_list;
    ControlSignal control;
};

/// tracking1d, msd, tracking2d, cascade_msd
const std::vector<std::string>& benchmark_names();

const BenchmarkSpec& benchmark_spec(const std::string& name);

/// Continuous model for `name` with noise intensities `params` on the diagonals of V and W.
ContinuousModel build(const std::string& name, const Vector& params);

}  // namespace kftune
