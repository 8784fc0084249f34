#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "table.hpp"

namespace gridlab::cli {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentResult {
  Table table;
  nlohmann::json results;
};

const std::vector<std::string>& experiment_names();

// Validates the config and runs the experiment it names. Worker threads only
// change scheduling; every sample draws from its own (seed, index) stream.
ExperimentResult run_experiment(const ConfigDoc& doc, unsigned threads);

}  // namespace gridlab::cli
