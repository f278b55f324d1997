#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spotsim/orchestrator.hpp"

namespace spotsim {

// Scenario file: paths are resolved against the directory of the file.
struct Scenario {
  std::string name;
  std::string catalog_path;
  std::string workload_path;
  std::vector<std::string> benchmark_paths;
  ScenarioConfig config;
};

Scenario parse_scenario(std::string_view json_text, const std::string& base_dir, const std::string& source = "scenario");
Scenario load_scenario(const std::string& path);

struct SimulationOutput {
  std::string name;
  SummaryReport summary;
  std::vector<MetricsRow> metrics;
  std::vector<EventLogEntry> events;
};

// Loads every input the scenario references, expands the workload and runs
// the simulation to completion.
SimulationOutput run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

// Writes metrics.csv, summary.json and, if requested, events.log into dir
// (created if missing). Existing files are overwritten.
void write_outputs(const SimulationOutput& output, const std::string& dir, bool event_log);

}  // namespace spotsim
