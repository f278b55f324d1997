#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spotsim/catalog.hpp"
#include "spotsim/orchestrator.hpp"
#include "spotsim/perfmodel.hpp"
#include "spotsim/workload.hpp"

namespace spotsim::test {

std::string data_path(const std::string& rel);
std::string oracle_path(const std::string& rel);
std::string read_file(const std::string& path);

JobSpec make_job(std::string id, std::string system, int vcpus, bool whole_instance, int gpus,
                 const PhasePlan& plan, JobKind kind = JobKind::complex);

// The three-job, two-region scenario with one scripted preemption.
struct MicroScenario {
  Catalog catalog;
  std::vector<BenchmarkRecord> records;
  std::vector<JobSpec> jobs;
  ScenarioConfig config;
};
MicroScenario micro_scenario();

// Small random scenario for the property suite. Every scenario is feasible
// unless allow_infeasible is set, in which case a few jobs may not fit.
struct GeneratedScenario {
  Catalog catalog;
  std::vector<BenchmarkRecord> records;
  std::vector<JobSpec> jobs;
  ScenarioConfig config;
};
GeneratedScenario generate_scenario(std::uint64_t seed, bool allow_infeasible = true);

// Steps the simulation to the end, checking every invariant after each
// event. Returns one message per violation (empty when clean).
struct PropertyResult {
  std::vector<std::string> violations;
  std::int64_t events = 0;
  std::int64_t preemptions = 0;
  std::int64_t jobs = 0;
  std::int64_t completed = 0;
};
PropertyResult check_properties(Simulation& sim);

}  // namespace spotsim::test
