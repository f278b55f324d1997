#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spotsim/error.hpp"

namespace spotsim {

enum class JobKind { complex, ligand };

std::string_view to_string(JobKind kind);
JobKind parse_job_kind(std::string_view text);

// Equilibration is run in fixed-size chunks, each checkpointed on completion,
// followed by independently checkpointed transitions.
struct PhasePlan {
  static constexpr std::int64_t kMaxChunkIterations = 8;

  std::int64_t equil_chunks = 0;
  std::int64_t chunk_steps = 0;
  std::int64_t total_equil_steps = 0;
  std::int64_t n_transitions = 0;
  std::int64_t transition_steps = 0;
  std::int64_t max_chunk_iterations = kMaxChunkIterations;

  // Steps in chunk k; the last chunk may be shorter than chunk_steps.
  std::int64_t steps_in_chunk(std::int64_t k) const;

  friend bool operator==(const PhasePlan&, const PhasePlan&) = default;
};

PhasePlan make_phase_plan(double equil_ns, double timestep_fs, std::int64_t chunk_steps,
                          std::int64_t n_transitions, double transition_ps);

// Simulated trajectory (ns) produced by a job that runs the whole plan.
double trajectory_ns(const PhasePlan& plan, double timestep_fs);
double equilibration_ns(const PhasePlan& plan, double timestep_fs);
double transition_phase_ns(const PhasePlan& plan, double timestep_fs);

// Persisted checkpoint state of one job. Compares lexicographically.
struct JobProgress {
  std::int64_t chunks_done = 0;
  std::int64_t transitions_done = 0;
  bool integrated = false;

  friend auto operator<=>(const JobProgress&, const JobProgress&) = default;
};

// Throws ValidationError when progress is inconsistent with the plan.
void validate_progress(const PhasePlan& plan, const JobProgress& progress);

struct ResourceRequest {
  int vcpus = 8;
  // The job takes every vCPU of whatever instance it lands on; vcpus is then
  // only the minimum the instance must offer.
  bool whole_instance = false;
  int gpus = 0;
};

struct JobSpec {
  std::string id;
  std::string target;
  JobKind kind = JobKind::complex;
  // Benchmark system used for runtime prediction, e.g. "cmet_complex".
  std::string system;
  // Label of the free-energy difference this job contributes to.
  std::string fe_label;
  int vcpu_demand = 1;
  bool whole_instance = false;
  int gpu_demand = 0;
  PhasePlan phase_plan;
  double timestep_fs = 2.0;
  std::string input_ref;
  std::string output_ref;
};

struct EnsembleTarget {
  std::string name;
  std::int64_t complex_atoms = 0;
  std::int64_t ligand_atoms = 0;
  std::int64_t edges = 0;
  std::string complex_system;
  std::string ligand_system;
};

struct EnsembleSpec {
  std::vector<EnsembleTarget> targets;
  std::int64_t replicas = 3;
  std::int64_t directions = 2;
  std::int64_t forcefields = 1;
  double equil_ns = 6.0;
  std::int64_t n_transitions = 80;
  double transition_ps = 50.0;
  double timestep_fs = 2.0;
  std::int64_t chunk_steps = 500000;
  ResourceRequest ligand_resources{8, false, 0};
  ResourceRequest complex_resources{1, true, 1};
};

std::vector<Diagnostic> validate_ensemble(const EnsembleSpec& spec);

// Deterministic: equal specs give identical id sequences. Ordering is target,
// then kind (complex before ligand), edge, direction, replica, force field.
std::vector<JobSpec> expand_ensemble(const EnsembleSpec& spec);

std::int64_t expected_job_count(const EnsembleSpec& spec);
std::int64_t fe_difference_count(const EnsembleSpec& spec);

// Default benchmark system id for a target: lower-cased alphanumerics plus
// "_complex" or "_ligand" ("c-Met" -> "cmet_complex").
std::string default_system_id(std::string_view target, JobKind kind);

EnsembleSpec parse_workload(std::string_view json_text);
EnsembleSpec load_workload(const std::string& path);
std::string serialize_workload(const EnsembleSpec& spec);

}  // namespace spotsim
