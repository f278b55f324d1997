#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spotsim/catalog.hpp"
#include "spotsim/perfmodel.hpp"
#include "spotsim/workload.hpp"

namespace spotsim {

enum class WorkKind { chunk, transition, integrate, done };

struct WorkItem {
  WorkKind kind = WorkKind::chunk;
  std::int64_t index = 0;

  friend bool operator==(const WorkItem&, const WorkItem&) = default;
};

// Next unit of work for a job restarted from its persisted progress.
WorkItem resume_point(const PhasePlan& plan, const JobProgress& progress);

enum class RoutingMode { weighted_random, proportional_roundrobin };

std::string_view to_string(RoutingMode mode);
RoutingMode parse_routing_mode(std::string_view text);

struct RoutingPolicy {
  // Kept in the given order; the round-robin breaks ties by position.
  std::vector<std::pair<std::string, double>> weights;
  RoutingMode mode = RoutingMode::weighted_random;
};

std::vector<Diagnostic> validate_routing(const RoutingPolicy& policy);

// Uniform draw in [0, 1) from the top 53 bits of one engine output.
double uniform01(std::mt19937_64& rng);

class Router {
 public:
  Router(RoutingPolicy policy, std::uint64_t seed);

  const std::string& route();
  const RoutingPolicy& policy() const { return policy_; }

 private:
  RoutingPolicy policy_;
  std::mt19937_64 rng_;
  double total_ = 0.0;
  std::vector<double> current_;
};

enum class EventKind {
  job_submitted,
  instance_acquired,
  chunk_done,
  transition_done,
  integrate_done,
  preemption,
  instance_idle_timeout,
  job_completed,
};

std::string_view to_string(EventKind kind);

struct EventLogEntry {
  double time_s = 0.0;
  std::int64_t seq = 0;
  EventKind kind = EventKind::job_submitted;
  std::string job_id;
  std::string instance_id;
};

struct InstanceState {
  std::string id;
  std::string type;
  std::string family;
  std::string region;
  int vcpus = 0;
  int gpus = 0;
  double requested_at = 0.0;
  std::optional<double> acquired_at;
  std::optional<double> terminated_at;
  std::vector<std::size_t> resident_jobs;
  int free_vcpus = 0;
  int free_gpus = 0;
  double rate_per_hour = 0.0;

  bool active() const { return acquired_at && !terminated_at; }
  bool live() const { return !terminated_at; }
};

enum class JobStatus { pending, queued, placed, running, completed, failed };

std::string_view to_string(JobStatus status);

struct JobState {
  JobSpec spec;
  JobStatus status = JobStatus::pending;
  JobProgress progress;
  std::string region;
  std::optional<std::size_t> instance;
  int alloc_vcpus = 0;
  int alloc_gpus = 0;
  WorkItem current;
  double item_start = 0.0;
  double item_duration = 0.0;
  std::int64_t attempt = 0;
  int submissions = 0;
  int preemptions = 0;
};

struct PreemptionModel {
  double default_rate_per_instance_hour = 0.0;
  std::map<std::pair<std::string, std::string>, double> rate_per_instance_hour;  // (region, family)

  double rate(const std::string& region, const std::string& family) const;
};

struct ScriptedPreemption {
  double time_s = 0.0;
  std::string instance_id;
};

struct ScenarioConfig {
  // Empty weights fall back to the catalog region weights (1 where unset).
  RoutingPolicy routing;
  // Preference order; empty means every catalog type in catalog order.
  std::vector<std::string> complex_types;
  std::vector<std::string> ligand_types;
  PreemptionModel preemption;
  std::vector<ScriptedPreemption> scripted_preemptions;
  // Infinity keeps idle instances running until the last job finishes.
  double grace_s = 120.0;
  std::uint64_t seed = 0;
  double metrics_interval_s = 60.0;
  double acquisition_latency_s = 0.0;
  std::optional<double> acquisitions_per_minute;
  double transfer_latency_s = 0.0;
  PaymentModel payment = PaymentModel::spot;
  RuntimeOptions runtime;
  double complex_submit_s = 0.0;
  double ligand_submit_s = 0.0;
};

std::vector<Diagnostic> validate_config(const ScenarioConfig& config, const Catalog& catalog);

struct LedgerEntry {
  std::string instance_id;
  std::string type;
  std::string region;
  double duration_s = 0.0;
  double rate_per_hour = 0.0;
  double cost = 0.0;
};

struct BillingLedger {
  std::vector<LedgerEntry> entries;
  double total = 0.0;
  double productive_core_seconds = 0.0;
  double wasted_core_seconds = 0.0;
};

struct MetricsRow {
  double time_s = 0.0;
  std::string region;
  std::string instance_type;
  int active_instances = 0;
  int vcpus_in_use = 0;
  int gpus_in_use = 0;
};

struct JobCounters {
  std::int64_t submitted = 0;
  std::int64_t completed = 0;
  std::int64_t failed = 0;
  std::int64_t in_flight = 0;
};

struct CounterSample {
  double time_s = 0.0;
  JobCounters counters;
};

struct SummaryReport {
  std::uint64_t seed = 0;
  double makespan_s = 0.0;
  double total_cost = 0.0;
  std::string currency = "USD";
  double productive_core_hours = 0.0;
  double wasted_core_hours = 0.0;
  std::int64_t fe_differences = 0;
  double cost_per_ddg = 0.0;
  std::int64_t jobs_total = 0;
  std::int64_t jobs_completed = 0;
  std::int64_t jobs_failed = 0;
  std::int64_t preemptions = 0;
  std::int64_t resubmissions = 0;
  std::int64_t instances_acquired = 0;
  int peak_instances = 0;
  int peak_vcpus = 0;
  int peak_gpus = 0;
  BillingLedger ledger;
};

std::string summary_json(const SummaryReport& report);
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string event_log_csv(const std::vector<EventLogEntry>& events);

// Single-threaded event engine. Movable, not copyable; one instance may be
// handed to another thread but must not be shared.
class Simulation {
 public:
  Simulation(Catalog catalog, std::vector<BenchmarkRecord> records, std::vector<JobSpec> jobs,
             std::int64_t fe_differences, ScenarioConfig config);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  // Processes the next live event. False once the queue is empty.
  bool step();
  // Processes every event with time <= until, then moves the clock to until.
  void advance(double until);
  // Runs to completion. Throws InfeasibleError if jobs are left stranded.
  SummaryReport run();

  SummaryReport summary() const;
  double now() const;
  bool all_jobs_terminal() const;

  const std::vector<InstanceState>& instances() const;
  const std::vector<JobState>& jobs() const;
  const std::vector<EventLogEntry>& event_log() const;
  const std::vector<MetricsRow>& metrics() const;
  const std::vector<CounterSample>& counter_samples() const;
  const BillingLedger& ledger() const;
  JobCounters counters() const;
  // Wasted seconds per (preemption, job) with the duration of the item lost.
  const std::vector<std::pair<double, double>>& waste_records() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spotsim
