#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spotsim/catalog.hpp"
#include "spotsim/workload.hpp"

namespace spotsim {

enum class BenchPhase { plain, equilibration, transition };

std::string_view to_string(BenchPhase phase);
BenchPhase parse_bench_phase(std::string_view text);

struct BenchSystem {
  std::string name;
  std::int64_t atoms = 0;
  double timestep_fs = 2.0;
  double cutoff_nm = 1.0;
  double grid_spacing_nm = 0.12;
  std::int64_t perturbed_atoms = 0;
};

struct BenchmarkRecord {
  std::string system;
  std::string instance;
  int ranks = 1;
  int threads = 1;
  int pme_ranks = 0;
  BenchPhase phase = BenchPhase::plain;
  double ns_per_day = 0.0;

  // "48x2", or "96x1+32pme" with separate PME ranks.
  std::string config_label() const;
};

struct ScalingPoint {
  int n = 1;
  double ns_per_day = 0.0;
};

struct ScalingSeries {
  std::string system;
  std::string instance;
  std::vector<ScalingPoint> points;
};

struct EfficiencyPoint {
  int n = 1;
  double efficiency = 1.0;
};

struct PerfPoint {
  std::string label;
  double price_per_hour = 0.0;
  double ns_per_day = 0.0;
};

// ns of trajectory per currency unit: ns_per_day / (24 * price_per_hour).
double pp_ratio(double ns_per_day, double price_per_hour);

std::vector<Diagnostic> validate_series(const ScalingSeries& series);
std::vector<EfficiencyPoint> parallel_efficiency(const ScalingSeries& series);
double speedup(const ScalingSeries& series, int n);

// Highest ns/day for (system, instance). Ties go to fewer ranks, then fewer
// PME ranks. Throws NotFoundError without a match.
BenchmarkRecord best_config(const std::vector<BenchmarkRecord>& records, std::string_view system,
                            std::string_view instance, std::optional<BenchPhase> phase = std::nullopt);

// Non-dominated points, ascending price. Throws ValidationError on empty input.
std::vector<PerfPoint> pareto_frontier(const std::vector<PerfPoint>& points);

struct RuntimeOptions {
  // Transition throughput is the equilibrium rate divided by this factor when
  // no transition-phase record exists.
  double transition_slowdown = 1.0;
};

// Rates in ns/day; result in hours.
double runtime_hours(double equil_ns, double equil_rate, double transition_ns, double transition_rate);

// Equilibrium and transition rates for (system, instance). Plain and
// equilibration records both count as equilibrium throughput.
struct PhaseRates {
  BenchmarkRecord equil;
  double equil_rate = 0.0;
  double transition_rate = 0.0;
};

PhaseRates phase_rates(const std::vector<BenchmarkRecord>& records, std::string_view system,
                       std::string_view instance, const RuntimeOptions& options = {});

double predict_job_runtime(const JobSpec& job, std::string_view instance,
                           const std::vector<BenchmarkRecord>& records, const RuntimeOptions& options = {});

enum class Objective { min_cost, min_time };

Objective parse_objective(std::string_view text);

struct RecommendConstraints {
  std::optional<double> max_runtime_h;
  Objective objective = Objective::min_cost;
  PaymentModel payment = PaymentModel::spot;
  std::string region = "us-east-1";
  // Job shape used for the prediction; defaults to the standard 6 ns + 80 x 50 ps plan.
  PhasePlan plan = make_phase_plan(6.0, 2.0, 500000, 80, 50.0);
  double timestep_fs = 2.0;
  RuntimeOptions runtime;
};

struct Recommendation {
  std::string instance;
  BenchmarkRecord config;
  double runtime_h = 0.0;
  double rate_per_hour = 0.0;
  double cost = 0.0;
};

// Empty result when nothing satisfies the constraints. Throws NotFoundError
// when no benchmarked instance with a price exists for the system at all.
std::vector<Recommendation> recommend(const std::vector<BenchmarkRecord>& records, const Catalog& catalog,
                                      std::string_view system, const RecommendConstraints& constraints);

std::vector<BenchmarkRecord> parse_benchmarks(std::string_view csv_text, const std::string& source = "benchmarks");
std::vector<BenchmarkRecord> load_benchmarks(const std::string& path);
std::vector<ScalingSeries> parse_scaling(std::string_view csv_text, const std::string& source = "scaling");
std::vector<ScalingSeries> load_scaling(const std::string& path);
std::vector<BenchSystem> parse_systems(std::string_view csv_text, const std::string& source = "systems");
std::vector<BenchSystem> load_systems(const std::string& path);

}  // namespace spotsim
