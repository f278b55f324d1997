#include "spotsim/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "csv_util.hpp"
#include "json_util.hpp"

namespace spotsim {

std::string_view to_string(BenchPhase phase) {
  switch (phase) {
    case BenchPhase::plain: return "plain";
    case BenchPhase::equilibration: return "equilibration";
    case BenchPhase::transition: return "transition";
  }
  return "unknown";
}

BenchPhase parse_bench_phase(std::string_view text) {
  if (text == "plain") return BenchPhase::plain;
  if (text == "equilibration") return BenchPhase::equilibration;
  if (text == "transition") return BenchPhase::transition;
  throw ParseError("unknown benchmark phase '" + std::string(text) + "'");
}

Objective parse_objective(std::string_view text) {
  if (text == "cost" || text == "min_cost") return Objective::min_cost;
  if (text == "time" || text == "min_time") return Objective::min_time;
  throw ParseError("unknown objective '" + std::string(text) + "'");
}

std::string BenchmarkRecord::config_label() const {
  if (pme_ranks > 0) return fmt::format("{}x{}+{}pme", ranks, threads, pme_ranks);
  return fmt::format("{}x{}", ranks, threads);
}

double pp_ratio(double ns_per_day, double price_per_hour) {
  if (!(ns_per_day > 0) || !(price_per_hour > 0))
    throw ValidationError("pp_ratio", "performance and price must be > 0");
  return ns_per_day / (24.0 * price_per_hour);
}

std::vector<Diagnostic> validate_series(const ScalingSeries& s) {
  std::vector<Diagnostic> d;
  const std::string loc = s.system + "@" + s.instance;
  if (s.points.empty()) {
    d.push_back({loc, "series has no points"});
    return d;
  }
  if (s.points.front().n != 1) d.push_back({loc, "series missing the n = 1 baseline"});
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (!(s.points[i].ns_per_day > 0)) d.push_back({fmt::format("{}[n={}]", loc, s.points[i].n), "ns_per_day must be > 0"});
    if (i > 0 && s.points[i].n <= s.points[i - 1].n)
      d.push_back({fmt::format("{}[n={}]", loc, s.points[i].n), "n must be strictly increasing"});
  }
  return d;
}

std::vector<EfficiencyPoint> parallel_efficiency(const ScalingSeries& series) {
  if (auto d = validate_series(series); !d.empty()) throw ValidationError(std::move(d));
  const double p1 = series.points.front().ns_per_day;
  std::vector<EfficiencyPoint> out;
  out.reserve(series.points.size());
  for (const auto& p : series.points)
    out.push_back({p.n, p.n == 1 ? 1.0 : p.ns_per_day / (p.n * p1)});
  return out;
}

double speedup(const ScalingSeries& series, int n) {
  if (auto d = validate_series(series); !d.empty()) throw ValidationError(std::move(d));
  for (const auto& p : series.points)
    if (p.n == n) return n == 1 ? 1.0 : p.ns_per_day / series.points.front().ns_per_day;
  throw NotFoundError(fmt::format("series {}@{} has no point for n = {}", series.system, series.instance, n));
}

namespace {

bool better(const BenchmarkRecord& a, const BenchmarkRecord& b) {
  if (a.ns_per_day != b.ns_per_day) return a.ns_per_day > b.ns_per_day;
  if (a.ranks != b.ranks) return a.ranks < b.ranks;
  return a.pme_ranks < b.pme_ranks;
}

bool is_equilibrium(BenchPhase p) { return p == BenchPhase::plain || p == BenchPhase::equilibration; }

const BenchmarkRecord* find_best(const std::vector<BenchmarkRecord>& records, std::string_view system,
                                 std::string_view instance, bool (*accept)(BenchPhase)) {
  const BenchmarkRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.system != system || r.instance != instance || !accept(r.phase)) continue;
    if (!best || better(r, *best)) best = &r;
  }
  return best;
}

}  // namespace

BenchmarkRecord best_config(const std::vector<BenchmarkRecord>& records, std::string_view system,
                            std::string_view instance, std::optional<BenchPhase> phase) {
  const BenchmarkRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.system != system || r.instance != instance) continue;
    if (phase && r.phase != *phase) continue;
    if (!best || better(r, *best)) best = &r;
  }
  if (!best)
    throw NotFoundError(fmt::format("no benchmark record for system '{}' on '{}'", system, instance));
  return *best;
}

std::vector<PerfPoint> pareto_frontier(const std::vector<PerfPoint>& points) {
  if (points.empty()) throw ValidationError("points", "pareto frontier of an empty set");
  std::vector<PerfPoint> out;
  for (const auto& p : points) {
    bool dominated = false;
    for (const auto& q : points) {
      if (q.ns_per_day >= p.ns_per_day && q.price_per_hour <= p.price_per_hour &&
          (q.ns_per_day > p.ns_per_day || q.price_per_hour < p.price_per_hour)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const PerfPoint& a, const PerfPoint& b) {
    if (a.price_per_hour != b.price_per_hour) return a.price_per_hour < b.price_per_hour;
    if (a.ns_per_day != b.ns_per_day) return a.ns_per_day > b.ns_per_day;
    return a.label < b.label;
  });
  return out;
}

double runtime_hours(double equil_ns, double equil_rate, double transition_ns, double transition_rate) {
  if (!(equil_rate > 0)) throw ValidationError("equil_rate", "must be > 0");
  double days = equil_ns / equil_rate;
  if (transition_ns > 0) {
    if (!(transition_rate > 0)) throw ValidationError("transition_rate", "must be > 0");
    days += transition_ns / transition_rate;
  }
  return days * 24.0;
}

PhaseRates phase_rates(const std::vector<BenchmarkRecord>& records, std::string_view system,
                       std::string_view instance, const RuntimeOptions& options) {
  if (!(options.transition_slowdown > 0)) throw ValidationError("transition_slowdown", "must be > 0");
  const BenchmarkRecord* eq = find_best(records, system, instance, is_equilibrium);
  if (!eq)
    throw NotFoundError(fmt::format("no equilibration record for system '{}' on '{}'", system, instance));
  PhaseRates r;
  r.equil = *eq;
  r.equil_rate = eq->ns_per_day;
  const BenchmarkRecord* tr =
      find_best(records, system, instance, [](BenchPhase p) { return p == BenchPhase::transition; });
  r.transition_rate = tr ? tr->ns_per_day : eq->ns_per_day / options.transition_slowdown;
  return r;
}

double predict_job_runtime(const JobSpec& job, std::string_view instance,
                           const std::vector<BenchmarkRecord>& records, const RuntimeOptions& options) {
  const PhaseRates r = phase_rates(records, job.system, instance, options);
  return runtime_hours(equilibration_ns(job.phase_plan, job.timestep_fs), r.equil_rate,
                       transition_phase_ns(job.phase_plan, job.timestep_fs), r.transition_rate);
}

std::vector<Recommendation> recommend(const std::vector<BenchmarkRecord>& records, const Catalog& catalog,
                                      std::string_view system, const RecommendConstraints& c) {
  std::set<std::string> instances;
  for (const auto& r : records)
    if (r.system == system && is_equilibrium(r.phase)) instances.insert(r.instance);

  const double equil_ns = equilibration_ns(c.plan, c.timestep_fs);
  const double trans_ns = transition_phase_ns(c.plan, c.timestep_fs);

  std::vector<Recommendation> out;
  bool any_candidate = false;
  for (const auto& name : instances) {
    const PriceEntry* price = catalog.find_price(name, c.region);
    if (!price) continue;
    if (c.payment == PaymentModel::reserved_upfront && !price->reserved_upfront_per_hour) continue;
    any_candidate = true;
    const PhaseRates rates = phase_rates(records, system, name, c.runtime);
    Recommendation rec;
    rec.instance = name;
    rec.config = rates.equil;
    rec.runtime_h = runtime_hours(equil_ns, rates.equil_rate, trans_ns, rates.transition_rate);
    rec.rate_per_hour = lookup_rate(catalog, name, c.region, c.payment);
    rec.cost = rec.runtime_h * rec.rate_per_hour;
    if (c.max_runtime_h && rec.runtime_h > *c.max_runtime_h) continue;
    out.push_back(std::move(rec));
  }
  if (!any_candidate)
    throw NotFoundError(fmt::format("no priced benchmark records for system '{}' in region '{}'", system, c.region));

  std::sort(out.begin(), out.end(), [&](const Recommendation& a, const Recommendation& b) {
    const double ka = c.objective == Objective::min_cost ? a.cost : a.runtime_h;
    const double kb = c.objective == Objective::min_cost ? b.cost : b.runtime_h;
    if (ka != kb) return ka < kb;
    return a.instance < b.instance;
  });
  return out;
}

std::vector<BenchmarkRecord> parse_benchmarks(std::string_view csv_text, const std::string& source) {
  detail::CsvTable t(csv_text, source);
  t.require_columns({"system", "instance", "ranks", "threads", "pme_ranks", "phase", "ns_per_day"});
  std::vector<BenchmarkRecord> out;
  std::vector<Diagnostic> diags;
  for (const auto& row : t.rows()) {
    BenchmarkRecord r;
    r.system = t.field(row, "system");
    r.instance = t.field(row, "instance");
    r.ranks = static_cast<int>(t.integer(row, "ranks"));
    r.threads = static_cast<int>(t.integer(row, "threads"));
    r.pme_ranks = static_cast<int>(t.integer(row, "pme_ranks"));
    try {
      r.phase = parse_bench_phase(t.field(row, "phase"));
    } catch (const ParseError& e) {
      throw ParseError(t.location(row.line) + ": " + e.what());
    }
    r.ns_per_day = t.number(row, "ns_per_day");
    const auto loc = t.location(row.line);
    if (r.system.empty() || r.instance.empty()) diags.push_back({loc, "system and instance must not be empty"});
    if (r.ranks < 1) diags.push_back({loc, "ranks must be >= 1"});
    if (r.threads < 1) diags.push_back({loc, "threads must be >= 1"});
    if (r.pme_ranks < 0) diags.push_back({loc, "pme_ranks must be >= 0"});
    if (!(r.ns_per_day > 0)) diags.push_back({loc, "ns_per_day must be > 0"});
    out.push_back(std::move(r));
  }
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return out;
}

std::vector<BenchmarkRecord> load_benchmarks(const std::string& path) {
  return parse_benchmarks(detail::read_text_file(path), path);
}

std::vector<ScalingSeries> parse_scaling(std::string_view csv_text, const std::string& source) {
  detail::CsvTable t(csv_text, source);
  t.require_columns({"system", "instance", "n_instances", "ns_per_day"});
  std::vector<ScalingSeries> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& row : t.rows()) {
    auto key = std::make_pair(t.field(row, "system"), t.field(row, "instance"));
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) out.push_back({key.first, key.second, {}});
    out[it->second].points.push_back(
        {static_cast<int>(t.integer(row, "n_instances")), t.number(row, "ns_per_day")});
  }
  std::vector<Diagnostic> diags;
  for (const auto& s : out)
    for (auto& d : validate_series(s)) diags.push_back({source + ": " + d.location, d.message});
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return out;
}

std::vector<ScalingSeries> load_scaling(const std::string& path) {
  return parse_scaling(detail::read_text_file(path), path);
}

std::vector<BenchSystem> parse_systems(std::string_view csv_text, const std::string& source) {
  detail::CsvTable t(csv_text, source);
  t.require_columns({"name", "atoms", "timestep_fs", "cutoff_nm", "grid_spacing_nm", "perturbed_atoms"});
  std::vector<BenchSystem> out;
  std::vector<Diagnostic> diags;
  for (const auto& row : t.rows()) {
    BenchSystem s;
    s.name = t.field(row, "name");
    s.atoms = t.integer(row, "atoms");
    s.timestep_fs = t.number(row, "timestep_fs");
    s.cutoff_nm = t.number(row, "cutoff_nm");
    s.grid_spacing_nm = t.number(row, "grid_spacing_nm");
    s.perturbed_atoms = t.integer(row, "perturbed_atoms");
    if (s.atoms <= 0) diags.push_back({t.location(row.line), "atoms must be > 0"});
    if (!(s.timestep_fs > 0)) diags.push_back({t.location(row.line), "timestep_fs must be > 0"});
    out.push_back(std::move(s));
  }
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return out;
}

std::vector<BenchSystem> load_systems(const std::string& path) {
  return parse_systems(detail::read_text_file(path), path);
}

}  // namespace spotsim
