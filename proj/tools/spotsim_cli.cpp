#include <spotsim/spotsim.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int exit_code(spotsim_status st) {
  switch (st) {
    case SPOTSIM_OK:
      return kExitOk;
    case SPOTSIM_IO:
    case SPOTSIM_INVALID_ARGUMENT:
      return kExitUsage;
    default:
      return kExitFail;
  }
}

int report_error(spotsim_status st) {
  std::fprintf(stderr, "error: %s\n", spotsim_last_error());
  return exit_code(st);
}

// unique_ptr wrappers for the opaque handles
template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using CatalogPtr = std::unique_ptr<spotsim_catalog, Deleter<spotsim_catalog, spotsim_catalog_free>>;
using BenchPtr = std::unique_ptr<spotsim_benchmarks, Deleter<spotsim_benchmarks, spotsim_benchmarks_free>>;
using DiagPtr = std::unique_ptr<spotsim_diagnostics, Deleter<spotsim_diagnostics, spotsim_diagnostics_free>>;
using RecPtr = std::unique_ptr<spotsim_recommendation, Deleter<spotsim_recommendation, spotsim_recommendation_free>>;
using ScenarioPtr = std::unique_ptr<spotsim_scenario, Deleter<spotsim_scenario, spotsim_scenario_free>>;
using ResultPtr = std::unique_ptr<spotsim_result, Deleter<spotsim_result, spotsim_result_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  spotsim_string_free(s);
  return out;
}

spotsim_payment parse_payment(const std::string& s) {
  if (s == "on_demand") return SPOTSIM_ON_DEMAND;
  if (s == "reserved") return SPOTSIM_RESERVED_UPFRONT;
  return SPOTSIM_SPOT;
}

std::string fmt_opt(const json& v, const char* f) {
  if (v.is_null()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v.get<double>());
  return buf;
}

int print_diagnostics(spotsim_status st, spotsim_diagnostics* raw, const std::string& what) {
  DiagPtr diags(raw);
  if (st != SPOTSIM_OK) return report_error(st);
  const size_t n = spotsim_diagnostics_count(diags.get());
  for (size_t i = 0; i < n; ++i)
    std::printf("%s: %s: %s\n", what.c_str(), spotsim_diagnostics_location(diags.get(), i),
                spotsim_diagnostics_message(diags.get(), i));
  return n == 0 ? kExitOk : kExitFail;
}

// validate

struct ValidateOpts {
  std::string catalog;
  std::string workload;
};

int cmd_validate(const ValidateOpts& o) {
  spotsim_diagnostics* raw = nullptr;
  spotsim_status st = spotsim_validate_catalog_file(o.catalog.c_str(), &raw);
  int rc = print_diagnostics(st, raw, o.catalog);
  if (rc == kExitUsage) return rc;
  if (!o.workload.empty()) {
    raw = nullptr;
    st = spotsim_validate_workload_file(o.workload.c_str(), &raw);
    rc = std::max(rc, print_diagnostics(st, raw, o.workload));
  }
  if (rc == kExitOk) std::printf("OK\n");
  return rc;
}

// bench

struct BenchOpts {
  std::string bench;
  std::string catalog;
  std::string region = "us-east-1";
  std::string scaling;
  std::string system;
};

void print_scaling(const json& doc) {
  std::printf("%-8s %-12s %6s %12s %10s %8s\n", "system", "instance", "n", "ns/day", "efficiency", "speedup");
  for (const auto& s : doc)
    for (const auto& p : s["points"])
      std::printf("%-8s %-12s %6d %12.4f %10.3f %8.2f\n", s["system"].get<std::string>().c_str(),
                  s["instance"].get<std::string>().c_str(), p["n"].get<int>(), p["ns_per_day"].get<double>(),
                  p["efficiency"].get<double>(), p["speedup"].get<double>());
}

int cmd_bench(const BenchOpts& o) {
  spotsim_benchmarks* b = nullptr;
  if (auto st = spotsim_benchmarks_load(o.bench.c_str(), &b); st != SPOTSIM_OK) return report_error(st);
  BenchPtr bench(b);
  spotsim_catalog* c = nullptr;
  if (auto st = spotsim_catalog_load(o.catalog.c_str(), &c); st != SPOTSIM_OK) return report_error(st);
  CatalogPtr catalog(c);
  char* out = nullptr;
  if (auto st = spotsim_bench_report_json(bench.get(), catalog.get(), o.region.c_str(), &out); st != SPOTSIM_OK)
    return report_error(st);
  const json doc = json::parse(take_string(out));

  std::printf("%-14s %-14s %-12s %-14s %12s %10s %10s\n", "system", "instance", "config", "phase", "ns/day",
              "price/h", "ns/$");
  for (const auto& r : doc["rows"]) {
    if (!o.system.empty() && r["system"] != o.system) continue;
    std::printf("%-14s %-14s %-12s %-14s %12.4f %10s %10s\n", r["system"].get<std::string>().c_str(),
                r["instance"].get<std::string>().c_str(), r["config"].get<std::string>().c_str(),
                r["phase"].get<std::string>().c_str(), r["ns_per_day"].get<double>(),
                fmt_opt(r["price_per_hour"], "%.3f").c_str(), fmt_opt(r["pp_ratio"], "%.4f").c_str());
  }
  for (const auto& [system, pts] : doc["frontier"].items()) {
    if (!o.system.empty() && system != o.system) continue;
    std::printf("\nfrontier %s:", system.c_str());
    for (const auto& p : pts)
      std::printf(" %s(%.3f/h, %.2f ns/d)", p["instance"].get<std::string>().c_str(), p["price_per_hour"].get<double>(),
                  p["ns_per_day"].get<double>());
    std::printf("\n");
  }

  if (!o.scaling.empty()) {
    if (auto st = spotsim_scaling_report_json(o.scaling.c_str(), &out); st != SPOTSIM_OK) return report_error(st);
    std::printf("\n");
    print_scaling(json::parse(take_string(out)));
  }
  return kExitOk;
}

// recommend

struct RecommendOpts {
  std::string bench;
  std::string catalog;
  std::string system;
  double deadline_h = 0;
  std::string objective = "cost";
  std::string payment = "spot";
  std::string region = "us-east-1";
};

int cmd_recommend(const RecommendOpts& o) {
  spotsim_benchmarks* b = nullptr;
  if (auto st = spotsim_benchmarks_load(o.bench.c_str(), &b); st != SPOTSIM_OK) return report_error(st);
  BenchPtr bench(b);
  spotsim_catalog* c = nullptr;
  if (auto st = spotsim_catalog_load(o.catalog.c_str(), &c); st != SPOTSIM_OK) return report_error(st);
  CatalogPtr catalog(c);

  const auto objective = o.objective == "time" ? SPOTSIM_MIN_TIME : SPOTSIM_MIN_COST;
  spotsim_recommendation* r = nullptr;
  if (auto st = spotsim_recommend(bench.get(), catalog.get(), o.system.c_str(), o.deadline_h, objective,
                                  parse_payment(o.payment), o.region.c_str(), &r);
      st != SPOTSIM_OK)
    return report_error(st);
  RecPtr rec(r);

  const size_t n = spotsim_recommendation_count(rec.get());
  std::printf("%-14s %-12s %12s %10s\n", "instance", "config", "runtime_h", "cost");
  for (size_t i = 0; i < n; ++i)
    std::printf("%-14s %-12s %12.2f %10.2f\n", spotsim_recommendation_instance(rec.get(), i),
                spotsim_recommendation_config(rec.get(), i), spotsim_recommendation_runtime_h(rec.get(), i),
                spotsim_recommendation_cost(rec.get(), i));
  if (n == 0) {
    std::fprintf(stderr, "no feasible instance for %s within %.3f h\n", o.system.c_str(), o.deadline_h);
    return kExitFail;
  }
  return kExitOk;
}

// cost

struct CostOpts {
  double utilization = 1.0;
  std::string bench;
  std::string catalog;
  std::string complex_system;
  std::string complex_instance;
  std::string ligand_system;
  std::string ligand_instance;
  std::string payment = "spot";
  std::string region = "us-east-1";
  int replicas = 3;
  int directions = 2;
};

int cmd_cost(const CostOpts& o) {
  char* out = nullptr;
  if (auto st = spotsim_tco_report_json(o.utilization, &out); st != SPOTSIM_OK) return report_error(st);
  const json doc = json::parse(take_string(out));
  const std::string currency = doc["currency"].get<std::string>();
  std::printf("%-24s %12s  %s\n", "label", "cost", "basis");
  for (const auto& e : doc["entries"]) {
    std::string basis;
    for (const auto& [k, v] : e["basis"].items()) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%s=%.2f", basis.empty() ? "" : ", ", k.c_str(), v.get<double>());
      basis += buf;
    }
    std::printf("%-24s %12.2f  %s\n", e["label"].get<std::string>().c_str(), e["cost"].get<double>(), basis.c_str());
  }
  std::printf("currency: %s per microsecond of trajectory\n", currency.c_str());

  if (o.bench.empty()) return kExitOk;

  spotsim_benchmarks* b = nullptr;
  if (auto st = spotsim_benchmarks_load(o.bench.c_str(), &b); st != SPOTSIM_OK) return report_error(st);
  BenchPtr bench(b);
  spotsim_catalog* c = nullptr;
  if (auto st = spotsim_catalog_load(o.catalog.c_str(), &c); st != SPOTSIM_OK) return report_error(st);
  CatalogPtr catalog(c);

  const auto pay = parse_payment(o.payment);
  double ct = 0, lt = 0, cr = 0, lr = 0, fe = 0;
  spotsim_status st = spotsim_predict_runtime_h(bench.get(), o.complex_system.c_str(), o.complex_instance.c_str(), &ct);
  if (st == SPOTSIM_OK)
    st = spotsim_predict_runtime_h(bench.get(), o.ligand_system.c_str(), o.ligand_instance.c_str(), &lt);
  if (st == SPOTSIM_OK)
    st = spotsim_catalog_lookup_rate(catalog.get(), o.complex_instance.c_str(), o.region.c_str(), pay, &cr);
  if (st == SPOTSIM_OK)
    st = spotsim_catalog_lookup_rate(catalog.get(), o.ligand_instance.c_str(), o.region.c_str(), pay, &lr);
  if (st == SPOTSIM_OK) st = spotsim_cost_per_fe(ct, cr, lt, lr, o.replicas, o.directions, &fe);
  if (st != SPOTSIM_OK) return report_error(st);

  std::printf("\n%-8s %-16s %-14s %12s %10s\n", "kind", "system", "instance", "runtime_h", "rate/h");
  std::printf("%-8s %-16s %-14s %12.2f %10.4f\n", "complex", o.complex_system.c_str(), o.complex_instance.c_str(), ct,
              cr);
  std::printf("%-8s %-16s %-14s %12.2f %10.4f\n", "ligand", o.ligand_system.c_str(), o.ligand_instance.c_str(), lt,
              lr);
  std::printf("cost per FE difference: %.2f (%s, %s, %d replicas x %d directions)\n", fe, o.payment.c_str(),
              o.region.c_str(), o.replicas, o.directions);
  return kExitOk;
}

// simulate

struct SimulateOpts {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool event_log = false;
};

struct RunResult {
  std::string name;
  std::string out_dir;
  spotsim_status status = SPOTSIM_OK;
  std::string error;
  double makespan_s = 0;
  double cost_per_ddg = 0;
  double total_cost = 0;
  std::int64_t failed = 0;
};

RunResult run_one(const std::string& path, const std::string& out_dir, const SimulateOpts& o) {
  RunResult res;
  res.name = fs::path(path).stem().string();
  res.out_dir = out_dir;
  auto fail = [&](spotsim_status st) {
    res.status = st;
    res.error = spotsim_last_error();
    return res;
  };
  spotsim_scenario* s = nullptr;
  if (auto st = spotsim_scenario_load(path.c_str(), &s); st != SPOTSIM_OK) return fail(st);
  ScenarioPtr scenario(s);
  if (o.seed) spotsim_scenario_set_seed(scenario.get(), *o.seed);
  spotsim_result* r = nullptr;
  if (auto st = spotsim_simulate(scenario.get(), &r); st != SPOTSIM_OK) return fail(st);
  ResultPtr result(r);
  if (auto st = spotsim_result_write(result.get(), out_dir.c_str(), o.event_log ? 1 : 0); st != SPOTSIM_OK)
    return fail(st);
  res.makespan_s = spotsim_result_makespan_s(result.get());
  res.cost_per_ddg = spotsim_result_cost_per_ddg(result.get());
  res.total_cost = spotsim_result_total_cost(result.get());
  res.failed = spotsim_result_failed_jobs(result.get());
  return res;
}

int cmd_simulate(const SimulateOpts& o) {
  std::vector<std::pair<std::string, std::string>> runs;  // (scenario, out dir)
  std::error_code ec;
  if (fs::is_directory(o.scenario, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(o.scenario))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) runs.emplace_back(f.string(), (fs::path(o.out) / f.stem()).string());
    if (runs.empty()) {
      std::fprintf(stderr, "error: no .json scenarios in %s\n", o.scenario.c_str());
      return kExitUsage;
    }
  } else {
    runs.emplace_back(o.scenario, o.out);
  }

  std::vector<RunResult> results(runs.size());
  const size_t workers = std::max<size_t>(1, std::min<size_t>(runs.size(), std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (size_t i = w; i < runs.size(); i += workers) results[i] = run_one(runs[i].first, runs[i].second, o);
    });
  for (auto& t : pool) t.join();

  int rc = kExitOk;
  for (const auto& r : results) {
    if (r.status != SPOTSIM_OK) {
      std::fprintf(stderr, "%s: error: %s\n", r.name.c_str(), r.error.c_str());
      rc = std::max(rc, exit_code(r.status));
      continue;
    }
    std::printf("%s: makespan %.1f s (%.2f h), total cost %.2f, cost per ddG %.2f", r.name.c_str(), r.makespan_s,
                r.makespan_s / 3600.0, r.total_cost, r.cost_per_ddg);
    if (r.failed > 0) std::printf(", %lld failed jobs", static_cast<long long>(r.failed));
    std::printf(" -> %s\n", r.out_dir.c_str());
  }
  return rc;
}

// report

struct ReportOpts {
  std::string out;
  std::string scaling;
};

int cmd_report(const ReportOpts& o) {
  if (!o.scaling.empty()) {
    char* out = nullptr;
    if (auto st = spotsim_scaling_report_json(o.scaling.c_str(), &out); st != SPOTSIM_OK) return report_error(st);
    print_scaling(json::parse(take_string(out)));
    if (o.out.empty()) return kExitOk;
    std::printf("\n");
  }
  if (o.out.empty()) {
    std::fprintf(stderr, "error: give --out and/or --scaling\n");
    return kExitUsage;
  }
  const fs::path path = fs::path(o.out) / "summary.json";
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s\n", path.string().c_str());
    return kExitUsage;
  }
  nlohmann::ordered_json s;
  try {
    s = nlohmann::ordered_json::parse(in);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", path.string().c_str(), e.what());
    return kExitFail;
  }
  for (const auto& [k, v] : s.items()) {
    if (v.is_structured()) continue;
    if (v.is_number_float())
      std::printf("%-26s %.6g\n", k.c_str(), v.get<double>());
    else
      std::printf("%-26s %s\n", k.c_str(), v.is_string() ? v.get<std::string>().c_str() : v.dump().c_str());
  }
  if (s.contains("ledger") && s["ledger"].contains("entries")) {
    const auto& entries = s["ledger"]["entries"];
    std::printf("ledger: %zu instances, total %.2f\n", entries.size(), s["ledger"].value("total", 0.0));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cloud cost and throughput simulator for free energy ensembles"};
  app.set_version_flag("--version", std::string(spotsim_version()));
  app.require_subcommand(1);

  ValidateOpts vo;
  auto* validate = app.add_subcommand("validate", "check catalog and workload files");
  validate->add_option("--catalog", vo.catalog, "instance catalog JSON")->required();
  validate->add_option("--workload", vo.workload, "workload JSON");

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "performance-to-price table and frontier");
  bench->add_option("--bench", bo.bench, "benchmark CSV")->required();
  bench->add_option("--catalog", bo.catalog, "instance catalog JSON")->required();
  bench->add_option("--region", bo.region, "pricing region")->capture_default_str();
  bench->add_option("--system", bo.system, "only rows of this system");
  bench->add_option("--scaling", bo.scaling, "multi-instance scaling CSV");

  RecommendOpts ro;
  auto* recommend = app.add_subcommand("recommend", "rank instance types for one job");
  recommend->add_option("--bench", ro.bench, "benchmark CSV")->required();
  recommend->add_option("--catalog", ro.catalog, "instance catalog JSON")->required();
  recommend->add_option("--system", ro.system, "benchmarked system")->required();
  recommend->add_option("--deadline-h", ro.deadline_h, "maximum runtime in hours")->required();
  recommend->add_option("--objective", ro.objective)->check(CLI::IsMember({"cost", "time"}))->capture_default_str();
  recommend->add_option("--payment", ro.payment)
      ->check(CLI::IsMember({"on_demand", "spot", "reserved"}))
      ->capture_default_str();
  recommend->add_option("--region", ro.region)->capture_default_str();

  CostOpts co;
  auto* cost = app.add_subcommand("cost", "on-premises vs cloud cost per microsecond, cost per FE difference");
  cost->add_option("--utilization", co.utilization, "on-premises utilization in (0, 1]")->capture_default_str();
  auto* cost_bench = cost->add_option("--bench", co.bench, "benchmark CSV");
  cost->add_option("--catalog", co.catalog, "instance catalog JSON")->needs(cost_bench);
  cost->add_option("--complex-system", co.complex_system)->default_val("cmet_complex")->capture_default_str();
  cost->add_option("--complex-instance", co.complex_instance)->default_val("g4dn.4xl")->capture_default_str();
  cost->add_option("--ligand-system", co.ligand_system)->default_val("cmet_ligand")->capture_default_str();
  cost->add_option("--ligand-instance", co.ligand_instance)->default_val("c5.2xl")->capture_default_str();
  cost->add_option("--payment", co.payment)
      ->check(CLI::IsMember({"on_demand", "spot", "reserved"}))
      ->capture_default_str();
  cost->add_option("--region", co.region)->capture_default_str();
  cost->add_option("--replicas", co.replicas)->check(CLI::PositiveNumber)->capture_default_str();
  cost->add_option("--directions", co.directions)->check(CLI::PositiveNumber)->capture_default_str();

  SimulateOpts so;
  auto* simulate = app.add_subcommand("simulate", "run a scenario file or a directory of scenarios");
  simulate->add_option("--scenario", so.scenario, "scenario JSON or directory")->required();
  simulate->add_option("--out", so.out, "output directory")->required();
  simulate->add_option("--seed", so.seed, "override the scenario seed");
  simulate->add_flag("--event-log", so.event_log, "also write events.log");

  ReportOpts po;
  auto* report = app.add_subcommand("report", "render a simulation summary or a scaling table");
  report->add_option("--out", po.out, "directory written by simulate");
  report->add_option("--scaling", po.scaling, "multi-instance scaling CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (cost->parsed() && !co.bench.empty() && co.catalog.empty()) {
    std::fprintf(stderr, "error: --bench needs --catalog\n");
    return kExitUsage;
  }

  if (validate->parsed()) return cmd_validate(vo);
  if (bench->parsed()) return cmd_bench(bo);
  if (recommend->parsed()) return cmd_recommend(ro);
  if (cost->parsed()) return cmd_cost(co);
  if (simulate->parsed()) return cmd_simulate(so);
  return cmd_report(po);
}
