#include "spotsim/spotsim.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spotsim/catalog.hpp"
#include "spotsim/costmodel.hpp"
#include "spotsim/perfmodel.hpp"
#include "spotsim/scenario.hpp"
#include "spotsim/workload.hpp"

struct spotsim_catalog {
  spotsim::Catalog catalog;
};

struct spotsim_diagnostics {
  std::vector<spotsim::Diagnostic> items;
};

struct spotsim_benchmarks {
  std::vector<spotsim::BenchmarkRecord> records;
};

struct spotsim_recommendation {
  std::vector<spotsim::Recommendation> items;
  std::vector<std::string> configs;
};

struct spotsim_scenario {
  spotsim::Scenario scenario;
};

struct spotsim_result {
  spotsim::SimulationOutput output;
};

namespace {

thread_local std::string g_last_error;

spotsim_status fail(spotsim_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps the core exception hierarchy onto status codes.
template <typename F>
spotsim_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SPOTSIM_OK;
  } catch (const spotsim::IoError& e) {
    return fail(SPOTSIM_IO, e.what());
  } catch (const spotsim::ParseError& e) {
    return fail(SPOTSIM_PARSE, e.what());
  } catch (const spotsim::ValidationError& e) {
    return fail(SPOTSIM_VALIDATION, e.what());
  } catch (const spotsim::NotFoundError& e) {
    return fail(SPOTSIM_NOT_FOUND, e.what());
  } catch (const spotsim::InfeasibleError& e) {
    return fail(SPOTSIM_INFEASIBLE, e.what());
  } catch (const std::exception& e) {
    return fail(SPOTSIM_INTERNAL, e.what());
  } catch (...) {
    return fail(SPOTSIM_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

spotsim::PaymentModel to_model(spotsim_payment p) {
  switch (p) {
    case SPOTSIM_ON_DEMAND: return spotsim::PaymentModel::on_demand;
    case SPOTSIM_SPOT: return spotsim::PaymentModel::spot;
    case SPOTSIM_RESERVED_UPFRONT: return spotsim::PaymentModel::reserved_upfront;
  }
  throw spotsim::ValidationError("payment", "unknown payment model");
}

#define SPOTSIM_REQUIRE(cond, what) \
  if (!(cond)) return fail(SPOTSIM_INVALID_ARGUMENT, what)

std::vector<spotsim::Diagnostic> diagnostics_of(const char* path, bool workload) {
  try {
    if (workload)
      (void)spotsim::load_workload(path);
    else
      (void)spotsim::load_catalog(path);
  } catch (const spotsim::ValidationError& e) {
    return e.diagnostics();
  }
  return {};
}

}  // namespace

extern "C" {

const char* spotsim_last_error(void) { return g_last_error.c_str(); }

const char* spotsim_status_string(spotsim_status status) {
  switch (status) {
    case SPOTSIM_OK: return "ok";
    case SPOTSIM_INVALID_ARGUMENT: return "invalid argument";
    case SPOTSIM_IO: return "i/o error";
    case SPOTSIM_PARSE: return "parse error";
    case SPOTSIM_VALIDATION: return "validation error";
    case SPOTSIM_NOT_FOUND: return "not found";
    case SPOTSIM_INFEASIBLE: return "infeasible";
    case SPOTSIM_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* spotsim_version(void) { return "0.1.0"; }

void spotsim_string_free(char* s) { std::free(s); }

spotsim_status spotsim_catalog_load(const char* path, spotsim_catalog** out) {
  SPOTSIM_REQUIRE(path && out, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new spotsim_catalog{spotsim::load_catalog(path)}; });
}

void spotsim_catalog_free(spotsim_catalog* catalog) { delete catalog; }

spotsim_status spotsim_catalog_lookup_rate(const spotsim_catalog* catalog, const char* instance, const char* region,
                                           spotsim_payment payment, double* out_rate) {
  SPOTSIM_REQUIRE(catalog && instance && region && out_rate, "arguments must not be NULL");
  return guarded([&] { *out_rate = spotsim::lookup_rate(catalog->catalog, instance, region, to_model(payment)); });
}

size_t spotsim_catalog_instance_count(const spotsim_catalog* catalog) {
  return catalog ? catalog->catalog.instances().size() : 0;
}

spotsim_status spotsim_validate_catalog_file(const char* path, spotsim_diagnostics** out) {
  SPOTSIM_REQUIRE(path && out, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new spotsim_diagnostics{diagnostics_of(path, false)}; });
}

spotsim_status spotsim_validate_workload_file(const char* path, spotsim_diagnostics** out) {
  SPOTSIM_REQUIRE(path && out, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new spotsim_diagnostics{diagnostics_of(path, true)}; });
}

size_t spotsim_diagnostics_count(const spotsim_diagnostics* d) { return d ? d->items.size() : 0; }

const char* spotsim_diagnostics_location(const spotsim_diagnostics* d, size_t i) {
  return d && i < d->items.size() ? d->items[i].location.c_str() : nullptr;
}

const char* spotsim_diagnostics_message(const spotsim_diagnostics* d, size_t i) {
  return d && i < d->items.size() ? d->items[i].message.c_str() : nullptr;
}

void spotsim_diagnostics_free(spotsim_diagnostics* d) { delete d; }

spotsim_status spotsim_benchmarks_load(const char* path, spotsim_benchmarks** out) {
  SPOTSIM_REQUIRE(path && out, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new spotsim_benchmarks{spotsim::load_benchmarks(path)}; });
}

size_t spotsim_benchmarks_count(const spotsim_benchmarks* b) { return b ? b->records.size() : 0; }

void spotsim_benchmarks_free(spotsim_benchmarks* b) { delete b; }

spotsim_status spotsim_recommend(const spotsim_benchmarks* bench, const spotsim_catalog* catalog, const char* system,
                                 double max_runtime_h, spotsim_objective objective, spotsim_payment payment,
                                 const char* region, spotsim_recommendation** out) {
  SPOTSIM_REQUIRE(bench && catalog && system && out, "arguments must not be NULL");
  *out = nullptr;
  return guarded([&] {
    spotsim::RecommendConstraints c;
    if (max_runtime_h > 0) c.max_runtime_h = max_runtime_h;
    c.objective = objective == SPOTSIM_MIN_TIME ? spotsim::Objective::min_time : spotsim::Objective::min_cost;
    c.payment = to_model(payment);
    if (region) c.region = region;
    auto rec = std::make_unique<spotsim_recommendation>();
    rec->items = spotsim::recommend(bench->records, catalog->catalog, system, c);
    for (const auto& r : rec->items) rec->configs.push_back(r.config.config_label());
    *out = rec.release();
  });
}

size_t spotsim_recommendation_count(const spotsim_recommendation* r) { return r ? r->items.size() : 0; }

const char* spotsim_recommendation_instance(const spotsim_recommendation* r, size_t i) {
  return r && i < r->items.size() ? r->items[i].instance.c_str() : nullptr;
}

const char* spotsim_recommendation_config(const spotsim_recommendation* r, size_t i) {
  return r && i < r->configs.size() ? r->configs[i].c_str() : nullptr;
}

double spotsim_recommendation_runtime_h(const spotsim_recommendation* r, size_t i) {
  return r && i < r->items.size() ? r->items[i].runtime_h : 0.0;
}

double spotsim_recommendation_cost(const spotsim_recommendation* r, size_t i) {
  return r && i < r->items.size() ? r->items[i].cost : 0.0;
}

void spotsim_recommendation_free(spotsim_recommendation* r) { delete r; }

spotsim_status spotsim_predict_runtime_h(const spotsim_benchmarks* bench, const char* system, const char* instance,
                                         double* out_hours) {
  SPOTSIM_REQUIRE(bench && system && instance && out_hours, "arguments must not be NULL");
  return guarded([&] {
    spotsim::JobSpec job;
    job.system = system;
    job.timestep_fs = 2.0;
    job.phase_plan = spotsim::make_phase_plan(6.0, 2.0, 500000, 80, 50.0);
    *out_hours = spotsim::predict_job_runtime(job, instance, bench->records);
  });
}

spotsim_status spotsim_pp_ratio(double ns_per_day, double price_per_hour, double* out) {
  SPOTSIM_REQUIRE(out, "out must not be NULL");
  return guarded([&] { *out = spotsim::pp_ratio(ns_per_day, price_per_hour); });
}

spotsim_status spotsim_parallel_efficiency(const int* n, const double* ns_per_day, size_t count,
                                           double* out_efficiency) {
  SPOTSIM_REQUIRE(n && ns_per_day && out_efficiency, "arguments must not be NULL");
  return guarded([&] {
    spotsim::ScalingSeries s;
    for (size_t i = 0; i < count; ++i) s.points.push_back({n[i], ns_per_day[i]});
    const auto e = spotsim::parallel_efficiency(s);
    for (size_t i = 0; i < e.size(); ++i) out_efficiency[i] = e[i].efficiency;
  });
}

spotsim_status spotsim_cloud_cost_per_us(double rate_per_hour, double ns_per_day, double* out) {
  SPOTSIM_REQUIRE(out, "out must not be NULL");
  return guarded([&] { *out = spotsim::cloud_cost_per_microsecond(rate_per_hour, ns_per_day); });
}

spotsim_status spotsim_onprem_cost_per_us(double ns_per_day, double base_cost_per_us, double overhead_per_year,
                                          double utilization, double* out) {
  SPOTSIM_REQUIRE(out, "out must not be NULL");
  return guarded([&] {
    spotsim::OnPremNodeSpec node;
    node.ns_per_day = ns_per_day;
    spotsim::OverheadSpec o;
    o.staff_per_node_year = overhead_per_year;
    *out = spotsim::onprem_cost_per_microsecond(node, o, base_cost_per_us, utilization);
  });
}

spotsim_status spotsim_cost_per_fe(double complex_runtime_h, double complex_rate, double ligand_runtime_h,
                                   double ligand_rate, int replicas, int directions, double* out) {
  SPOTSIM_REQUIRE(out, "out must not be NULL");
  return guarded([&] {
    *out = spotsim::cost_per_fe(complex_runtime_h, complex_rate, ligand_runtime_h, ligand_rate, replicas, directions);
  });
}

spotsim_status spotsim_tco_report_json(double utilization, char** out_json) {
  SPOTSIM_REQUIRE(out_json, "out must not be NULL");
  *out_json = nullptr;
  return guarded([&] {
    auto in = spotsim::default_tco_inputs();
    in.utilization = utilization;
    *out_json = dup_string(spotsim::cost_report_json(spotsim::tco_report(in)));
  });
}

spotsim_status spotsim_bench_report_json(const spotsim_benchmarks* bench, const spotsim_catalog* catalog,
                                         const char* region, char** out_json) {
  SPOTSIM_REQUIRE(bench && catalog && out_json, "arguments must not be NULL");
  *out_json = nullptr;
  return guarded([&] {
    const std::string reg = region ? region : "us-east-1";
    nlohmann::ordered_json doc;
    doc["region"] = reg;
    doc["rows"] = nlohmann::ordered_json::array();
    std::map<std::string, std::set<std::string>> per_system;
    for (const auto& r : bench->records) {
      nlohmann::ordered_json row{{"system", r.system},
                                 {"instance", r.instance},
                                 {"config", r.config_label()},
                                 {"phase", spotsim::to_string(r.phase)},
                                 {"ns_per_day", r.ns_per_day}};
      if (const auto* p = catalog->catalog.find_price(r.instance, reg)) {
        row["price_per_hour"] = p->on_demand_per_hour;
        row["pp_ratio"] = spotsim::pp_ratio(r.ns_per_day, p->on_demand_per_hour);
        per_system[r.system].insert(r.instance);
      } else {
        row["price_per_hour"] = nullptr;
        row["pp_ratio"] = nullptr;
      }
      doc["rows"].push_back(std::move(row));
    }
    doc["frontier"] = nlohmann::ordered_json::object();
    for (const auto& [system, instances] : per_system) {
      std::vector<spotsim::PerfPoint> pts;
      for (const auto& inst : instances)
        pts.push_back({inst, catalog->catalog.find_price(inst, reg)->on_demand_per_hour,
                       spotsim::best_config(bench->records, system, inst).ns_per_day});
      auto& f = doc["frontier"][system];
      f = nlohmann::ordered_json::array();
      for (const auto& p : spotsim::pareto_frontier(pts))
        f.push_back({{"instance", p.label}, {"price_per_hour", p.price_per_hour}, {"ns_per_day", p.ns_per_day}});
    }
    *out_json = dup_string(doc.dump(2));
  });
}

spotsim_status spotsim_scaling_report_json(const char* path, char** out_json) {
  SPOTSIM_REQUIRE(path && out_json, "arguments must not be NULL");
  *out_json = nullptr;
  return guarded([&] {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& s : spotsim::load_scaling(path)) {
      const auto eff = spotsim::parallel_efficiency(s);
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < s.points.size(); ++i)
        pts.push_back({{"n", s.points[i].n},
                       {"ns_per_day", s.points[i].ns_per_day},
                       {"efficiency", eff[i].efficiency},
                       {"speedup", spotsim::speedup(s, s.points[i].n)}});
      doc.push_back({{"system", s.system}, {"instance", s.instance}, {"points", pts}});
    }
    *out_json = dup_string(doc.dump(2));
  });
}

spotsim_status spotsim_scenario_load(const char* path, spotsim_scenario** out) {
  SPOTSIM_REQUIRE(path && out, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new spotsim_scenario{spotsim::load_scenario(path)}; });
}

void spotsim_scenario_set_seed(spotsim_scenario* s, uint64_t seed) {
  if (s) s->scenario.config.seed = seed;
}

void spotsim_scenario_free(spotsim_scenario* s) { delete s; }

spotsim_status spotsim_simulate(const spotsim_scenario* s, spotsim_result** out) {
  SPOTSIM_REQUIRE(s && out, "arguments must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new spotsim_result{spotsim::run_scenario(s->scenario)}; });
}

spotsim_status spotsim_result_write(const spotsim_result* r, const char* out_dir, int event_log) {
  SPOTSIM_REQUIRE(r && out_dir, "arguments must not be NULL");
  return guarded([&] { spotsim::write_outputs(r->output, out_dir, event_log != 0); });
}

spotsim_status spotsim_result_summary_json(const spotsim_result* r, char** out_json) {
  SPOTSIM_REQUIRE(r && out_json, "arguments must not be NULL");
  *out_json = nullptr;
  return guarded([&] { *out_json = dup_string(spotsim::summary_json(r->output.summary)); });
}

double spotsim_result_makespan_s(const spotsim_result* r) { return r ? r->output.summary.makespan_s : 0.0; }
double spotsim_result_total_cost(const spotsim_result* r) { return r ? r->output.summary.total_cost : 0.0; }
double spotsim_result_cost_per_ddg(const spotsim_result* r) { return r ? r->output.summary.cost_per_ddg : 0.0; }
int64_t spotsim_result_failed_jobs(const spotsim_result* r) { return r ? r->output.summary.jobs_failed : 0; }

void spotsim_result_free(spotsim_result* r) { delete r; }

}  // extern "C"
