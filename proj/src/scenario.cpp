#include "spotsim/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include "json_util.hpp"

namespace spotsim {

namespace fs = std::filesystem;
using detail::json;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (fs::path(base) / path).lexically_normal().string();
}

double parse_duration(const json& v, const std::string& where) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "never") return std::numeric_limits<double>::infinity();
    throw ParseError(where + ": expected a number or \"inf\"");
  }
  if (!v.is_number()) throw ParseError(where + ": expected a number or \"inf\"");
  return v.get<double>();
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  if (!v.is_array()) throw ParseError(where + ": expected a string or an array of strings");
  for (const auto& x : v) {
    if (!x.is_string()) throw ParseError(where + ": expected strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text, const std::string& base_dir, const std::string& source) {
  const json doc = detail::parse_json(json_text, source);
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");
  Scenario s;
  ScenarioConfig& c = s.config;
  s.name = detail::has(doc, "name") ? detail::get_string(doc, "name", source) : fs::path(source).stem().string();
  s.catalog_path = resolve(base_dir, detail::get_string(doc, "catalog", source));
  s.workload_path = resolve(base_dir, detail::get_string(doc, "workload", source));
  for (const auto& p : string_list(detail::require(doc, "benchmarks", source), source + ".benchmarks"))
    s.benchmark_paths.push_back(resolve(base_dir, p));

  if (detail::has(doc, "seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned()) throw ParseError(source + ".seed: expected a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (detail::has(doc, "payment")) c.payment = parse_payment_model(detail::get_string(doc, "payment", source));

  if (detail::has(doc, "routing")) {
    const json& r = doc.at("routing");
    const std::string loc = source + ".routing";
    if (detail::has(r, "mode")) c.routing.mode = parse_routing_mode(detail::get_string(r, "mode", loc));
    if (detail::has(r, "weights")) {
      const json& w = r.at("weights");
      if (w.is_object()) {
        for (const auto& [region, val] : w.items()) {
          if (!val.is_number()) throw ParseError(loc + ".weights." + region + ": expected a number");
          c.routing.weights.emplace_back(region, val.get<double>());
        }
      } else if (w.is_array()) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          const auto l = detail::index_loc(loc + ".weights", i);
          c.routing.weights.emplace_back(detail::get_string(w[i], "region", l), detail::get_number(w[i], "weight", l));
        }
      } else {
        throw ParseError(loc + ".weights: expected an object or an array");
      }
    }
  }

  if (detail::has(doc, "allowed_types")) {
    const json& a = doc.at("allowed_types");
    if (detail::has(a, "complex")) c.complex_types = string_list(a.at("complex"), source + ".allowed_types.complex");
    if (detail::has(a, "ligand")) c.ligand_types = string_list(a.at("ligand"), source + ".allowed_types.ligand");
  }

  if (detail::has(doc, "preemption")) {
    const json& p = doc.at("preemption");
    const std::string loc = source + ".preemption";
    c.preemption.default_rate_per_instance_hour =
        detail::opt_number(p, "default_rate_per_instance_hour", loc).value_or(0.0);
    if (detail::has(p, "rates")) {
      const json& rates = detail::require_array(p, "rates", loc);
      for (std::size_t i = 0; i < rates.size(); ++i) {
        const auto l = detail::index_loc(loc + ".rates", i);
        c.preemption.rate_per_instance_hour[{detail::get_string(rates[i], "region", l),
                                             detail::get_string(rates[i], "family", l)}] =
            detail::get_number(rates[i], "rate_per_instance_hour", l);
      }
    }
  }

  if (detail::has(doc, "scripted_preemptions")) {
    const json& sp = detail::require_array(doc, "scripted_preemptions", source);
    for (std::size_t i = 0; i < sp.size(); ++i) {
      const auto l = detail::index_loc(source + ".scripted_preemptions", i);
      c.scripted_preemptions.push_back({detail::get_number(sp[i], "time_s", l), detail::get_string(sp[i], "instance", l)});
    }
  }

  if (detail::has(doc, "grace_s")) c.grace_s = parse_duration(doc.at("grace_s"), source + ".grace_s");
  c.metrics_interval_s = detail::opt_number(doc, "metrics_interval_s", source).value_or(c.metrics_interval_s);
  c.acquisition_latency_s = detail::opt_number(doc, "acquisition_latency_s", source).value_or(0.0);
  c.acquisitions_per_minute = detail::opt_number(doc, "acquisitions_per_minute", source);
  c.transfer_latency_s = detail::opt_number(doc, "transfer_latency_s", source).value_or(0.0);
  c.runtime.transition_slowdown = detail::opt_number(doc, "transition_slowdown", source).value_or(1.0);
  if (detail::has(doc, "submit_offset_s")) {
    const json& o = doc.at("submit_offset_s");
    c.complex_submit_s = detail::opt_number(o, "complex", source + ".submit_offset_s").value_or(0.0);
    c.ligand_submit_s = detail::opt_number(o, "ligand", source + ".submit_offset_s").value_or(0.0);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  const std::string text = detail::read_text_file(path);
  return parse_scenario(text, fs::path(path).parent_path().string(), path);
}

SimulationOutput run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override) {
  Catalog catalog = load_catalog(scenario.catalog_path);
  EnsembleSpec ensemble = load_workload(scenario.workload_path);
  std::vector<BenchmarkRecord> records;
  for (const auto& p : scenario.benchmark_paths) {
    auto r = load_benchmarks(p);
    records.insert(records.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  ScenarioConfig config = scenario.config;
  if (seed_override) config.seed = *seed_override;

  Simulation sim(std::move(catalog), std::move(records), expand_ensemble(ensemble), fe_difference_count(ensemble),
                 std::move(config));
  SimulationOutput out;
  out.name = scenario.name;
  out.summary = sim.run();
  out.metrics = sim.metrics();
  out.events = sim.event_log();
  return out;
}

void write_outputs(const SimulationOutput& output, const std::string& dir, bool event_log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  const fs::path base(dir);
  detail::write_text_file((base / "metrics.csv").string(), metrics_csv(output.metrics));
  detail::write_text_file((base / "summary.json").string(), summary_json(output.summary));
  if (event_log) detail::write_text_file((base / "events.log").string(), event_log_csv(output.events));
}

}  // namespace spotsim
