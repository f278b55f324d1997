#include "spotsim/workload.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json_util.hpp"

namespace spotsim {

using detail::json;

std::string_view to_string(JobKind kind) {
  return kind == JobKind::complex ? "complex" : "ligand";
}

JobKind parse_job_kind(std::string_view text) {
  if (text == "complex") return JobKind::complex;
  if (text == "ligand") return JobKind::ligand;
  throw ParseError("unknown job kind '" + std::string(text) + "'");
}

std::int64_t PhasePlan::steps_in_chunk(std::int64_t k) const {
  if (k < 0 || k >= equil_chunks) return 0;
  const std::int64_t remaining = total_equil_steps - k * chunk_steps;
  return remaining < chunk_steps ? remaining : chunk_steps;
}

PhasePlan make_phase_plan(double equil_ns, double timestep_fs, std::int64_t chunk_steps,
                          std::int64_t n_transitions, double transition_ps) {
  std::vector<Diagnostic> diags;
  if (!(equil_ns > 0)) diags.push_back({"equil_ns", "must be > 0"});
  if (!(timestep_fs > 0)) diags.push_back({"timestep_fs", "must be > 0"});
  if (chunk_steps <= 0) diags.push_back({"chunk_steps", "must be > 0"});
  if (n_transitions < 0) diags.push_back({"n_transitions", "must be >= 0"});
  if (!(transition_ps > 0)) diags.push_back({"transition_ps", "must be > 0"});
  if (!diags.empty()) throw ValidationError(std::move(diags));

  PhasePlan plan;
  plan.chunk_steps = chunk_steps;
  plan.total_equil_steps = std::llround(equil_ns * 1e6 / timestep_fs);
  plan.equil_chunks = (plan.total_equil_steps + chunk_steps - 1) / chunk_steps;
  plan.n_transitions = n_transitions;
  plan.transition_steps = std::llround(transition_ps * 1e3 / timestep_fs);
  plan.max_chunk_iterations = PhasePlan::kMaxChunkIterations;
  if (plan.total_equil_steps < 1) throw ValidationError("equil_ns", "shorter than one time step");
  if (plan.equil_chunks > plan.max_chunk_iterations)
    throw ValidationError("chunk_steps",
                          fmt::format("{} chunks needed but the driver loop allows at most {}",
                                      plan.equil_chunks, plan.max_chunk_iterations));
  return plan;
}

double equilibration_ns(const PhasePlan& plan, double timestep_fs) {
  return static_cast<double>(plan.total_equil_steps) * timestep_fs / 1e6;
}

double transition_phase_ns(const PhasePlan& plan, double timestep_fs) {
  return static_cast<double>(plan.n_transitions * plan.transition_steps) * timestep_fs / 1e6;
}

double trajectory_ns(const PhasePlan& plan, double timestep_fs) {
  const auto steps = plan.total_equil_steps + plan.n_transitions * plan.transition_steps;
  return static_cast<double>(steps) * timestep_fs / 1e6;
}

void validate_progress(const PhasePlan& plan, const JobProgress& p) {
  std::vector<Diagnostic> diags;
  if (p.chunks_done < 0 || p.chunks_done > plan.equil_chunks)
    diags.push_back({"chunks_done", fmt::format("{} outside [0, {}]", p.chunks_done, plan.equil_chunks)});
  if (p.transitions_done < 0 || p.transitions_done > plan.n_transitions)
    diags.push_back(
        {"transitions_done", fmt::format("{} outside [0, {}]", p.transitions_done, plan.n_transitions)});
  if (p.transitions_done > 0 && p.chunks_done != plan.equil_chunks)
    diags.push_back({"transitions_done", "transitions started before equilibration finished"});
  if (p.integrated && (p.chunks_done != plan.equil_chunks || p.transitions_done != plan.n_transitions))
    diags.push_back({"integrated", "integrated before all transitions finished"});
  if (!diags.empty()) throw ValidationError(std::move(diags));
}

std::string default_system_id(std::string_view target, JobKind kind) {
  std::string id;
  for (char c : target)
    if (std::isalnum(static_cast<unsigned char>(c))) id.push_back(static_cast<char>(std::tolower(c)));
  id += kind == JobKind::complex ? "_complex" : "_ligand";
  return id;
}

std::vector<Diagnostic> validate_ensemble(const EnsembleSpec& s) {
  std::vector<Diagnostic> d;
  if (s.targets.empty()) d.push_back({"targets", "at least one target required"});
  std::set<std::string> names;
  for (std::size_t i = 0; i < s.targets.size(); ++i) {
    const auto& t = s.targets[i];
    const auto loc = detail::index_loc("targets", i) + " (" + t.name + ")";
    if (t.name.empty()) d.push_back({loc, "name must not be empty"});
    if (!names.insert(t.name).second) d.push_back({loc, "duplicate target name"});
    if (t.edges < 0) d.push_back({loc + ".edges", "must be >= 0"});
    if (t.complex_atoms < 0 || t.ligand_atoms < 0) d.push_back({loc, "atom counts must be >= 0"});
  }
  if (s.replicas < 1) d.push_back({"replicas", "must be >= 1"});
  if (s.directions < 1) d.push_back({"directions", "must be >= 1"});
  if (s.forcefields < 1) d.push_back({"forcefields", "must be >= 1"});
  if (!(s.equil_ns > 0)) d.push_back({"equil_ns", "must be > 0"});
  if (!(s.transition_ps > 0)) d.push_back({"transition_ps", "must be > 0"});
  if (!(s.timestep_fs > 0)) d.push_back({"timestep_fs", "must be > 0"});
  if (s.n_transitions < 0) d.push_back({"n_transitions", "must be >= 0"});
  if (s.chunk_steps < 1) d.push_back({"chunk_steps", "must be >= 1"});
  for (auto [name, r] : {std::pair{"resources.ligand", s.ligand_resources},
                         std::pair{"resources.complex", s.complex_resources}}) {
    if (r.vcpus < 1) d.push_back({name, "vcpus must be >= 1"});
    if (r.gpus < 0 || r.gpus > 1) d.push_back({name, "gpus must be 0 or 1"});
  }
  if (d.empty()) {
    try {
      (void)make_phase_plan(s.equil_ns, s.timestep_fs, s.chunk_steps, s.n_transitions, s.transition_ps);
    } catch (const ValidationError& e) {
      for (const auto& x : e.diagnostics()) d.push_back({"phase_plan." + x.location, x.message});
    }
  }
  return d;
}

std::int64_t expected_job_count(const EnsembleSpec& spec) {
  std::int64_t edges = 0;
  for (const auto& t : spec.targets) edges += t.edges;
  return 2 * edges * spec.replicas * spec.directions * spec.forcefields;
}

std::int64_t fe_difference_count(const EnsembleSpec& spec) {
  std::int64_t edges = 0;
  for (const auto& t : spec.targets) edges += t.edges;
  return edges * spec.forcefields;
}

namespace {

std::string direction_label(std::int64_t d) {
  return d < 26 ? std::string(1, static_cast<char>('A' + d)) : std::to_string(d);
}

}  // namespace

std::vector<JobSpec> expand_ensemble(const EnsembleSpec& spec) {
  if (auto d = validate_ensemble(spec); !d.empty()) throw ValidationError(std::move(d));
  const PhasePlan plan =
      make_phase_plan(spec.equil_ns, spec.timestep_fs, spec.chunk_steps, spec.n_transitions, spec.transition_ps);

  std::vector<JobSpec> jobs;
  jobs.reserve(static_cast<std::size_t>(expected_job_count(spec)));
  for (const auto& t : spec.targets) {
    for (JobKind kind : {JobKind::complex, JobKind::ligand}) {
      const ResourceRequest& res = kind == JobKind::complex ? spec.complex_resources : spec.ligand_resources;
      const std::string& sys_override = kind == JobKind::complex ? t.complex_system : t.ligand_system;
      const std::string system = sys_override.empty() ? default_system_id(t.name, kind) : sys_override;
      for (std::int64_t e = 0; e < t.edges; ++e) {
        for (std::int64_t d = 0; d < spec.directions; ++d) {
          for (std::int64_t r = 0; r < spec.replicas; ++r) {
            for (std::int64_t f = 0; f < spec.forcefields; ++f) {
              JobSpec j;
              const std::string edge = fmt::format("{}/edge_{}", t.name, e);
              j.id = fmt::format("{}/state{}/rep{}/ff{}/{}", edge, direction_label(d), r, f, to_string(kind));
              j.target = t.name;
              j.kind = kind;
              j.system = system;
              j.fe_label = fmt::format("{}/ff{}", edge, f);
              j.vcpu_demand = res.vcpus;
              j.whole_instance = res.whole_instance;
              j.gpu_demand = res.gpus;
              j.phase_plan = plan;
              j.timestep_fs = spec.timestep_fs;
              j.input_ref = "input/" + j.id;
              j.output_ref = "output/" + j.id;
              jobs.push_back(std::move(j));
            }
          }
        }
      }
    }
  }
  return jobs;
}

namespace {

ResourceRequest parse_resources(const json& j, const std::string& loc, ResourceRequest fallback) {
  ResourceRequest r = fallback;
  if (!j.is_object()) throw ParseError(loc + ": expected an object");
  if (detail::has(j, "vcpus")) {
    const json& v = j.at("vcpus");
    if (v.is_string() && v.get<std::string>() == "all") {
      r.whole_instance = true;
      r.vcpus = 1;
    } else if (v.is_number_integer()) {
      r.whole_instance = false;
      r.vcpus = v.get<int>();
    } else {
      throw ParseError(loc + ".vcpus: expected an integer or \"all\"");
    }
  }
  if (detail::has(j, "gpus")) r.gpus = static_cast<int>(detail::get_integer(j, "gpus", loc));
  return r;
}

json resources_json(const ResourceRequest& r) {
  json j;
  if (r.whole_instance)
    j["vcpus"] = "all";
  else
    j["vcpus"] = r.vcpus;
  j["gpus"] = r.gpus;
  return j;
}

}  // namespace

EnsembleSpec parse_workload(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "workload");
  if (!doc.is_object()) throw ParseError("workload: top level must be an object");
  EnsembleSpec s;
  const json& jt = detail::require_array(doc, "targets", "workload");
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const auto loc = detail::index_loc("targets", i);
    EnsembleTarget t;
    t.name = detail::get_string(jt[i], "name", loc);
    t.edges = detail::get_integer(jt[i], "edges", loc);
    if (detail::has(jt[i], "complex_atoms")) t.complex_atoms = detail::get_integer(jt[i], "complex_atoms", loc);
    if (detail::has(jt[i], "ligand_atoms")) t.ligand_atoms = detail::get_integer(jt[i], "ligand_atoms", loc);
    if (detail::has(jt[i], "complex_system")) t.complex_system = detail::get_string(jt[i], "complex_system", loc);
    if (detail::has(jt[i], "ligand_system")) t.ligand_system = detail::get_string(jt[i], "ligand_system", loc);
    s.targets.push_back(std::move(t));
  }
  auto int_or = [&](const char* key, std::int64_t def) {
    return detail::has(doc, key) ? detail::get_integer(doc, key, "workload") : def;
  };
  s.replicas = int_or("replicas", s.replicas);
  s.directions = int_or("directions", s.directions);
  s.forcefields = int_or("forcefields", s.forcefields);
  s.n_transitions = int_or("n_transitions", s.n_transitions);
  s.chunk_steps = int_or("chunk_steps", s.chunk_steps);
  s.equil_ns = detail::opt_number(doc, "equil_ns", "workload").value_or(s.equil_ns);
  s.transition_ps = detail::opt_number(doc, "transition_ps", "workload").value_or(s.transition_ps);
  s.timestep_fs = detail::opt_number(doc, "timestep_fs", "workload").value_or(s.timestep_fs);
  if (detail::has(doc, "resources")) {
    const json& r = doc.at("resources");
    if (detail::has(r, "ligand"))
      s.ligand_resources = parse_resources(r.at("ligand"), "resources.ligand", s.ligand_resources);
    if (detail::has(r, "complex"))
      s.complex_resources = parse_resources(r.at("complex"), "resources.complex", s.complex_resources);
  }
  if (auto d = validate_ensemble(s); !d.empty()) throw ValidationError(std::move(d));
  return s;
}

EnsembleSpec load_workload(const std::string& path) {
  return parse_workload(detail::read_text_file(path));
}

std::string serialize_workload(const EnsembleSpec& s) {
  json doc;
  doc["targets"] = json::array();
  for (const auto& t : s.targets) {
    json j{{"name", t.name},
           {"complex_atoms", t.complex_atoms},
           {"ligand_atoms", t.ligand_atoms},
           {"edges", t.edges}};
    if (!t.complex_system.empty()) j["complex_system"] = t.complex_system;
    if (!t.ligand_system.empty()) j["ligand_system"] = t.ligand_system;
    doc["targets"].push_back(std::move(j));
  }
  doc["replicas"] = s.replicas;
  doc["directions"] = s.directions;
  doc["forcefields"] = s.forcefields;
  doc["equil_ns"] = s.equil_ns;
  doc["n_transitions"] = s.n_transitions;
  doc["transition_ps"] = s.transition_ps;
  doc["timestep_fs"] = s.timestep_fs;
  doc["chunk_steps"] = s.chunk_steps;
  doc["resources"] = {{"ligand", resources_json(s.ligand_resources)},
                      {"complex", resources_json(s.complex_resources)}};
  return doc.dump(2);
}

}  // namespace spotsim
