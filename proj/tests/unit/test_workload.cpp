#include <doctest.h>

#include <set>

#include "spotsim/workload.hpp"
#include "support.hpp"

using namespace spotsim;

TEST_CASE("phase plan") {
  const PhasePlan p = make_phase_plan(6.0, 2.0, 500000, 80, 50.0);
  CHECK(p.total_equil_steps == 3000000);
  CHECK(p.equil_chunks == 6);
  CHECK(p.transition_steps == 25000);
  CHECK(trajectory_ns(p, 2.0) == 10.0);

  const PhasePlan q = make_phase_plan(1.1, 2.0, 200000, 0, 50.0);
  CHECK(q.equil_chunks == 3);
  CHECK(q.steps_in_chunk(0) == 200000);
  CHECK(q.steps_in_chunk(2) == 150000);
  CHECK_THROWS_AS(make_phase_plan(6.0, 2.0, 100000, 80, 50.0), ValidationError);  // 30 chunks
  CHECK_THROWS_AS(make_phase_plan(0.0, 2.0, 100000, 80, 50.0), ValidationError);
  CHECK_THROWS_AS(make_phase_plan(1.0, 2.0, 0, 80, 50.0), ValidationError);
}

TEST_CASE("progress validation") {
  const PhasePlan p = make_phase_plan(6.0, 2.0, 500000, 80, 50.0);
  CHECK_NOTHROW(validate_progress(p, {6, 37, false}));
  CHECK_THROWS_AS(validate_progress(p, {7, 0, false}), ValidationError);
  CHECK_THROWS_AS(validate_progress(p, {3, 1, false}), ValidationError);
  CHECK_THROWS_AS(validate_progress(p, {6, 79, true}), ValidationError);
  CHECK(JobProgress{6, 1, false} > JobProgress{5, 80, true});
}

TEST_CASE("ensemble expansion order and labels") {
  EnsembleSpec s;
  s.targets = {{"c-Met", 67291, 6443, 2, "", ""}};
  s.forcefields = 2;
  const auto jobs = expand_ensemble(s);
  CHECK(jobs.size() == 2 * 2 * 2 * 3 * 2);
  CHECK(expected_job_count(s) == 48);
  CHECK(fe_difference_count(s) == 4);
  CHECK(jobs.front().id == "c-Met/edge_0/stateA/rep0/ff0/complex");
  CHECK(jobs.front().system == "cmet_complex");
  CHECK(jobs.front().whole_instance);
  CHECK(jobs.back().kind == JobKind::ligand);
  CHECK(jobs.back().system == "cmet_ligand");
  CHECK(jobs.back().vcpu_demand == 8);
  std::set<std::string> ids, labels;
  for (const auto& j : jobs) {
    ids.insert(j.id);
    labels.insert(j.fe_label);
  }
  CHECK(ids.size() == jobs.size());
  CHECK(labels.size() == 4);
  CHECK(expand_ensemble(s).front().id == jobs.front().id);
}

TEST_CASE("ensemble validation") {
  EnsembleSpec s;
  CHECK_FALSE(validate_ensemble(s).empty());
  s.targets = {{"a", 0, 0, -1, "", ""}};
  s.replicas = 0;
  CHECK(validate_ensemble(s).size() >= 2);
  CHECK_THROWS_AS(expand_ensemble(s), ValidationError);
}

TEST_CASE("default system id") {
  CHECK(default_system_id("c-Met", JobKind::complex) == "cmet_complex");
  CHECK(default_system_id("Bace (Hunt)", JobKind::ligand) == "bacehunt_ligand");
}

TEST_CASE("workload files") {
  const EnsembleSpec s1 = load_workload(test::data_path("workload_study1.json"));
  CHECK(s1.targets.size() == 8);
  CHECK(s1.forcefields == 3);
  CHECK(s1.complex_resources.whole_instance);
  const EnsembleSpec again = parse_workload(serialize_workload(s1));
  CHECK(expected_job_count(again) == expected_job_count(s1));
  CHECK(again.targets[0].complex_system == s1.targets[0].complex_system);
  CHECK_THROWS_AS(parse_workload(R"({"targets": [{"name": "x", "edges": 1}], "resources": {"ligand": {"vcpus": "some"}}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_workload(R"({"targets": [{"name": "x", "edges": -1}]})"), ValidationError);
}
