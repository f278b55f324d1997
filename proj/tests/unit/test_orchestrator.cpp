#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "spotsim/orchestrator.hpp"
#include "support.hpp"

using namespace spotsim;

namespace {

struct Setup {
  std::vector<InstanceTypeSpec> types;
  std::vector<RegionSpec> regions;
  std::vector<PriceEntry> prices;
  std::vector<BenchmarkRecord> records;
  std::vector<JobSpec> jobs;
  ScenarioConfig config;

  Setup() {
    config.payment = PaymentModel::on_demand;
    config.routing.mode = RoutingMode::proportional_roundrobin;
  }

  void add_type(const std::string& name, int vcpus, int gpus, int pool, double rate, double ns_per_day = 24.0) {
    types.push_back({name, vcpus, gpus, std::nullopt, 3.0, 10.0, false, name});
    if (regions.empty()) regions.push_back({"r", {}, std::nullopt});
    for (auto& r : regions) r.spot_pool[name] = pool;
    prices.push_back({name, "r", rate, 0.3, std::nullopt});
    BenchmarkRecord b;
    b.system = "S";
    b.instance = name;
    b.phase = BenchPhase::equilibration;
    b.ns_per_day = ns_per_day;
    records.push_back(b);
  }

  Simulation make() const { return Simulation(Catalog(types, regions, prices), records, jobs, 1, config); }
};

// chunks of 1 ns, transitions of 0.5 ns: 3600 s and 1800 s at 24 ns/day
PhasePlan hour_plan(int chunks, int transitions) {
  return make_phase_plan(chunks, 2.0, 500000, transitions, 500.0);
}

}  // namespace

TEST_CASE("resume point") {
  const PhasePlan p = make_phase_plan(6.0, 2.0, 500000, 80, 50.0);
  CHECK(resume_point(p, {0, 0, false}) == WorkItem{WorkKind::chunk, 0});
  CHECK(resume_point(p, {4, 0, false}) == WorkItem{WorkKind::chunk, 4});
  CHECK(resume_point(p, {6, 37, false}) == WorkItem{WorkKind::transition, 37});
  CHECK(resume_point(p, {6, 80, false}) == WorkItem{WorkKind::integrate, 0});
  CHECK(resume_point(p, {6, 80, true}).kind == WorkKind::done);
  CHECK_THROWS_AS(resume_point(p, {6, 81, false}), ValidationError);
}

TEST_CASE("round-robin routing is exact") {
  Router r({{{"a", 2.0}, {"b", 1.0}}, RoutingMode::proportional_roundrobin}, 1);
  std::map<std::string, int> n;
  for (int i = 0; i < 300; ++i) ++n[r.route()];
  CHECK(n["a"] == 200);
  CHECK(n["b"] == 100);

  Router single({{{"only", 1.0}}, RoutingMode::weighted_random}, 9);
  for (int i = 0; i < 50; ++i) CHECK(single.route() == "only");

  CHECK_THROWS_AS(Router({{{"a", 0.0}, {"b", 0.0}}, RoutingMode::weighted_random}, 1), ValidationError);
  CHECK_THROWS_AS(Router({{}, RoutingMode::weighted_random}, 1), ValidationError);
  CHECK_FALSE(validate_routing({{{"a", -1.0}}, RoutingMode::weighted_random}).empty());
}

TEST_CASE("weighted routing is seeded") {
  const RoutingPolicy p{{{"a", 1.0}, {"b", 3.0}}, RoutingMode::weighted_random};
  Router x(p, 5), y(p, 5);
  for (int i = 0; i < 100; ++i) CHECK(x.route() == y.route());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("first-fit packs one 48 and six 8 vCPU jobs on a 96 vCPU instance") {
  Setup s;
  s.add_type("big.96", 96, 0, 5, 4.0);
  const PhasePlan plan = hour_plan(1, 0);
  s.jobs.push_back(test::make_job("big", "S", 48, false, 0, plan));
  for (int i = 0; i < 7; ++i) s.jobs.push_back(test::make_job("small" + std::to_string(i), "S", 8, false, 0, plan));
  Simulation sim = s.make();
  sim.advance(0.0);
  REQUIRE(sim.instances().size() == 2);
  CHECK(sim.instances()[0].resident_jobs.size() == 7);
  CHECK(sim.instances()[0].free_vcpus == 0);
  CHECK(sim.instances()[1].resident_jobs.size() == 1);
  CHECK(sim.instances()[1].free_vcpus == 88);
}

TEST_CASE("whole-instance jobs take every vCPU and GPU") {
  Setup s;
  s.add_type("g.16", 16, 1, 2, 1.0);
  s.jobs.push_back(test::make_job("a", "S", 1, true, 0, hour_plan(1, 0)));
  s.jobs.push_back(test::make_job("b", "S", 1, false, 0, hour_plan(1, 0)));
  Simulation sim = s.make();
  sim.advance(0.0);
  REQUIRE(sim.instances().size() == 2);
  CHECK(sim.jobs()[0].alloc_vcpus == 16);
  CHECK(sim.jobs()[0].alloc_gpus == 1);
  CHECK(sim.instances()[0].free_vcpus == 0);
}

TEST_CASE("GPU job with only CPU types is marked failed") {
  Setup s;
  s.add_type("c.8", 8, 0, 2, 1.0);
  s.jobs.push_back(test::make_job("gpu", "S", 4, false, 1, hour_plan(1, 0)));
  s.jobs.push_back(test::make_job("cpu", "S", 4, false, 0, hour_plan(1, 0)));
  Simulation sim = s.make();
  const SummaryReport r = sim.run();
  CHECK(sim.jobs()[0].status == JobStatus::failed);
  CHECK(sim.jobs()[1].status == JobStatus::completed);
  CHECK(r.jobs_failed == 1);
  CHECK(r.jobs_completed == 1);
}

TEST_CASE("zero pool capacity queues and the run reports infeasibility") {
  Setup s;
  s.add_type("c.8", 8, 0, 0, 1.0);
  s.jobs.push_back(test::make_job("j", "S", 4, false, 0, hour_plan(1, 0)));
  Simulation sim = s.make();
  sim.advance(10.0);
  CHECK(sim.jobs()[0].status == JobStatus::queued);
  CHECK(sim.instances().empty());
  CHECK_THROWS_AS(sim.run(), InfeasibleError);
}

TEST_CASE("preemption mid-chunk loses only the current chunk") {
  Setup s;
  s.add_type("c.8", 8, 0, 2, 3.6);
  s.jobs.push_back(test::make_job("j", "S", 8, false, 0, hour_plan(6, 2)));
  s.config.scripted_preemptions.push_back({4 * 3600.0 + 600.0, "i-0001"});
  Simulation sim = s.make();
  sim.advance(4 * 3600.0 + 600.0);
  CHECK(sim.jobs()[0].progress.chunks_done == 4);
  CHECK(sim.jobs()[0].current == WorkItem{WorkKind::chunk, 4});
  CHECK(sim.jobs()[0].instance.value() == 1);
  REQUIRE(sim.waste_records().size() == 1);
  CHECK(sim.waste_records()[0].first == 600.0);
  CHECK(sim.waste_records()[0].second == 3600.0);
  const SummaryReport r = sim.run();
  CHECK(r.ledger.wasted_core_seconds == 600.0 * 8);
  CHECK(r.preemptions == 1);
  CHECK(r.resubmissions == 1);
  CHECK(r.makespan_s == 4 * 3600.0 + 600.0 + 2 * 3600.0 + 2 * 1800.0);
  CHECK(sim.instances()[0].terminated_at.value() == 4 * 3600.0 + 600.0);
}

TEST_CASE("preemption at a chunk boundary keeps the chunk") {
  Setup s;
  s.add_type("c.8", 8, 0, 2, 3.6);
  s.jobs.push_back(test::make_job("j", "S", 8, false, 0, hour_plan(2, 0)));
  s.config.scripted_preemptions.push_back({3600.0, "i-0001"});
  Simulation sim = s.make();
  sim.advance(3600.0);
  CHECK(sim.jobs()[0].progress.chunks_done == 1);
  REQUIRE(sim.waste_records().size() == 1);
  CHECK(sim.waste_records()[0].first == 0.0);
  const auto& log = sim.event_log();
  CHECK(log[2].kind == EventKind::chunk_done);
  CHECK(log[3].kind == EventKind::preemption);
}

TEST_CASE("preempting an empty instance only closes billing") {
  Setup s;
  s.add_type("c.8", 8, 0, 2, 3.6);
  s.jobs.push_back(test::make_job("j", "S", 8, false, 0, hour_plan(1, 0)));
  s.config.grace_s = 1000.0;
  s.config.scripted_preemptions.push_back({3700.0, "i-0001"});
  s.config.scripted_preemptions.push_back({3800.0, "i-0001"});  // already gone
  Simulation sim = s.make();
  const SummaryReport r = sim.run();
  CHECK(r.resubmissions == 0);
  CHECK(r.ledger.wasted_core_seconds == 0.0);
  CHECK(sim.instances()[0].terminated_at.value() == 3700.0);
  CHECK(r.total_cost == doctest::Approx(3.7));
}

TEST_CASE("advance") {
  Setup s;
  s.add_type("c.8", 8, 0, 2, 3.6);
  s.jobs.push_back(test::make_job("j", "S", 8, false, 0, hour_plan(2, 1)));
  Simulation sim = s.make();
  sim.advance(3600.0);
  CHECK(sim.jobs()[0].progress.chunks_done == 1);
  CHECK(sim.jobs()[0].current == WorkItem{WorkKind::chunk, 1});
  CHECK_THROWS_AS(sim.advance(100.0), ValidationError);
  sim.run();
  const double end = sim.now();
  sim.advance(end + 5000.0);
  CHECK(sim.now() == end + 5000.0);
}

TEST_CASE("zero-hazard run costs runtime plus idle tails") {
  Setup s;
  s.add_type("c.8", 8, 0, 4, 3.6);
  for (int i = 0; i < 3; ++i) s.jobs.push_back(test::make_job("j" + std::to_string(i), "S", 8, false, 0, hour_plan(i + 1, 2)));
  s.config.grace_s = 120.0;
  Simulation sim = s.make();
  const SummaryReport r = sim.run();
  // (1 + 2 + 3) h of chunks, 3 x 1 h of transitions, 3 tails of 120 s at 0.001/s
  CHECK(r.total_cost == doctest::Approx((6 + 3) * 3.6 + 3 * 0.12));
  CHECK(r.wasted_core_hours == 0.0);
  CHECK(r.productive_core_hours == doctest::Approx(9.0 * 8));
  CHECK(r.makespan_s == 4 * 3600.0);
}

TEST_CASE("infinite grace bills idle instances until the last job ends") {
  Setup s;
  s.add_type("c.8", 8, 0, 4, 3.6);
  s.jobs.push_back(test::make_job("short", "S", 8, false, 0, hour_plan(1, 0)));
  s.jobs.push_back(test::make_job("long", "S", 8, false, 0, hour_plan(3, 0)));
  s.config.grace_s = std::numeric_limits<double>::infinity();
  Simulation sim = s.make();
  const SummaryReport r = sim.run();
  CHECK(sim.instances()[0].terminated_at.value() == 3 * 3600.0);
  CHECK(r.total_cost == doctest::Approx(6 * 3.6));
}

TEST_CASE("acquisition latency and throughput delay starts") {
  Setup s;
  s.add_type("c.8", 8, 0, 4, 3.6);
  for (int i = 0; i < 3; ++i) s.jobs.push_back(test::make_job("j" + std::to_string(i), "S", 8, false, 0, hour_plan(1, 0)));
  s.config.acquisition_latency_s = 30.0;
  s.config.acquisitions_per_minute = 1.0;
  Simulation sim = s.make();
  sim.run();
  REQUIRE(sim.instances().size() == 3);
  CHECK(sim.instances()[0].acquired_at.value() == 30.0);
  CHECK(sim.instances()[1].acquired_at.value() == 90.0);
  CHECK(sim.instances()[2].acquired_at.value() == 150.0);
}

TEST_CASE("transfer latency is added to every work item") {
  Setup s;
  s.add_type("c.8", 8, 0, 4, 3.6);
  s.jobs.push_back(test::make_job("j", "S", 8, false, 0, hour_plan(2, 1)));
  s.config.transfer_latency_s = 10.0;
  Simulation sim = s.make();
  const SummaryReport r = sim.run();
  // two chunks and one transition move checkpoints; integration is local
  CHECK(r.makespan_s == doctest::Approx(2 * 3610.0 + 1810.0));
}

TEST_CASE("same seed, same log") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto g = test::generate_scenario(seed);
    g.config.preemption.default_rate_per_instance_hour = 0.5;
    Simulation a(g.catalog, g.records, g.jobs, 1, g.config);
    Simulation b(g.catalog, g.records, g.jobs, 1, g.config);
    while (a.step()) {
    }
    while (b.step()) {
    }
    CHECK(event_log_csv(a.event_log()) == event_log_csv(b.event_log()));
    CHECK(summary_json(a.summary()) == summary_json(b.summary()));
  }
}

TEST_CASE("metrics rows") {
  Setup s;
  s.add_type("c.8", 8, 0, 4, 3.6);
  s.jobs.push_back(test::make_job("j", "S", 4, false, 0, hour_plan(1, 0)));
  s.config.metrics_interval_s = 600.0;
  Simulation sim = s.make();
  sim.run();
  const auto& m = sim.metrics();
  REQUIRE_FALSE(m.empty());
  CHECK(m.front().time_s == 0.0);
  CHECK(m.front().active_instances == 1);
  CHECK(m.front().vcpus_in_use == 4);
  for (const auto& row : m) CHECK(row.time_s <= 3600.0 + 120.0);
  CHECK(metrics_csv(m).rfind("time_s,region,instance_type,active_instances,vcpus_in_use,gpus_in_use\n", 0) == 0);
}

TEST_CASE("config validation") {
  Setup s;
  s.add_type("c.8", 8, 0, 4, 3.6);
  s.config.grace_s = -1;
  s.config.complex_types = {"nope"};
  const auto d = validate_config(s.config, Catalog(s.types, s.regions, s.prices));
  CHECK(d.size() == 2);
  CHECK_THROWS_AS(s.make(), ValidationError);
}

TEST_CASE("an idle instance of an unusable type gives back its pool slot") {
  Setup s;
  s.add_type("cpu.16", 16, 0, 1, 1.0);
  s.add_type("gpu.16", 16, 1, 1, 2.0);
  s.types[1].family = s.types[0].family;  // one shared pool slot
  s.regions[0].spot_pool = {{"cpu.16", 1}};
  s.config.grace_s = std::numeric_limits<double>::infinity();
  s.jobs.push_back(test::make_job("cpu", "S", 16, false, 0, hour_plan(1, 0)));
  s.jobs.push_back(test::make_job("gpu", "S", 4, false, 1, hour_plan(1, 0)));
  s.config.complex_types = {"cpu.16", "gpu.16"};
  Simulation sim = s.make();
  const SummaryReport r = sim.run();
  CHECK(r.jobs_completed == 2);
  REQUIRE(sim.instances().size() == 2);
  CHECK(sim.instances()[0].terminated_at.value() == 3600.0);
  CHECK(sim.instances()[1].acquired_at.value() == 3600.0);
}
