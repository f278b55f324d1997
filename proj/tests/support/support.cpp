#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace spotsim::test {

std::string data_path(const std::string& rel) { return std::string(SPOTSIM_DATA_DIR) + "/" + rel; }
std::string oracle_path(const std::string& rel) { return std::string(SPOTSIM_TEST_DIR) + "/oracle/" + rel; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

JobSpec make_job(std::string id, std::string system, int vcpus, bool whole_instance, int gpus,
                 const PhasePlan& plan, JobKind kind) {
  JobSpec j;
  j.id = std::move(id);
  j.target = "T";
  j.kind = kind;
  j.system = std::move(system);
  j.fe_label = "T/edge_0/ff0";
  j.vcpu_demand = vcpus;
  j.whole_instance = whole_instance;
  j.gpu_demand = gpus;
  j.phase_plan = plan;
  j.timestep_fs = 2.0;
  return j;
}

MicroScenario micro_scenario() {
  InstanceTypeSpec t{"t.4", 4, 0, std::nullopt, 3.0, 10.0, false, "t"};
  RegionSpec r1{"r1", {{"t", 1}}, std::nullopt};
  RegionSpec r2{"r2", {{"t", 1}}, std::nullopt};
  std::vector<PriceEntry> prices{{"t.4", "r1", 3.6, 0.3, std::nullopt}, {"t.4", "r2", 3.6, 0.3, std::nullopt}};
  MicroScenario m{Catalog({t}, {r1, r2}, prices), {}, {}, {}};

  BenchmarkRecord rec;
  rec.system = "X";
  rec.instance = "t.4";
  rec.ranks = 1;
  rec.threads = 4;
  rec.phase = BenchPhase::equilibration;
  rec.ns_per_day = 24.0;
  m.records.push_back(rec);

  const PhasePlan plan = make_phase_plan(2.0, 2.0, 500000, 2, 500.0);
  for (const char* id : {"j0", "j1", "j2"}) m.jobs.push_back(make_job(id, "X", 4, true, 0, plan));

  m.config.routing = {{{"r1", 1.0}, {"r2", 1.0}}, RoutingMode::proportional_roundrobin};
  m.config.payment = PaymentModel::on_demand;
  m.config.grace_s = 120.0;
  m.config.scripted_preemptions.push_back({5400.0, "i-0001"});
  m.config.metrics_interval_s = 60.0;
  return m;
}

GeneratedScenario generate_scenario(std::uint64_t seed, bool allow_infeasible) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto chance = [&](double p) { return real(0.0, 1.0) < p; };

  const int n_types = pick(1, 3);
  std::vector<InstanceTypeSpec> types;
  const int vcpu_choices[] = {2, 4, 8, 16};
  for (int i = 0; i < n_types; ++i) {
    InstanceTypeSpec t;
    t.name = fmt::format("t{}", i);
    t.vcpus = vcpu_choices[pick(0, 3)];
    t.gpus = chance(0.3) ? pick(1, 2) : 0;
    t.network_gbps = 10.0;
    t.family = chance(0.3) && i > 0 ? types[0].family : fmt::format("f{}", i);
    types.push_back(t);
  }

  const int n_regions = pick(1, 3);
  std::vector<RegionSpec> regions;
  std::vector<PriceEntry> prices;
  for (int r = 0; r < n_regions; ++r) {
    RegionSpec reg;
    reg.name = fmt::format("r{}", r);
    for (const auto& t : types) reg.spot_pool[t.family] = pick(1, 3);
    reg.weight = static_cast<double>(pick(1, 5));
    regions.push_back(reg);
    for (const auto& t : types) prices.push_back({t.name, reg.name, real(0.1, 4.0), real(0.2, 1.0), std::nullopt});
  }

  GeneratedScenario g{Catalog(types, regions, prices), {}, {}, {}};

  for (const auto& t : types) {
    BenchmarkRecord rec;
    rec.system = "S";
    rec.instance = t.name;
    rec.phase = BenchPhase::equilibration;
    rec.ns_per_day = real(5.0, 60.0);
    g.records.push_back(rec);
    if (chance(0.3)) {
      rec.phase = BenchPhase::transition;
      rec.ns_per_day *= real(0.5, 1.0);
      g.records.push_back(rec);
    }
  }

  int max_vcpus = 0, max_gpus = 0;
  for (const auto& t : types) {
    max_vcpus = std::max(max_vcpus, t.vcpus);
    max_gpus = std::max(max_gpus, t.gpus);
  }

  const int n_jobs = pick(1, 40);
  for (int j = 0; j < n_jobs; ++j) {
    const double equil_ns = real(0.2, 3.0);
    const std::int64_t steps = static_cast<std::int64_t>(std::llround(equil_ns * 1e6 / 2.0));
    const std::int64_t chunk = (steps + 7) / 8 + pick(0, 50000);
    const PhasePlan plan = make_phase_plan(equil_ns, 2.0, chunk, pick(0, 6), real(50.0, 500.0));
    int vcpus = pick(1, max_vcpus);
    int gpus = max_gpus > 0 && chance(0.3) ? 1 : 0;
    if (allow_infeasible && chance(0.05)) vcpus = max_vcpus + 1;
    if (allow_infeasible && max_gpus == 0 && chance(0.05)) gpus = 1;
    g.jobs.push_back(make_job(fmt::format("j{}", j), "S", vcpus, chance(0.25), gpus, plan,
                              chance(0.5) ? JobKind::complex : JobKind::ligand));
  }

  ScenarioConfig& c = g.config;
  c.seed = seed;
  c.routing.mode = chance(0.5) ? RoutingMode::weighted_random : RoutingMode::proportional_roundrobin;
  if (chance(0.5))
    for (const auto& r : regions) c.routing.weights.emplace_back(r.name, static_cast<double>(pick(1, 4)));
  std::vector<std::string> names;
  for (const auto& t : types) names.push_back(t.name);
  std::shuffle(names.begin(), names.end(), rng);
  c.complex_types = names;
  std::shuffle(names.begin(), names.end(), rng);
  c.ligand_types = names;

  const double hazards[] = {0.0, 0.01, 0.05, 0.2, 1.0};
  c.preemption.default_rate_per_instance_hour = hazards[pick(0, 4)];
  if (chance(0.3))
    c.preemption.rate_per_instance_hour[{regions[0].name, types[0].family}] = hazards[pick(0, 4)];
  for (int k = pick(0, 2); k > 0; --k)
    c.scripted_preemptions.push_back({real(0.0, 20000.0), fmt::format("i-{:04d}", pick(1, 6))});

  const double graces[] = {0.0, 60.0, 120.0, std::numeric_limits<double>::infinity()};
  c.grace_s = graces[pick(0, 3)];
  c.metrics_interval_s = chance(0.5) ? 600.0 : 1800.0;
  c.acquisition_latency_s = chance(0.5) ? 0.0 : real(0.0, 300.0);
  if (chance(0.3)) c.acquisitions_per_minute = real(0.5, 4.0);
  c.transfer_latency_s = chance(0.5) ? 0.0 : real(0.0, 30.0);
  c.payment = chance(0.5) ? PaymentModel::spot : PaymentModel::on_demand;
  c.ligand_submit_s = chance(0.3) ? real(0.0, 5000.0) : 0.0;
  c.runtime.transition_slowdown = chance(0.3) ? real(1.0, 2.0) : 1.0;
  return g;
}

namespace {

struct Checker {
  const Simulation& sim;
  PropertyResult& out;
  std::vector<JobProgress> last_progress;
  double last_time = 0.0;
  std::size_t log_seen = 0;

  void fail(std::string msg) {
    if (out.violations.size() < 20) out.violations.push_back(std::move(msg));
  }

  void check_step() {
    const auto& instances = sim.instances();
    const auto& jobs = sim.jobs();

    for (const auto& inst : instances) {
      if (inst.free_vcpus < 0 || inst.free_gpus < 0)
        fail(fmt::format("t={} {} oversubscribed: free vcpus {} gpus {}", sim.now(), inst.id, inst.free_vcpus,
                         inst.free_gpus));
      int used_v = 0, used_g = 0;
      for (std::size_t j : inst.resident_jobs) {
        used_v += jobs[j].alloc_vcpus;
        used_g += jobs[j].alloc_gpus;
        if (!jobs[j].instance || *jobs[j].instance != static_cast<std::size_t>(&inst - instances.data()))
          fail(fmt::format("{} lists {} which points elsewhere", inst.id, jobs[j].spec.id));
      }
      if (used_v + inst.free_vcpus != inst.vcpus || used_g + inst.free_gpus != inst.gpus)
        fail(fmt::format("t={} {} capacity accounting off", sim.now(), inst.id));
      if (inst.terminated_at && !inst.resident_jobs.empty())
        fail(fmt::format("{} terminated with resident jobs", inst.id));
    }

    const JobCounters c = sim.counters();
    if (c.submitted != c.completed + c.failed + c.in_flight)
      fail(fmt::format("t={} conservation: {} != {} + {} + {}", sim.now(), c.submitted, c.completed, c.failed,
                       c.in_flight));

    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].progress < last_progress[j])
        fail(fmt::format("t={} progress of {} went backwards", sim.now(), jobs[j].spec.id));
      last_progress[j] = jobs[j].progress;
      if (jobs[j].status == JobStatus::running) {
        if (!jobs[j].instance || !instances[*jobs[j].instance].active())
          fail(fmt::format("t={} {} running without an active instance", sim.now(), jobs[j].spec.id));
      }
    }

    if (sim.now() < last_time) fail(fmt::format("clock went back from {} to {}", last_time, sim.now()));
    last_time = sim.now();

    const auto& log = sim.event_log();
    for (; log_seen < log.size(); ++log_seen) {
      if (log[log_seen].seq != static_cast<std::int64_t>(log_seen)) fail("event seq is not the log index");
      if (log_seen > 0 && log[log_seen].time_s < log[log_seen - 1].time_s) fail("event log not time ordered");
    }
  }

  void check_end() {
    const auto& jobs = sim.jobs();
    const JobCounters c = sim.counters();
    if (c.in_flight != 0) fail(fmt::format("{} jobs still in flight at the end", c.in_flight));
    if (c.completed + c.failed != static_cast<std::int64_t>(jobs.size())) fail("jobs lost");
    for (const auto& s : sim.counter_samples())
      if (s.counters.submitted != s.counters.completed + s.counters.failed + s.counters.in_flight)
        fail(fmt::format("sample at {} violates conservation", s.time_s));

    for (const auto& j : jobs)
      if (j.status == JobStatus::completed && !(j.progress.integrated &&
                                                j.progress.chunks_done == j.spec.phase_plan.equil_chunks &&
                                                j.progress.transitions_done == j.spec.phase_plan.n_transitions))
        fail(j.spec.id + " completed with unfinished progress");

    const BillingLedger& ledger = sim.ledger();
    std::map<std::string, const LedgerEntry*> by_id;
    double sum = 0.0;
    for (const auto& e : ledger.entries) {
      by_id[e.instance_id] = &e;
      sum += e.cost;
    }
    if (std::abs(sum - ledger.total) > 1e-9 * std::max(1.0, sum)) fail("ledger total != sum of entries");
    for (const auto& inst : sim.instances()) {
      if (!inst.acquired_at) continue;
      if (!inst.terminated_at) {
        fail(inst.id + " still running at the end");
        continue;
      }
      const double expected = (*inst.terminated_at - *inst.acquired_at) * inst.rate_per_hour / 3600.0;
      auto it = by_id.find(inst.id);
      if (it == by_id.end()) {
        fail(inst.id + " missing from the ledger");
        continue;
      }
      // one billing second per instance
      if (std::abs(it->second->cost - expected) > inst.rate_per_hour / 3600.0 + 1e-12)
        fail(fmt::format("{} billed {} expected {}", inst.id, it->second->cost, expected));
    }
    if (ledger.wasted_core_seconds < 0) fail("negative waste");

    for (const auto& [lost, duration] : sim.waste_records())
      if (!(lost >= 0) || !(lost < duration || lost == 0))
        fail(fmt::format("preemption wasted {} s of a {} s item", lost, duration));
  }
};

}  // namespace

PropertyResult check_properties(Simulation& sim) {
  PropertyResult out;
  Checker ck{sim, out, std::vector<JobProgress>(sim.jobs().size()), sim.now(), 0};
  ck.check_step();
  while (sim.step()) {
    ++out.events;
    ck.check_step();
  }
  ck.check_end();
  out.jobs = static_cast<std::int64_t>(sim.jobs().size());
  for (const auto& j : sim.jobs()) {
    out.preemptions += j.preemptions;
    if (j.status == JobStatus::completed) ++out.completed;
  }
  return out;
}

}  // namespace spotsim::test
