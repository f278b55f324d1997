#include "spotsim/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace spotsim {

WorkItem resume_point(const PhasePlan& plan, const JobProgress& p) {
  validate_progress(plan, p);
  if (p.chunks_done < plan.equil_chunks) return {WorkKind::chunk, p.chunks_done};
  if (p.transitions_done < plan.n_transitions) return {WorkKind::transition, p.transitions_done};
  if (!p.integrated) return {WorkKind::integrate, 0};
  return {WorkKind::done, 0};
}

std::string_view to_string(RoutingMode mode) {
  return mode == RoutingMode::weighted_random ? "weighted_random" : "proportional_roundrobin";
}

RoutingMode parse_routing_mode(std::string_view text) {
  if (text == "weighted_random") return RoutingMode::weighted_random;
  if (text == "proportional_roundrobin") return RoutingMode::proportional_roundrobin;
  throw ParseError("unknown routing mode '" + std::string(text) + "'");
}

std::vector<Diagnostic> validate_routing(const RoutingPolicy& policy) {
  std::vector<Diagnostic> d;
  bool positive = false;
  std::set<std::string> seen;
  for (const auto& [region, w] : policy.weights) {
    if (!(w >= 0) || !std::isfinite(w)) d.push_back({"routing.weights." + region, "weight must be finite and >= 0"});
    if (w > 0) positive = true;
    if (!seen.insert(region).second) d.push_back({"routing.weights." + region, "duplicate region"});
  }
  if (!positive) d.push_back({"routing.weights", "at least one weight must be positive"});
  return d;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Router::Router(RoutingPolicy policy, std::uint64_t seed) : policy_(std::move(policy)), rng_(seed) {
  if (auto d = validate_routing(policy_); !d.empty()) throw ValidationError(std::move(d));
  for (const auto& [r, w] : policy_.weights) total_ += w;
  current_.assign(policy_.weights.size(), 0.0);
}

const std::string& Router::route() {
  const auto& w = policy_.weights;
  if (policy_.mode == RoutingMode::proportional_roundrobin) {
    // Smooth weighted round-robin: credit everyone, serve the largest credit.
    std::size_t best = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      current_[i] += w[i].second;
      if (current_[i] > current_[best]) best = i;
    }
    current_[best] -= total_;
    return w[best].first;
  }
  const double x = uniform01(rng_) * total_;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].second <= 0) continue;
    cum += w[i].second;
    last_positive = i;
    if (x < cum) return w[i].first;
  }
  return w[last_positive].first;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::job_submitted: return "job_submitted";
    case EventKind::instance_acquired: return "instance_acquired";
    case EventKind::chunk_done: return "chunk_done";
    case EventKind::transition_done: return "transition_done";
    case EventKind::integrate_done: return "integrate_done";
    case EventKind::preemption: return "preemption";
    case EventKind::instance_idle_timeout: return "instance_idle_timeout";
    case EventKind::job_completed: return "job_completed";
  }
  return "unknown";
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::pending: return "pending";
    case JobStatus::queued: return "queued";
    case JobStatus::placed: return "placed";
    case JobStatus::running: return "running";
    case JobStatus::completed: return "completed";
    case JobStatus::failed: return "failed";
  }
  return "unknown";
}

double PreemptionModel::rate(const std::string& region, const std::string& family) const {
  auto it = rate_per_instance_hour.find({region, family});
  return it == rate_per_instance_hour.end() ? default_rate_per_instance_hour : it->second;
}

std::vector<Diagnostic> validate_config(const ScenarioConfig& c, const Catalog& catalog) {
  std::vector<Diagnostic> d;
  if (!c.routing.weights.empty()) {
    for (auto& x : validate_routing(c.routing)) d.push_back(std::move(x));
    for (const auto& [region, w] : c.routing.weights)
      if (!catalog.find_region(region)) d.push_back({"routing.weights." + region, "unknown region"});
  }
  for (const auto* list : {&c.complex_types, &c.ligand_types})
    for (const auto& t : *list)
      if (!catalog.find_instance(t)) d.push_back({"allowed_types", "unknown instance type '" + t + "'"});
  if (!(c.preemption.default_rate_per_instance_hour >= 0))
    d.push_back({"preemption.default_rate_per_instance_hour", "must be >= 0"});
  for (const auto& [key, rate] : c.preemption.rate_per_instance_hour)
    if (!(rate >= 0)) d.push_back({"preemption.rates." + key.first + "." + key.second, "must be >= 0"});
  if (!(c.grace_s >= 0)) d.push_back({"grace_s", "must be >= 0"});
  if (!(c.metrics_interval_s > 0) || !std::isfinite(c.metrics_interval_s))
    d.push_back({"metrics_interval_s", "must be finite and > 0"});
  if (!(c.acquisition_latency_s >= 0)) d.push_back({"acquisition_latency_s", "must be >= 0"});
  if (c.acquisitions_per_minute && !(*c.acquisitions_per_minute > 0))
    d.push_back({"acquisitions_per_minute", "must be > 0"});
  if (!(c.transfer_latency_s >= 0)) d.push_back({"transfer_latency_s", "must be >= 0"});
  if (!(c.runtime.transition_slowdown > 0)) d.push_back({"transition_slowdown", "must be > 0"});
  if (!(c.complex_submit_s >= 0) || !(c.ligand_submit_s >= 0)) d.push_back({"submit_offset_s", "must be >= 0"});
  for (const auto& s : c.scripted_preemptions)
    if (!(s.time_s >= 0)) d.push_back({"scripted_preemptions." + s.instance_id, "time must be >= 0"});
  return d;
}

namespace {

enum class Ev { submit, acquired, work_done, completed, preempt, scripted_preempt, idle_timeout };

// Completions sort ahead of everything else at equal time, preemptions last.
int event_class(Ev e) {
  switch (e) {
    case Ev::work_done:
    case Ev::completed: return 0;
    case Ev::preempt:
    case Ev::scripted_preempt: return 2;
    default: return 1;
  }
}

struct Event {
  double time;
  int cls;
  std::uint64_t seq;
  Ev kind;
  std::size_t job;
  std::size_t instance;
  std::int64_t token;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (cls != o.cls) return cls > o.cls;
    return seq > o.seq;
  }
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct RegionRuntime {
  std::string name;
  std::deque<std::pair<std::uint64_t, std::size_t>> queue[2];  // by JobKind, (stamp, job)
  std::vector<std::size_t> live;                               // acquisition order
  std::map<std::string, int> live_by_family;
  double next_acquisition = 0.0;
};

int kind_index(JobKind k) { return k == JobKind::complex ? 0 : 1; }

}  // namespace

struct Simulation::Impl {
  Catalog catalog;
  std::vector<BenchmarkRecord> records;
  ScenarioConfig config;
  std::int64_t fe_differences = 0;

  Router router;
  std::mt19937_64 hazard_rng;

  std::vector<JobState> jobs;
  std::vector<InstanceState> instances;
  std::vector<std::int64_t> idle_gen;
  std::map<std::string, RegionRuntime> regions;
  std::map<std::string, std::size_t> instance_by_id;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t next_seq = 0;
  std::uint64_t next_stamp = 0;
  double clock = 0.0;

  std::vector<EventLogEntry> log;
  std::vector<MetricsRow> metrics;
  std::vector<CounterSample> samples;
  double next_sample = 0.0;

  BillingLedger ledger;
  std::vector<std::pair<double, double>> waste;
  JobCounters counts;
  std::int64_t preemptions = 0;
  std::int64_t resubmissions = 0;
  double makespan = 0.0;
  int active_instances = 0;
  int vcpus_in_use = 0;
  int gpus_in_use = 0;
  int peak_instances = 0;
  int peak_vcpus = 0;
  int peak_gpus = 0;

  std::map<std::pair<std::string, std::string>, std::optional<PhaseRates>> rate_cache;

  Impl(Catalog cat, std::vector<BenchmarkRecord> recs, std::vector<JobSpec> specs, std::int64_t fe,
       ScenarioConfig cfg)
      : catalog(std::move(cat)),
        records(std::move(recs)),
        config(std::move(cfg)),
        fe_differences(fe),
        router(effective_routing(config, catalog), config.seed),
        hazard_rng(config.seed ^ 0x9e3779b97f4a7c15ULL) {
    if (auto d = validate_config(config, catalog); !d.empty()) throw ValidationError(std::move(d));
    std::set<std::string> ids;
    for (auto& s : specs) {
      if (!ids.insert(s.id).second) throw ValidationError("jobs", "duplicate job id '" + s.id + "'");
      if (s.vcpu_demand < 1) throw ValidationError(s.id, "vcpu_demand must be >= 1");
      if (s.gpu_demand < 0) throw ValidationError(s.id, "gpu_demand must be >= 0");
      JobState j;
      j.spec = std::move(s);
      jobs.push_back(std::move(j));
    }
    for (const auto& r : catalog.regions()) regions[r.name].name = r.name;
    if (config.complex_types.empty() || config.ligand_types.empty()) {
      std::vector<std::string> all;
      for (const auto& t : catalog.instances()) all.push_back(t.name);
      if (config.complex_types.empty()) config.complex_types = all;
      if (config.ligand_types.empty()) config.ligand_types = all;
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const double t = jobs[i].spec.kind == JobKind::complex ? config.complex_submit_s : config.ligand_submit_s;
      schedule(t, Ev::submit, i, kNone, 0);
    }
    for (std::size_t i = 0; i < config.scripted_preemptions.size(); ++i)
      schedule(config.scripted_preemptions[i].time_s, Ev::scripted_preempt, kNone, kNone,
               static_cast<std::int64_t>(i));
  }

  static RoutingPolicy effective_routing(const ScenarioConfig& cfg, const Catalog& cat) {
    RoutingPolicy p = cfg.routing;
    if (p.weights.empty())
      for (const auto& r : cat.regions()) p.weights.emplace_back(r.name, r.weight.value_or(1.0));
    return p;
  }

  void schedule(double t, Ev kind, std::size_t job, std::size_t inst, std::int64_t token) {
    queue.push({t, event_class(kind), next_seq++, kind, job, inst, token});
  }

  void emit(EventKind kind, std::size_t job, std::size_t inst) {
    log.push_back({clock, static_cast<std::int64_t>(log.size()), kind, job == kNone ? "" : jobs[job].spec.id,
                   inst == kNone ? "" : instances[inst].id});
  }

  const std::optional<PhaseRates>& rates_for(const std::string& system, const std::string& type) {
    auto key = std::make_pair(system, type);
    auto it = rate_cache.find(key);
    if (it != rate_cache.end()) return it->second;
    std::optional<PhaseRates> r;
    try {
      r = phase_rates(records, system, type, config.runtime);
    } catch (const NotFoundError&) {
    }
    return rate_cache.emplace(key, std::move(r)).first->second;
  }

  const std::vector<std::string>& allowed(const JobSpec& s) const {
    return s.kind == JobKind::complex ? config.complex_types : config.ligand_types;
  }

  // Types the job could ever run on in this region, in preference order.
  std::vector<const InstanceTypeSpec*> usable_types(const JobSpec& s, const std::string& region) {
    std::vector<const InstanceTypeSpec*> out;
    for (const auto& name : allowed(s)) {
      const InstanceTypeSpec& t = catalog.instance(name);
      if (t.vcpus < s.vcpu_demand || t.gpus < s.gpu_demand) continue;
      if (!rates_for(s.system, t.name)) continue;
      const PriceEntry* p = catalog.find_price(t.name, region);
      if (!p) continue;
      if (config.payment == PaymentModel::reserved_upfront && !p->reserved_upfront_per_hour) continue;
      out.push_back(&t);
    }
    return out;
  }

  bool fits(const JobSpec& s, const InstanceState& inst) const {
    if (s.whole_instance) return inst.resident_jobs.empty() && inst.vcpus >= s.vcpu_demand && inst.gpus >= s.gpu_demand;
    return inst.free_vcpus >= s.vcpu_demand && inst.free_gpus >= s.gpu_demand;
  }

  bool try_place(std::size_t j, const std::vector<const InstanceTypeSpec*>& types) {
    const JobSpec& s = jobs[j].spec;
    RegionRuntime& reg = regions.at(jobs[j].region);
    for (std::size_t idx : reg.live) {
      const InstanceState& inst = instances[idx];
      bool type_ok = std::any_of(types.begin(), types.end(), [&](auto* t) { return t->name == inst.type; });
      if (type_ok && fits(s, inst)) {
        assign(j, idx);
        return true;
      }
    }
    const RegionSpec& spec = catalog.region(reg.name);
    for (const InstanceTypeSpec* t : types) {
      if (reg.live_by_family[t->family] >= spec.pool_capacity(t->family)) continue;
      assign(j, acquire(reg, *t));
      return true;
    }
    // An empty instance of a type this job cannot use may be holding the
    // family's last pool slot; give it back.
    for (const InstanceTypeSpec* t : types) {
      auto it = std::find_if(reg.live.begin(), reg.live.end(), [&](std::size_t idx) {
        const InstanceState& inst = instances[idx];
        return inst.family == t->family && inst.active() && inst.resident_jobs.empty();
      });
      if (it == reg.live.end()) continue;
      const std::size_t idle = *it;
      terminate(idle);
      emit(EventKind::instance_idle_timeout, kNone, idle);
      assign(j, acquire(reg, *t));
      return true;
    }
    return false;
  }

  std::size_t acquire(RegionRuntime& reg, const InstanceTypeSpec& t) {
    InstanceState inst;
    inst.id = fmt::format("i-{:04d}", instances.size() + 1);
    inst.type = t.name;
    inst.family = t.family;
    inst.region = reg.name;
    inst.vcpus = inst.free_vcpus = t.vcpus;
    inst.gpus = inst.free_gpus = t.gpus;
    inst.requested_at = clock;
    inst.rate_per_hour = lookup_rate(catalog, t.name, reg.name, config.payment);
    const std::size_t idx = instances.size();
    instances.push_back(std::move(inst));
    idle_gen.push_back(0);
    instance_by_id[instances[idx].id] = idx;
    reg.live.push_back(idx);
    reg.live_by_family[t.family] += 1;

    double start = std::max(clock, reg.next_acquisition);
    if (config.acquisitions_per_minute) reg.next_acquisition = start + 60.0 / *config.acquisitions_per_minute;
    schedule(start + config.acquisition_latency_s, Ev::acquired, kNone, idx, 0);
    return idx;
  }

  void assign(std::size_t j, std::size_t idx) {
    JobState& job = jobs[j];
    InstanceState& inst = instances[idx];
    job.alloc_vcpus = job.spec.whole_instance ? inst.vcpus : job.spec.vcpu_demand;
    job.alloc_gpus = job.spec.whole_instance ? inst.gpus : job.spec.gpu_demand;
    inst.free_vcpus -= job.alloc_vcpus;
    inst.free_gpus -= job.alloc_gpus;
    inst.resident_jobs.push_back(j);
    idle_gen[idx] += 1;
    job.instance = idx;
    job.status = JobStatus::placed;
    if (inst.active()) {
      vcpus_in_use += job.alloc_vcpus;
      gpus_in_use += job.alloc_gpus;
      start_next(j);
    }
  }

  void release(std::size_t j) {
    JobState& job = jobs[j];
    InstanceState& inst = instances[*job.instance];
    inst.free_vcpus += job.alloc_vcpus;
    inst.free_gpus += job.alloc_gpus;
    if (inst.active()) {
      vcpus_in_use -= job.alloc_vcpus;
      gpus_in_use -= job.alloc_gpus;
    }
    auto& res = inst.resident_jobs;
    res.erase(std::find(res.begin(), res.end(), j));
    job.instance.reset();
    job.alloc_vcpus = job.alloc_gpus = 0;
  }

  void start_next(std::size_t j) {
    JobState& job = jobs[j];
    const InstanceState& inst = instances[*job.instance];
    const PhasePlan& plan = job.spec.phase_plan;
    job.current = resume_point(plan, job.progress);
    job.status = JobStatus::running;
    job.item_start = clock;
    job.attempt += 1;
    double duration = 0.0;
    if (job.current.kind == WorkKind::chunk || job.current.kind == WorkKind::transition) {
      const PhaseRates& r = *rates_for(job.spec.system, inst.type);
      const bool chunk = job.current.kind == WorkKind::chunk;
      const auto steps = chunk ? plan.steps_in_chunk(job.current.index) : plan.transition_steps;
      const double ns = static_cast<double>(steps) * job.spec.timestep_fs / 1e6;
      duration = ns * 86400.0 / (chunk ? r.equil_rate : r.transition_rate) + config.transfer_latency_s;
    }
    job.item_duration = duration;
    schedule(clock + duration, job.current.kind == WorkKind::done ? Ev::completed : Ev::work_done, j, kNone,
             job.attempt);
  }

  void terminate(std::size_t idx) {
    InstanceState& inst = instances[idx];
    inst.terminated_at = clock;
    RegionRuntime& reg = regions.at(inst.region);
    reg.live.erase(std::find(reg.live.begin(), reg.live.end(), idx));
    reg.live_by_family[inst.family] -= 1;
    if (inst.acquired_at) {
      active_instances -= 1;
      const double dur = clock - *inst.acquired_at;
      const double cost = dur * inst.rate_per_hour / 3600.0;
      ledger.entries.push_back({inst.id, inst.type, inst.region, dur, inst.rate_per_hour, cost});
      ledger.total += cost;
    }
  }

  void dispatch(const std::string& region) {
    RegionRuntime& reg = regions.at(region);
    bool blocked[2] = {false, false};
    while (true) {
      int pick = -1;
      for (int k = 0; k < 2; ++k) {
        if (blocked[k] || reg.queue[k].empty()) continue;
        if (pick < 0 || reg.queue[k].front().first < reg.queue[pick].front().first) pick = k;
      }
      if (pick < 0) return;
      const std::size_t j = reg.queue[pick].front().second;
      if (try_place(j, usable_types(jobs[j].spec, region)))
        reg.queue[pick].pop_front();
      else
        blocked[pick] = true;
    }
  }

  void maybe_idle(std::size_t idx) {
    const InstanceState& inst = instances[idx];
    if (!inst.active() || !inst.resident_jobs.empty()) return;
    if (std::isfinite(config.grace_s))
      schedule(clock + config.grace_s, Ev::idle_timeout, kNone, idx, idle_gen[idx]);
  }

  void job_terminal() {
    makespan = clock;
    if (!all_terminal() || std::isfinite(config.grace_s)) return;
    // Without a grace period idle instances only stop once the workload is done.
    for (std::size_t i = 0; i < instances.size(); ++i)
      if (instances[i].live() && instances[i].resident_jobs.empty()) terminate(i);
  }

  bool all_terminal() const { return counts.completed + counts.failed == static_cast<std::int64_t>(jobs.size()); }

  bool is_stale(const Event& e) const {
    switch (e.kind) {
      case Ev::submit: return false;
      case Ev::acquired: return instances[e.instance].terminated_at.has_value();
      case Ev::work_done:
      case Ev::completed: return jobs[e.job].status != JobStatus::running || jobs[e.job].attempt != e.token;
      case Ev::preempt: return !instances[e.instance].active();
      case Ev::scripted_preempt: {
        auto it = instance_by_id.find(config.scripted_preemptions[static_cast<std::size_t>(e.token)].instance_id);
        return it == instance_by_id.end() || !instances[it->second].active();
      }
      case Ev::idle_timeout: {
        const InstanceState& inst = instances[e.instance];
        return !inst.active() || !inst.resident_jobs.empty() || idle_gen[e.instance] != e.token;
      }
    }
    return true;
  }

  void on_submit(std::size_t j) {
    JobState& job = jobs[j];
    if (job.submissions == 0) {
      counts.submitted += 1;
      counts.in_flight += 1;
    } else {
      resubmissions += 1;
    }
    job.submissions += 1;
    job.region = router.route();
    auto types = usable_types(job.spec, job.region);
    if (types.empty()) {
      emit(EventKind::job_submitted, j, kNone);
      job.status = JobStatus::failed;
      counts.failed += 1;
      counts.in_flight -= 1;
      job_terminal();
      return;
    }
    if (!try_place(j, types)) {
      job.status = JobStatus::queued;
      regions.at(job.region).queue[kind_index(job.spec.kind)].emplace_back(next_stamp++, j);
      emit(EventKind::job_submitted, j, kNone);
      return;
    }
    emit(EventKind::job_submitted, j, *job.instance);
  }

  void on_acquired(std::size_t idx) {
    InstanceState& inst = instances[idx];
    inst.acquired_at = clock;
    active_instances += 1;
    emit(EventKind::instance_acquired, kNone, idx);
    const double rate = config.preemption.rate(inst.region, inst.family);
    if (rate > 0) {
      const double u = uniform01(hazard_rng);
      schedule(clock + -std::log1p(-u) / (rate / 3600.0), Ev::preempt, kNone, idx, 0);
    }
    const auto resident = inst.resident_jobs;
    for (std::size_t j : resident) {
      vcpus_in_use += jobs[j].alloc_vcpus;
      gpus_in_use += jobs[j].alloc_gpus;
      start_next(j);
    }
    maybe_idle(idx);
  }

  void on_work_done(std::size_t j) {
    JobState& job = jobs[j];
    const std::size_t idx = *job.instance;
    const EventKind kind = job.current.kind == WorkKind::chunk        ? EventKind::chunk_done
                           : job.current.kind == WorkKind::transition ? EventKind::transition_done
                                                                      : EventKind::integrate_done;
    emit(kind, j, idx);
    ledger.productive_core_seconds += job.item_duration * job.alloc_vcpus;
    switch (job.current.kind) {
      case WorkKind::chunk: job.progress.chunks_done += 1; break;
      case WorkKind::transition: job.progress.transitions_done += 1; break;
      case WorkKind::integrate: job.progress.integrated = true; break;
      case WorkKind::done: break;
    }
    start_next(j);
  }

  void on_completed(std::size_t j) {
    JobState& job = jobs[j];
    const std::size_t idx = *job.instance;
    emit(EventKind::job_completed, j, idx);
    release(j);
    job.status = JobStatus::completed;
    counts.completed += 1;
    counts.in_flight -= 1;
    dispatch(instances[idx].region);
    maybe_idle(idx);
    job_terminal();
  }

  void on_preempt(std::size_t idx) {
    emit(EventKind::preemption, kNone, idx);
    preemptions += 1;
    const auto resident = instances[idx].resident_jobs;
    for (std::size_t j : resident) {
      JobState& job = jobs[j];
      if (job.status == JobStatus::running) {
        const double lost = clock - job.item_start;
        ledger.wasted_core_seconds += lost * job.alloc_vcpus;
        waste.emplace_back(lost, job.item_duration);
      }
      release(j);
      job.attempt += 1;
      job.preemptions += 1;
      job.status = JobStatus::pending;
      schedule(clock, Ev::submit, j, kNone, 0);
    }
    const std::string region = instances[idx].region;
    terminate(idx);
    dispatch(region);
  }

  void on_idle_timeout(std::size_t idx) {
    emit(EventKind::instance_idle_timeout, kNone, idx);
    const std::string region = instances[idx].region;
    terminate(idx);
    dispatch(region);
  }

  void sample_until(double t, bool inclusive) {
    while (inclusive ? next_sample <= t : next_sample < t) {
      std::map<std::pair<std::string, std::string>, MetricsRow> rows;
      for (const auto& [name, reg] : regions) {
        for (std::size_t idx : reg.live) {
          const InstanceState& inst = instances[idx];
          if (!inst.acquired_at || *inst.acquired_at > next_sample) continue;
          MetricsRow& row = rows[{inst.region, inst.type}];
          row.active_instances += 1;
          row.vcpus_in_use += inst.vcpus - inst.free_vcpus;
          row.gpus_in_use += inst.gpus - inst.free_gpus;
        }
      }
      for (auto& [key, row] : rows) {
        row.time_s = next_sample;
        row.region = key.first;
        row.instance_type = key.second;
        metrics.push_back(std::move(row));
      }
      samples.push_back({next_sample, counts});
      next_sample += config.metrics_interval_s;
    }
  }

  bool step() {
    while (!queue.empty()) {
      Event e = queue.top();
      queue.pop();
      if (is_stale(e)) continue;
      sample_until(e.time, false);
      clock = e.time;
      switch (e.kind) {
        case Ev::submit: on_submit(e.job); break;
        case Ev::acquired: on_acquired(e.instance); break;
        case Ev::work_done: on_work_done(e.job); break;
        case Ev::completed: on_completed(e.job); break;
        case Ev::preempt: on_preempt(e.instance); break;
        case Ev::scripted_preempt:
          on_preempt(instance_by_id.at(config.scripted_preemptions[static_cast<std::size_t>(e.token)].instance_id));
          break;
        case Ev::idle_timeout: on_idle_timeout(e.instance); break;
      }
      peak_instances = std::max(peak_instances, active_instances);
      peak_vcpus = std::max(peak_vcpus, vcpus_in_use);
      peak_gpus = std::max(peak_gpus, gpus_in_use);
      return true;
    }
    sample_until(clock, true);
    return false;
  }

  bool next_live_before(double until) {
    while (!queue.empty() && is_stale(queue.top())) queue.pop();
    return !queue.empty() && queue.top().time <= until;
  }

  SummaryReport summary() const {
    SummaryReport s;
    s.seed = config.seed;
    s.makespan_s = makespan;
    s.ledger = ledger;
    s.total_cost = ledger.total;
    s.productive_core_hours = ledger.productive_core_seconds / 3600.0;
    s.wasted_core_hours = ledger.wasted_core_seconds / 3600.0;
    s.fe_differences = fe_differences;
    s.cost_per_ddg = fe_differences > 0 ? ledger.total / static_cast<double>(fe_differences) : 0.0;
    s.jobs_total = static_cast<std::int64_t>(jobs.size());
    s.jobs_completed = counts.completed;
    s.jobs_failed = counts.failed;
    s.preemptions = preemptions;
    s.resubmissions = resubmissions;
    s.instances_acquired = 0;
    for (const auto& inst : instances)
      if (inst.acquired_at) s.instances_acquired += 1;
    s.peak_instances = peak_instances;
    s.peak_vcpus = peak_vcpus;
    s.peak_gpus = peak_gpus;
    return s;
  }
};

Simulation::Simulation(Catalog catalog, std::vector<BenchmarkRecord> records, std::vector<JobSpec> jobs,
                       std::int64_t fe_differences, ScenarioConfig config)
    : impl_(std::make_unique<Impl>(std::move(catalog), std::move(records), std::move(jobs), fe_differences,
                                   std::move(config))) {}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

bool Simulation::step() { return impl_->step(); }

void Simulation::advance(double until) {
  if (until < impl_->clock) throw ValidationError("until", fmt::format("time regression: {} < {}", until, impl_->clock));
  while (impl_->next_live_before(until)) impl_->step();
  impl_->sample_until(until, true);
  impl_->clock = until;
}

SummaryReport Simulation::run() {
  while (impl_->step()) {
  }
  if (!impl_->all_terminal()) {
    const auto left = static_cast<std::int64_t>(impl_->jobs.size()) - impl_->counts.completed - impl_->counts.failed;
    throw InfeasibleError(fmt::format("{} jobs left queued with no capacity to run them", left));
  }
  return impl_->summary();
}

SummaryReport Simulation::summary() const { return impl_->summary(); }
double Simulation::now() const { return impl_->clock; }
bool Simulation::all_jobs_terminal() const { return impl_->all_terminal(); }
const std::vector<InstanceState>& Simulation::instances() const { return impl_->instances; }
const std::vector<JobState>& Simulation::jobs() const { return impl_->jobs; }
const std::vector<EventLogEntry>& Simulation::event_log() const { return impl_->log; }
const std::vector<MetricsRow>& Simulation::metrics() const { return impl_->metrics; }
const std::vector<CounterSample>& Simulation::counter_samples() const { return impl_->samples; }
const BillingLedger& Simulation::ledger() const { return impl_->ledger; }
JobCounters Simulation::counters() const { return impl_->counts; }
const std::vector<std::pair<double, double>>& Simulation::waste_records() const { return impl_->waste; }

std::string summary_json(const SummaryReport& r) {
  nlohmann::ordered_json doc;
  doc["seed"] = r.seed;
  doc["makespan_s"] = r.makespan_s;
  doc["makespan_h"] = r.makespan_s / 3600.0;
  doc["total_cost"] = r.total_cost;
  doc["currency"] = r.currency;
  doc["productive_core_hours"] = r.productive_core_hours;
  doc["wasted_core_hours"] = r.wasted_core_hours;
  doc["fe_differences"] = r.fe_differences;
  doc["cost_per_ddg"] = r.cost_per_ddg;
  doc["jobs"] = {{"total", r.jobs_total}, {"completed", r.jobs_completed}, {"failed", r.jobs_failed}};
  doc["preemptions"] = r.preemptions;
  doc["resubmissions"] = r.resubmissions;
  doc["instances_acquired"] = r.instances_acquired;
  doc["peak_instances"] = r.peak_instances;
  doc["peak_vcpus"] = r.peak_vcpus;
  doc["peak_gpus"] = r.peak_gpus;
  auto& ledger = doc["ledger"];
  ledger["total"] = r.ledger.total;
  ledger["productive_core_seconds"] = r.ledger.productive_core_seconds;
  ledger["wasted_core_seconds"] = r.ledger.wasted_core_seconds;
  ledger["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : r.ledger.entries)
    ledger["entries"].push_back({{"instance", e.instance_id},
                                 {"type", e.type},
                                 {"region", e.region},
                                 {"duration_s", e.duration_s},
                                 {"rate_per_hour", e.rate_per_hour},
                                 {"cost", e.cost}});
  return doc.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "time_s,region,instance_type,active_instances,vcpus_in_use,gpus_in_use\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{}\n", r.time_s, r.region, r.instance_type, r.active_instances, r.vcpus_in_use,
                       r.gpus_in_use);
  return out;
}

std::string event_log_csv(const std::vector<EventLogEntry>& events) {
  std::string out = "time_s,seq,kind,job_id,instance_id\n";
  for (const auto& e : events)
    out += fmt::format("{},{},{},{},{}\n", e.time_s, e.seq, to_string(e.kind), e.job_id, e.instance_id);
  return out;
}

}  // namespace spotsim
