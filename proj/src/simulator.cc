#include "tiersim/simulator.h"

#include <algorithm>
#include <cmath>

namespace tiersim {

nlohmann::json ToJson(const RunSummary& s) {
  nlohmann::json containers = nlohmann::json::array();
  for (const ContainerSummary& c : s.containers) {
    containers.push_back({
        {"name", c.name},
        {"local_pages", c.local_pages},
        {"cxl_pages", c.cxl_pages},
        {"demoted", c.counters.demoted},
        {"promoted", c.counters.promoted},
        {"promotion_attempts", c.counters.promotion_attempts},
        {"hint_faults", c.counters.hint_faults},
        {"thrash_events", c.counters.thrash_events},
        {"sync_demotions", c.counters.sync_demotions},
        {"cxl_fallback_allocs", c.counters.cxl_fallback_allocs},
        {"freed", c.counters.freed},
        {"accesses", c.access.accesses},
        {"local_accesses", c.access.local_accesses},
        {"access_time_ns", c.access.access_time_ns},
        {"promo_multiplier", c.promo_multiplier},
        {"oom", c.oom},
    });
  }
  return {
      {"ticks", s.ticks},
      {"demoted", s.demoted},
      {"promoted", s.promoted},
      {"migrations", s.migrations},
      {"oom_events", s.oom_events},
      {"cxl_full_events", s.cxl_full_events},
      {"containers", std::move(containers)},
  };
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)), rng_(scenario_.machine.rng_seed) {
  ApplyCapacityDefaults(scenario_.machine);
  auto violations = FindScenarioViolations(scenario_);
  if (!violations.empty()) throw InvalidConfig(std::move(violations));

  memory_ = std::make_unique<MemoryManager>(scenario_.machine, scenario_.containers);
  demotion_ = std::make_unique<DemotionEngine>(*memory_, scenario_.policy);
  detector_ = std::make_unique<ThrashDetector>(*memory_, rng_, scenario_.policy.thrash_mitigation);
  promotion_ =
      std::make_unique<PromotionEngine>(*memory_, *demotion_, detector_.get(), scenario_.policy);
  memory_->set_sync_reclaimer(demotion_.get());
  memory_->set_migration_observer([this](PageId page, Tier dest, Tick tick) {
    if (dest == Tier::kCxl) detector_->ObserveDemotion(page, tick);
    if (hooks_.on_migrate) hooks_.on_migrate(page, dest, tick);
  });

  generators_.reserve(scenario_.containers.size());
  for (const ContainerSpec& c : scenario_.containers) {
    generators_.emplace_back(c.workload, scenario_.machine.tick_length_ms);
  }
  slots_.resize(scenario_.containers.size());
}

void Simulator::KillContainer(ContainerId id) {
  generators_[id].Terminate();
  std::vector<PageId>& held = slots_[id];
  if (!held.empty()) memory_->Free(id, held);
  held.clear();
}

void Simulator::ApplyOp(ContainerId id, const WorkloadOp& op) {
  std::vector<PageId>& held = slots_[id];
  switch (op.kind) {
    case WorkloadOp::Kind::kAllocate: {
      AllocationResult r = memory_->Allocate(id, op.value, tick_);
      if (r.status == Status::kOutOfMemory) {
        KillContainer(id);
        return;
      }
      held.insert(held.end(), r.pages.begin(), r.pages.end());
      if (hooks_.on_allocate) hooks_.on_allocate(id, r.pages, tick_);
      return;
    }
    case WorkloadOp::Kind::kAccess: {
      if (op.value >= held.size()) return;
      const PageId page = held[op.value];
      const bool local = memory_->page(page).tier == Tier::kLocal;
      const AccessResult hit = memory_->RecordAccess(id, page, tick_);
      if (hooks_.on_access) hooks_.on_access(id, page, tick_, hit);
      const MachineConfig& cfg = memory_->config();
      double latency = local ? cfg.local_latency_ns : cfg.cxl_latency_ns;
      if (cfg.migration_bandwidth > 0) {
        const double load = static_cast<double>(memory_->stats().migrations_last_tick) /
                            static_cast<double>(cfg.migration_bandwidth);
        latency *= 1.0 + std::min(1.0, load);
      }
      AccessStats& a = memory_->container(id).access;
      ++a.accesses;
      if (local) ++a.local_accesses;
      a.access_time_ns += static_cast<std::uint64_t>(std::llround(latency));
      return;
    }
    case WorkloadOp::Kind::kFree: {
      const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(op.value, held.size()));
      const std::span<const PageId> tail(held.data() + held.size() - n, n);
      memory_->Free(id, tail);
      held.resize(held.size() - n);
      return;
    }
  }
}

void Simulator::RunWorkloads() {
  for (ContainerId id = 0; id < generators_.size(); ++id) {
    ops_.clear();
    generators_[id].NextOps(tick_, rng_, ops_);
    for (const WorkloadOp& op : ops_) {
      if (generators_[id].terminated()) break;
      ApplyOp(id, op);
    }
  }
}

void Simulator::Snapshot(Tick label) {
  const std::uint64_t migrations = memory_->stats().migrations;
  snapshots_.push_back(TakeSnapshot(*memory_, label, migrations - migrations_at_last_snapshot_));
  migrations_at_last_snapshot_ = migrations;
  last_snapshot_ = label;
}

void Simulator::Step() {
  if (done()) return;
  const MachineConfig& cfg = memory_->config();
  memory_->BeginTick();

  RunWorkloads();
  memory_->AgeLrus(tick_);
  if (tick_ % cfg.promo_scan_interval == 0) promotion_->Run(tick_);
  if (tick_ % cfg.demote_scan_interval == 0 && demotion_->Triggered()) {
    demotion_->RunBackground(demotion_->BuildPlan(tick_), tick_);
  }
  if ((tick_ + 1) % cfg.detector_period == 0) {
    for (const MultiplierDecision& d : detector_->PeriodicUpdate(tick_)) {
      if (d.change != MultiplierChange::kNone) multiplier_events_.push_back({tick_, d});
    }
  }
  ++tick_;
  if (tick_ % scenario_.snapshot_interval == 0) Snapshot(tick_);
}

RunSummary Simulator::Run() {
  while (!done()) Step();
  if (last_snapshot_ != tick_) Snapshot(tick_);
  return Summary();
}

RunSummary Simulator::Summary() const {
  RunSummary s;
  s.ticks = tick_;
  for (const Container& c : memory_->containers()) {
    ContainerSummary cs;
    cs.name = c.name;
    cs.local_pages = c.local_usage;
    cs.cxl_pages = c.cxl_usage;
    cs.counters = c.counters;
    cs.access = c.access;
    cs.promo_multiplier = c.promo_multiplier.value();
    cs.oom = c.oom;
    s.containers.push_back(std::move(cs));
  }
  const SystemStats& st = memory_->stats();
  s.demoted = st.demoted;
  s.promoted = st.promoted;
  s.migrations = st.migrations;
  s.oom_events = st.oom_events;
  s.cxl_full_events = st.cxl_full_events;
  return s;
}

nlohmann::json Simulator::RunHeader() const {
  return ScenarioToJson(scenario_);
}

void Simulator::Export(const std::filesystem::path& destination, ExportFormat format) const {
  ExportTimeseries(snapshots_, RunHeader(), destination, format);
}

}  // namespace tiersim
