#ifndef TIERSIM_SIMULATOR_H_
#define TIERSIM_SIMULATOR_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiersim/demotion.h"
#include "tiersim/memory_manager.h"
#include "tiersim/metrics.h"
#include "tiersim/promotion.h"
#include "tiersim/rng.h"
#include "tiersim/scenario.h"
#include "tiersim/thrash_detector.h"
#include "tiersim/workload.h"

namespace tiersim {

struct ContainerSummary {
  std::string name;
  PageCount local_pages = 0;
  PageCount cxl_pages = 0;
  TierCounters counters;
  AccessStats access;
  double promo_multiplier = 1.0;
  bool oom = false;
};

struct RunSummary {
  Tick ticks = 0;
  std::vector<ContainerSummary> containers;
  std::uint64_t demoted = 0;
  std::uint64_t promoted = 0;
  std::uint64_t migrations = 0;
  std::uint64_t oom_events = 0;
  std::uint64_t cxl_full_events = 0;
};

nlohmann::json ToJson(const RunSummary& summary);

// A multiplier change made at a detector period boundary.
struct MultiplierEvent {
  Tick tick = 0;
  MultiplierDecision decision;
};

// Optional callbacks observing the page-level trace of a run.
struct TraceHooks {
  std::function<void(ContainerId, std::span<const PageId>, Tick)> on_allocate;
  std::function<void(ContainerId, PageId, Tick, const AccessResult&)> on_access;
  std::function<void(PageId, Tier, Tick)> on_migrate;
};

// Master tick loop. Every tick runs, in this order:
//   1. workload ops (allocate, access, free) for each container in id order
//   2. LRU aging
//   3. promotion, when tick % promo_scan_interval == 0
//   4. background demotion, when tick % demote_scan_interval == 0 and triggered
//   5. thrash-detector update, when (tick + 1) % detector_period == 0
//   6. snapshot labelled tick + 1, when (tick + 1) % snapshot_interval == 0
// Run() adds a final snapshot if the last tick was not on the cadence.
class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Executes one tick. No-op once the duration is reached.
  void Step();
  // Runs the remaining ticks and returns the summary.
  RunSummary Run();

  Tick tick() const { return tick_; }
  bool done() const { return tick_ >= scenario_.duration; }

  const Scenario& scenario() const { return scenario_; }
  MemoryManager& memory() { return *memory_; }
  const MemoryManager& memory() const { return *memory_; }
  DemotionEngine& demotion() { return *demotion_; }
  PromotionEngine& promotion() { return *promotion_; }
  ThrashDetector& detector() { return *detector_; }

  const std::vector<MetricsSnapshot>& snapshots() const { return snapshots_; }
  const std::vector<MultiplierEvent>& multiplier_events() const { return multiplier_events_; }
  // Page ids currently held by a container, in workload slot order.
  const std::vector<PageId>& slots(ContainerId id) const { return slots_.at(id); }

  void set_trace_hooks(TraceHooks hooks) { hooks_ = std::move(hooks); }

  RunSummary Summary() const;
  nlohmann::json RunHeader() const;
  void Export(const std::filesystem::path& destination, ExportFormat format) const;

 private:
  void RunWorkloads();
  void ApplyOp(ContainerId id, const WorkloadOp& op);
  void KillContainer(ContainerId id);
  void Snapshot(Tick label);

  Scenario scenario_;
  Rng rng_;
  std::unique_ptr<MemoryManager> memory_;
  std::unique_ptr<DemotionEngine> demotion_;
  std::unique_ptr<ThrashDetector> detector_;
  std::unique_ptr<PromotionEngine> promotion_;
  std::vector<WorkloadGenerator> generators_;
  std::vector<std::vector<PageId>> slots_;
  std::vector<WorkloadOp> ops_;
  std::vector<MetricsSnapshot> snapshots_;
  std::vector<MultiplierEvent> multiplier_events_;
  std::uint64_t migrations_at_last_snapshot_ = 0;
  Tick last_snapshot_ = -1;
  Tick tick_ = 0;
  TraceHooks hooks_;
};

}  // namespace tiersim

#endif  // TIERSIM_SIMULATOR_H_
