#ifndef TIERSIM_DEMOTION_H_
#define TIERSIM_DEMOTION_H_

#include <optional>
#include <vector>

#include "tiersim/config.h"
#include "tiersim/memory_manager.h"

namespace tiersim {

// Pages of a container's local LRU to consider for demotion:
//   floor(n_lru * (n_cgroup - n_protection) / n_cgroup), 0 when n_cgroup <= n_protection.
PageCount DemotionScanSize(PageCount n_lru, PageCount n_cgroup, PageCount n_protection);

// Distance below the upper bound at which background demotion and promotion
// throttling engage.
PageCount UpperBoundHeadroom(const MachineConfig& config, PageCount upper_bound);

// local_usage / lower_protection; +inf for unprotected containers holding pages.
double OverageRatio(const Container& c);

struct DemotionPlanEntry {
  ContainerId container = 0;
  bool exempt = true;  // local_usage <= lower_protection
  PageCount d_scan = 0;
  PageCount pressure_scan = 0;  // from local-memory pressure; stops at the high watermark
  PageCount bound_scan = 0;     // from approaching the upper bound; unconditional
  double overage_ratio = 0.0;
};

// Entries in execution order (descending overage ratio).
struct DemotionPlan {
  Tick tick = 0;
  bool under_pressure = false;
  std::vector<DemotionPlanEntry> entries;

  const DemotionPlanEntry* find(ContainerId id) const;
};

struct DemotionResult {
  Status status = Status::kOk;
  PageCount demoted = 0;
  PageCount aged = 0;
};

class DemotionEngine : public SyncReclaimer {
 public:
  DemotionEngine(MemoryManager& memory, PolicyConfig policy);

  // Background demotion runs when local memory is below the low watermark or
  // some container sits within its upper-bound headroom.
  bool Triggered() const;

  DemotionPlan BuildPlan(Tick tick) const;

  // Scans each targeted container's local LRU from the tail: inactive pages
  // are demoted, active ones deactivated. Pressure-driven scanning stops as
  // soon as free local memory rises above the high watermark. Returns
  // kCxlFull (abandoning the rest of the plan) if CXL cannot absorb a page.
  DemotionResult RunBackground(const DemotionPlan& plan, Tick tick);

  PageCount EnforceUpperBound(ContainerId id, PageCount requested, Tick tick) override;

  bool NearUpperBound(const Container& c) const;
  const PolicyConfig& policy() const { return policy_; }

 private:
  // Tail of the combined local LRU: inactive tail, else active tail.
  std::optional<PageId> LocalTail(ContainerId id) const;
  DemotionResult RunByOverage(const DemotionPlan& plan, Tick tick);
  DemotionResult RunGlobalLru(const DemotionPlan& plan, Tick tick);

  MemoryManager& memory_;
  PolicyConfig policy_;
};

}  // namespace tiersim

#endif  // TIERSIM_DEMOTION_H_
