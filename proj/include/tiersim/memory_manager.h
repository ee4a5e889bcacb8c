#ifndef TIERSIM_MEMORY_MANAGER_H_
#define TIERSIM_MEMORY_MANAGER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiersim/config.h"
#include "tiersim/container.h"
#include "tiersim/lru.h"
#include "tiersim/types.h"

namespace tiersim {

class NotOwner : public std::logic_error {
 public:
  NotOwner(ContainerId container, PageId page);
};

// Synchronous upper-bound enforcement invoked on the allocation path.
class SyncReclaimer {
 public:
  virtual ~SyncReclaimer() = default;
  // Demotes `id`'s own local pages until `requested` more pages fit under its
  // upper bound or retries run out. Returns the number of pages demoted.
  virtual PageCount EnforceUpperBound(ContainerId id, PageCount requested, Tick tick) = 0;
};

struct AllocationResult {
  Status status = Status::kOk;
  std::vector<PageId> pages;  // local placements first
  PageCount local = 0;
  PageCount cxl = 0;
};

struct AccessResult {
  bool hint_fault = false;        // CXL page touched twice within the hint window
  bool became_candidate = false;  // first hint fault since placement
};

struct SystemStats {
  std::uint64_t demoted = 0;
  std::uint64_t promoted = 0;
  std::uint64_t migrations = 0;
  std::uint64_t oom_events = 0;
  std::uint64_t cxl_full_events = 0;
  std::uint64_t migrations_this_tick = 0;
  std::uint64_t migrations_last_tick = 0;
};

// Owns page placement, per-container LRU lists and tier accounting.
class MemoryManager {
 public:
  MemoryManager(const MachineConfig& config, std::span<const ContainerSpec> containers);

  MemoryManager(const MemoryManager&) = delete;
  MemoryManager& operator=(const MemoryManager&) = delete;

  const MachineConfig& config() const { return config_; }

  std::span<Container> containers() { return containers_; }
  std::span<const Container> containers() const { return containers_; }
  Container& container(ContainerId id) { return containers_.at(id); }
  const Container& container(ContainerId id) const { return containers_.at(id); }

  const Page& page(PageId id) const { return pages_.at(id); }
  PageCount page_table_size() const { return pages_.size(); }

  const LruList& lru(ContainerId id, Tier tier, bool active) const {
    return lists_.at(id)[ListIndex(tier, active)];
  }
  PageCount lru_size(ContainerId id, Tier tier) const {
    return lru(id, tier, true).size() + lru(id, tier, false).size();
  }

  PageCount free_pages(Tier tier) const;
  WatermarkState watermark_state() const;
  static WatermarkState ClassifyWatermark(PageCount free, PageCount low, PageCount high);

  void set_sync_reclaimer(SyncReclaimer* reclaimer) { reclaimer_ = reclaimer; }
  // Called after every migration with the destination tier.
  void set_migration_observer(std::function<void(PageId, Tier, Tick)> observer) {
    migration_observer_ = std::move(observer);
  }

  // Places n new pages for `id`. Pages land on local memory while free local
  // memory stays above the low watermark and the container's upper bound is
  // not reached; the rest fall back to CXL. All or nothing: if the CXL
  // remainder does not fit, nothing is allocated and kOutOfMemory returned.
  AllocationResult Allocate(ContainerId id, PageCount n, Tick tick);

  // Throws NotOwner (before changing anything) if any page is not owned by id.
  void Free(ContainerId id, std::span<const PageId> pages);

  AccessResult RecordAccess(ContainerId id, PageId page, Tick tick);

  // Moves a page to `dest` and charges the owner's demoted/promoted counter.
  // Demoted pages enter the CXL inactive head; promoted pages the local
  // active head.
  Status Migrate(PageId page, Tier dest, Tick tick);

  // Active -> inactive head. No-op for inactive pages.
  void Deactivate(PageId page);

  // Moves active pages whose last access is older than the aging horizon to
  // the inactive tail, oldest last.
  void AgeLrus(Tick tick);

  // Rolls the per-tick migration counter.
  void BeginTick();

  const SystemStats& stats() const { return stats_; }
  void NoteCxlFull() { ++stats_.cxl_full_events; }

  // Structural self-check; returns a description of the first violation.
  std::string CheckInvariants() const;

 private:
  static constexpr std::size_t ListIndex(Tier tier, bool active) {
    return static_cast<std::size_t>(tier) * 2 + (active ? 0 : 1);
  }
  LruList& MutableList(ContainerId id, Tier tier, bool active) {
    return lists_[id][ListIndex(tier, active)];
  }
  void Unlink(PageId id);
  void Place(ContainerId owner, Tier tier, Tick tick, std::vector<PageId>& out);

  MachineConfig config_;
  std::vector<Container> containers_;
  std::vector<Page> pages_;
  std::vector<std::array<LruList, 4>> lists_;
  std::vector<PageId> free_ids_;
  std::array<PageCount, 2> used_{0, 0};
  SyncReclaimer* reclaimer_ = nullptr;
  std::function<void(PageId, Tier, Tick)> migration_observer_;
  SystemStats stats_;
};

}  // namespace tiersim

#endif  // TIERSIM_MEMORY_MANAGER_H_
