#include "tiersim/memory_manager.h"

#include <algorithm>
#include <sstream>

namespace tiersim {

namespace {

std::string NotOwnerMessage(ContainerId container, PageId page) {
  std::ostringstream os;
  os << "page " << page << " is not owned by container " << container;
  return os.str();
}

}  // namespace

NotOwner::NotOwner(ContainerId container, PageId page)
    : std::logic_error(NotOwnerMessage(container, page)) {}

MemoryManager::MemoryManager(const MachineConfig& config,
                             std::span<const ContainerSpec> containers)
    : config_(config),
      pages_(config.local_capacity + config.cxl_capacity),
      lists_(containers.size()) {
  containers_.reserve(containers.size());
  for (std::size_t i = 0; i < containers.size(); ++i) {
    Container c;
    c.id = static_cast<ContainerId>(i);
    c.name = containers[i].name;
    c.lower_protection = containers[i].lower_protection;
    c.upper_bound = containers[i].upper_bound;
    containers_.push_back(std::move(c));
  }
  free_ids_.resize(pages_.size());
  // Popped from the back, so page 0 is handed out first.
  for (std::size_t i = 0; i < free_ids_.size(); ++i) {
    free_ids_[i] = static_cast<PageId>(free_ids_.size() - 1 - i);
  }
}

PageCount MemoryManager::free_pages(Tier tier) const {
  const PageCount cap =
      tier == Tier::kLocal ? config_.local_capacity : config_.cxl_capacity;
  return cap - used_[static_cast<std::size_t>(tier)];
}

WatermarkState MemoryManager::ClassifyWatermark(PageCount free, PageCount low,
                                                PageCount high) {
  if (free > high) return WatermarkState::kAboveHigh;
  if (free < low) return WatermarkState::kBelowLow;
  return WatermarkState::kBelowHigh;
}

WatermarkState MemoryManager::watermark_state() const {
  return ClassifyWatermark(free_pages(Tier::kLocal), config_.low_watermark,
                           config_.high_watermark);
}

void MemoryManager::Place(ContainerId owner, Tier tier, Tick tick,
                          std::vector<PageId>& out) {
  const PageId id = free_ids_.back();
  free_ids_.pop_back();
  Page& p = pages_[id];
  p = Page{};
  p.owner = owner;
  p.tier = tier;
  p.allocated = true;
  p.active = true;
  p.last_access = tick;
  MutableList(owner, tier, true).PushHead(pages_, id);
  ++used_[static_cast<std::size_t>(tier)];
  Container& c = containers_[owner];
  (tier == Tier::kLocal ? c.local_usage : c.cxl_usage) += 1;
  ++c.active_pages;
  out.push_back(id);
}

AllocationResult MemoryManager::Allocate(ContainerId id, PageCount n, Tick tick) {
  AllocationResult result;
  Container& c = containers_.at(id);
  if (n == 0) return result;

  const PageCount low = config_.low_watermark;
  const PageCount free_before = free_pages(Tier::kLocal);
  PageCount sync_freed = 0;
  if (c.upper_bound && reclaimer_ != nullptr && c.local_usage > 0) {
    const PageCount wanted = std::min(n, *c.upper_bound);
    if (c.local_usage + wanted > *c.upper_bound) {
      sync_freed = reclaimer_->EnforceUpperBound(id, wanted, tick);
    }
  }

  PageCount local_room = free_before > low ? free_before - low : 0;
  // Frames released by synchronous demotion are usable regardless of the
  // watermark.
  local_room = std::min(local_room + sync_freed, free_pages(Tier::kLocal));
  if (c.upper_bound) {
    const PageCount bound_room =
        *c.upper_bound > c.local_usage ? *c.upper_bound - c.local_usage : 0;
    local_room = std::min(local_room, bound_room);
  }
  const PageCount n_local = std::min(n, local_room);
  const PageCount n_cxl = n - n_local;
  if (n_cxl > free_pages(Tier::kCxl)) {
    ++stats_.oom_events;
    c.oom = true;
    result.status = Status::kOutOfMemory;
    return result;
  }

  result.pages.reserve(n);
  for (PageCount i = 0; i < n_local; ++i) Place(id, Tier::kLocal, tick, result.pages);
  for (PageCount i = 0; i < n_cxl; ++i) Place(id, Tier::kCxl, tick, result.pages);
  c.counters.cxl_fallback_allocs += n_cxl;
  result.local = n_local;
  result.cxl = n_cxl;
  return result;
}

void MemoryManager::Unlink(PageId id) {
  const Page& p = pages_[id];
  MutableList(p.owner, p.tier, p.active).Remove(pages_, id);
}

void MemoryManager::Free(ContainerId id, std::span<const PageId> pages) {
  for (PageId pid : pages) {
    if (pid >= pages_.size() || !pages_[pid].allocated || pages_[pid].owner != id) {
      throw NotOwner(id, pid);
    }
  }
  Container& c = containers_.at(id);
  for (PageId pid : pages) {
    Page& p = pages_[pid];
    Unlink(pid);
    --used_[static_cast<std::size_t>(p.tier)];
    (p.tier == Tier::kLocal ? c.local_usage : c.cxl_usage) -= 1;
    if (p.active) --c.active_pages;
    p = Page{};
    free_ids_.push_back(pid);
  }
  c.counters.freed += pages.size();
}

AccessResult MemoryManager::RecordAccess(ContainerId id, PageId pid, Tick tick) {
  if (pid >= pages_.size() || !pages_[pid].allocated || pages_[pid].owner != id) {
    throw NotOwner(id, pid);
  }
  Page& p = pages_[pid];
  Container& c = containers_[id];
  AccessResult result;
  const bool within =
      p.last_touch != kNever && tick - p.last_touch <= config_.hint_window;

  Unlink(pid);
  if (!p.active && within) {
    p.active = true;
    ++c.active_pages;
  }
  MutableList(id, p.tier, p.active).PushHead(pages_, pid);

  if (p.tier == Tier::kCxl && within) {
    result.hint_fault = true;
    result.became_candidate = !p.candidate;
    p.candidate = true;
    ++c.counters.hint_faults;
  }
  p.last_touch = tick;
  p.last_access = tick;
  return result;
}

Status MemoryManager::Migrate(PageId pid, Tier dest, Tick tick) {
  Page& p = pages_.at(pid);
  if (!p.allocated || p.tier == dest) {
    throw std::logic_error("migrate: page not allocated or already on destination tier");
  }
  if (free_pages(dest) == 0) return Status::kDestinationFull;

  Container& c = containers_[p.owner];
  Unlink(pid);
  --used_[static_cast<std::size_t>(p.tier)];
  ++used_[static_cast<std::size_t>(dest)];
  if (dest == Tier::kCxl) {
    --c.local_usage;
    ++c.cxl_usage;
    if (p.active) --c.active_pages;
    p.active = false;
    ++c.counters.demoted;
    ++stats_.demoted;
  } else {
    --c.cxl_usage;
    ++c.local_usage;
    if (!p.active) ++c.active_pages;
    p.active = true;
    ++c.counters.promoted;
    ++stats_.promoted;
  }
  p.tier = dest;
  p.candidate = false;
  p.last_touch = kNever;
  MutableList(p.owner, dest, p.active).PushHead(pages_, pid);
  ++stats_.migrations;
  ++stats_.migrations_this_tick;
  if (migration_observer_) migration_observer_(pid, dest, tick);
  return Status::kOk;
}

void MemoryManager::Deactivate(PageId pid) {
  Page& p = pages_.at(pid);
  if (!p.allocated || !p.active) return;
  Unlink(pid);
  p.active = false;
  p.candidate = false;
  --containers_[p.owner].active_pages;
  MutableList(p.owner, p.tier, false).PushHead(pages_, pid);
}

void MemoryManager::AgeLrus(Tick tick) {
  const Tick cutoff = tick - config_.aging_horizon;
  std::vector<PageId> expired;
  for (ContainerId id = 0; id < containers_.size(); ++id) {
    for (Tier tier : {Tier::kLocal, Tier::kCxl}) {
      LruList& active = MutableList(id, tier, true);
      LruList& inactive = MutableList(id, tier, false);
      expired.clear();
      while (!active.empty() && pages_[active.tail()].last_access < cutoff) {
        const PageId pid = active.tail();
        active.Remove(pages_, pid);
        expired.push_back(pid);
      }
      // expired is oldest-first; append newest-first so the oldest ends at
      // the tail.
      for (auto it = expired.rbegin(); it != expired.rend(); ++it) {
        Page& p = pages_[*it];
        p.active = false;
        p.candidate = false;
        inactive.PushTail(pages_, *it);
      }
      containers_[id].active_pages -= expired.size();
    }
  }
}

void MemoryManager::BeginTick() {
  stats_.migrations_last_tick = stats_.migrations_this_tick;
  stats_.migrations_this_tick = 0;
}

std::string MemoryManager::CheckInvariants() const {
  std::ostringstream os;
  PageCount local_sum = 0;
  PageCount cxl_sum = 0;
  for (const Container& c : containers_) {
    local_sum += c.local_usage;
    cxl_sum += c.cxl_usage;
    if (lru_size(c.id, Tier::kLocal) != c.local_usage) {
      os << c.name << ": local lists " << lru_size(c.id, Tier::kLocal)
         << " != local usage " << c.local_usage;
      return os.str();
    }
    if (lru_size(c.id, Tier::kCxl) != c.cxl_usage) {
      os << c.name << ": cxl lists != cxl usage";
      return os.str();
    }
    const PageCount active = lru(c.id, Tier::kLocal, true).size() + lru(c.id, Tier::kCxl, true).size();
    if (active != c.active_pages) {
      os << c.name << ": active count drift";
      return os.str();
    }
    if (c.counters.promoted > c.counters.promotion_attempts) {
      os << c.name << ": promoted exceeds promotion attempts";
      return os.str();
    }
  }
  if (local_sum + free_pages(Tier::kLocal) != config_.local_capacity) {
    return "local tier conservation violated";
  }
  if (cxl_sum + free_pages(Tier::kCxl) != config_.cxl_capacity) {
    return "cxl tier conservation violated";
  }
  PageCount owned = 0;
  for (const Page& p : pages_) {
    if (!p.allocated) continue;
    ++owned;
    if (p.candidate && (p.tier != Tier::kCxl || !p.active)) {
      return "candidate page off the CXL active list";
    }
  }
  if (owned != local_sum + cxl_sum) return "page ownership count mismatch";
  return {};
}

}  // namespace tiersim
