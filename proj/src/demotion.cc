#include "tiersim/demotion.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tiersim {

PageCount DemotionScanSize(PageCount n_lru, PageCount n_cgroup, PageCount n_protection) {
  if (n_cgroup == 0 || n_cgroup <= n_protection) return 0;
  const unsigned __int128 num =
      static_cast<unsigned __int128>(n_lru) * (n_cgroup - n_protection);
  return static_cast<PageCount>(num / n_cgroup);
}

PageCount UpperBoundHeadroom(const MachineConfig& config, PageCount upper_bound) {
  // The epsilon absorbs representation error in fractions like 0.02.
  return static_cast<PageCount>(
      std::floor(static_cast<double>(upper_bound) * config.bound_headroom_fraction + 1e-9));
}

double OverageRatio(const Container& c) {
  if (c.lower_protection == 0) {
    return c.local_usage == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(c.local_usage) / static_cast<double>(c.lower_protection);
}

const DemotionPlanEntry* DemotionPlan::find(ContainerId id) const {
  for (const auto& e : entries) {
    if (e.container == id) return &e;
  }
  return nullptr;
}

DemotionEngine::DemotionEngine(MemoryManager& memory, PolicyConfig policy)
    : memory_(memory), policy_(std::move(policy)) {}

bool DemotionEngine::NearUpperBound(const Container& c) const {
  if (!c.upper_bound) return false;
  const PageCount headroom = UpperBoundHeadroom(memory_.config(), *c.upper_bound);
  const PageCount start = *c.upper_bound > headroom ? *c.upper_bound - headroom : 0;
  return c.local_usage >= start;
}

bool DemotionEngine::Triggered() const {
  if (memory_.watermark_state() == WatermarkState::kBelowLow) return true;
  for (const Container& c : memory_.containers()) {
    if (NearUpperBound(c) && c.local_usage > c.lower_protection) return true;
  }
  return false;
}

DemotionPlan DemotionEngine::BuildPlan(Tick tick) const {
  DemotionPlan plan;
  plan.tick = tick;
  plan.under_pressure = memory_.watermark_state() == WatermarkState::kBelowLow;
  for (const Container& c : memory_.containers()) {
    DemotionPlanEntry e;
    e.container = c.id;
    e.overage_ratio = OverageRatio(c);
    e.exempt = c.local_usage <= c.lower_protection;
    if (!e.exempt) {
      if (plan.under_pressure) {
        e.pressure_scan = DemotionScanSize(memory_.lru_size(c.id, Tier::kLocal), c.local_usage,
                                           c.lower_protection);
      }
      if (NearUpperBound(c)) {
        const PageCount start = *c.upper_bound - UpperBoundHeadroom(memory_.config(), *c.upper_bound);
        e.bound_scan = c.local_usage - start;
      }
    }
    e.d_scan = e.pressure_scan + e.bound_scan;
    plan.entries.push_back(e);
  }
  std::stable_sort(plan.entries.begin(), plan.entries.end(),
                   [this](const DemotionPlanEntry& a, const DemotionPlanEntry& b) {
                     if (a.overage_ratio != b.overage_ratio) return a.overage_ratio > b.overage_ratio;
                     const Container& ca = memory_.container(a.container);
                     const Container& cb = memory_.container(b.container);
                     const PageCount oa = ca.local_usage - std::min(ca.local_usage, ca.lower_protection);
                     const PageCount ob = cb.local_usage - std::min(cb.local_usage, cb.lower_protection);
                     return oa > ob;
                   });
  return plan;
}

std::optional<PageId> DemotionEngine::LocalTail(ContainerId id) const {
  const LruList& inactive = memory_.lru(id, Tier::kLocal, false);
  if (!inactive.empty()) return inactive.tail();
  const LruList& active = memory_.lru(id, Tier::kLocal, true);
  if (!active.empty()) return active.tail();
  return std::nullopt;
}

DemotionResult DemotionEngine::RunBackground(const DemotionPlan& plan, Tick tick) {
  if (policy_.demotion_order == DemotionOrder::kGlobalLru) return RunGlobalLru(plan, tick);
  return RunByOverage(plan, tick);
}

DemotionResult DemotionEngine::RunByOverage(const DemotionPlan& plan, Tick tick) {
  DemotionResult result;
  for (const DemotionPlanEntry& e : plan.entries) {
    if (e.exempt || e.d_scan == 0) continue;
    for (PageCount scanned = 0; scanned < e.d_scan; ++scanned) {
      const bool bound_part = scanned < e.bound_scan;
      if (!bound_part && memory_.watermark_state() == WatermarkState::kAboveHigh) break;
      const auto victim = LocalTail(e.container);
      if (!victim) break;
      if (memory_.page(*victim).active) {
        memory_.Deactivate(*victim);
        ++result.aged;
        continue;
      }
      if (memory_.Migrate(*victim, Tier::kCxl, tick) != Status::kOk) {
        memory_.NoteCxlFull();
        result.status = Status::kCxlFull;
        return result;
      }
      ++result.demoted;
    }
  }
  return result;
}

DemotionResult DemotionEngine::RunGlobalLru(const DemotionPlan& plan, Tick tick) {
  DemotionResult result;
  std::vector<PageCount> budget(memory_.containers().size(), 0);
  for (const DemotionPlanEntry& e : plan.entries) {
    if (!e.exempt) budget[e.container] = e.d_scan;
  }
  while (memory_.watermark_state() != WatermarkState::kAboveHigh) {
    std::optional<PageId> victim;
    ContainerId owner = 0;
    for (ContainerId id = 0; id < budget.size(); ++id) {
      if (budget[id] == 0) continue;
      const auto tail = LocalTail(id);
      if (!tail) continue;
      if (!victim || memory_.page(*tail).last_access < memory_.page(*victim).last_access) {
        victim = tail;
        owner = id;
      }
    }
    if (!victim) break;
    --budget[owner];
    if (memory_.page(*victim).active) {
      memory_.Deactivate(*victim);
      ++result.aged;
      continue;
    }
    if (memory_.Migrate(*victim, Tier::kCxl, tick) != Status::kOk) {
      memory_.NoteCxlFull();
      result.status = Status::kCxlFull;
      return result;
    }
    ++result.demoted;
  }
  return result;
}

PageCount DemotionEngine::EnforceUpperBound(ContainerId id, PageCount requested, Tick tick) {
  Container& c = memory_.container(id);
  if (!c.upper_bound) return 0;
  const PageCount bound = *c.upper_bound;
  const MachineConfig& cfg = memory_.config();
  PageCount freed = 0;
  for (int attempt = 0; attempt < cfg.sync_retries; ++attempt) {
    if (c.local_usage + requested <= bound) break;
    const auto share = static_cast<PageCount>(
        static_cast<double>(memory_.lru_size(id, Tier::kLocal)) * cfg.sync_batch_fraction);
    const PageCount batch = std::min(std::max(requested, share), c.local_usage);
    if (batch == 0) break;
    for (PageCount k = 0; k < batch; ++k) {
      const auto victim = LocalTail(id);
      if (!victim) break;
      if (memory_.Migrate(*victim, Tier::kCxl, tick) != Status::kOk) {
        memory_.NoteCxlFull();
        return freed;
      }
      ++freed;
      ++c.counters.sync_demotions;
    }
  }
  return freed;
}

}  // namespace tiersim
