#include "tiersim/promotion.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tiersim {

double PromotionThrottleFactor(PageCount n_cgroup, PageCount n_protection) {
  if (n_cgroup == 0 || n_cgroup <= n_protection) return 1.0;
  const double share = static_cast<double>(n_protection) / static_cast<double>(n_cgroup);
  const double s2 = share * share;
  return std::max(s2 * s2, kMinThrottleFactor);
}

PageCount PromotionScanSize(PageCount p_base, bool throttled, PageCount n_cgroup,
                            PageCount n_protection, double multiplier) {
  const double factor = throttled ? PromotionThrottleFactor(n_cgroup, n_protection) : 1.0;
  return static_cast<PageCount>(std::floor(static_cast<double>(p_base) * factor * multiplier));
}

PromotionEngine::PromotionEngine(MemoryManager& memory, DemotionEngine& demotion,
                                 ThrashDetector* detector, PolicyConfig policy)
    : memory_(memory), demotion_(demotion), detector_(detector), policy_(std::move(policy)) {}

bool PromotionEngine::EvaluateThrottle(ContainerId id, WatermarkState watermark) {
  Container& c = memory_.container(id);
  bool throttled = false;
  if (policy_.throttle_promotion) {
    const bool over_protection_under_pressure =
        c.local_usage > c.lower_protection && watermark != WatermarkState::kAboveHigh;
    throttled = over_protection_under_pressure || demotion_.NearUpperBound(c);
  }
  c.throttled = throttled;
  return throttled;
}

PageCount PromotionEngine::BaseScan(ContainerId id) const {
  const Container& c = memory_.container(id);
  return static_cast<PageCount>(
      std::ceil(memory_.config().p_base_fraction * static_cast<double>(c.cxl_usage)));
}

PromotionBudget PromotionEngine::Budget(ContainerId id) const {
  const Container& c = memory_.container(id);
  PromotionBudget b;
  b.p_base = BaseScan(id);
  b.throttle_factor =
      c.throttled ? PromotionThrottleFactor(c.local_usage, c.lower_protection) : 1.0;
  b.multiplier = c.promo_multiplier.value();
  b.effective_scan = PromotionScanSize(b.p_base, c.throttled, c.local_usage,
                                       c.lower_protection, b.multiplier);
  return b;
}

std::vector<PageId> PromotionEngine::CollectCandidates(ContainerId id, PageCount budget,
                                                       Tick /*tick*/) {
  std::vector<PageId> out;
  if (budget == 0) return out;
  const LruList& active = memory_.lru(id, Tier::kCxl, true);
  for (PageId pid = active.head(); pid != kNoPage && out.size() < budget;
       pid = memory_.page(pid).next) {
    if (memory_.page(pid).candidate) out.push_back(pid);
  }
  memory_.container(id).counters.promotion_attempts += out.size();
  return out;
}

bool PromotionEngine::HasLocalRoom() const {
  if (policy_.promotion_gate == PromotionGate::kAboveHigh) {
    return memory_.watermark_state() == WatermarkState::kAboveHigh;
  }
  return memory_.free_pages(Tier::kLocal) > 0;
}

PromotionResult PromotionEngine::Run(Tick tick) {
  PromotionResult result;
  const WatermarkState watermark = memory_.watermark_state();
  auto containers = memory_.containers();
  for (const Container& c : containers) EvaluateThrottle(c.id, watermark);

  // Containers furthest below their protection get free frames first.
  std::vector<ContainerId> order(containers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](ContainerId a, ContainerId b) {
    return OverageRatio(memory_.container(a)) < OverageRatio(memory_.container(b));
  });

  const PageCount cap = memory_.config().migration_cap_per_tick;
  for (ContainerId id : order) {
    const PromotionBudget budget = Budget(id);
    const std::vector<PageId> candidates = CollectCandidates(id, budget.effective_scan, tick);
    Container& c = memory_.container(id);
    for (PageId pid : candidates) {
      if (cap != 0 && memory_.stats().migrations_this_tick >= cap) {
        ++result.skipped;
        continue;
      }
      if (c.upper_bound && c.local_usage >= *c.upper_bound) {
        demotion_.EnforceUpperBound(id, 1, tick);
        if (c.local_usage >= *c.upper_bound) {
          ++result.skipped;
          continue;
        }
      }
      if (!HasLocalRoom()) {
        ++result.skipped;
        continue;
      }
      if (memory_.Migrate(pid, Tier::kLocal, tick) != Status::kOk) {
        ++result.skipped;
        continue;
      }
      ++result.promoted;
      if (detector_ != nullptr) detector_->RecordPromotion(pid, tick);
    }
  }
  return result;
}

}  // namespace tiersim
