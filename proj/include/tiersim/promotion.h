#ifndef TIERSIM_PROMOTION_H_
#define TIERSIM_PROMOTION_H_

#include <vector>

#include "tiersim/demotion.h"
#include "tiersim/memory_manager.h"
#include "tiersim/thrash_detector.h"

namespace tiersim {

inline constexpr double kMinThrottleFactor = 1.0 / 16.0;

// max((n_protection / n_cgroup)^4, 1/16), capped at 1.
double PromotionThrottleFactor(PageCount n_cgroup, PageCount n_protection);

// floor(p_base * factor * multiplier), factor = 1 when not throttled.
PageCount PromotionScanSize(PageCount p_base, bool throttled, PageCount n_cgroup,
                            PageCount n_protection, double multiplier);

struct PromotionBudget {
  PageCount p_base = 0;
  double throttle_factor = 1.0;
  double multiplier = 1.0;
  PageCount effective_scan = 0;
};

struct PromotionResult {
  PageCount promoted = 0;
  PageCount skipped = 0;
};

class PromotionEngine {
 public:
  PromotionEngine(MemoryManager& memory, DemotionEngine& demotion, ThrashDetector* detector,
                  PolicyConfig policy);

  // Throttled when over protection while local memory is not above the high
  // watermark, or when within the upper-bound headroom. Sets the flag.
  bool EvaluateThrottle(ContainerId id, WatermarkState watermark);

  // Unthrottled scan size: p_base_fraction of the container's CXL pages.
  PageCount BaseScan(ContainerId id) const;
  PromotionBudget Budget(ContainerId id) const;

  // Up to `budget` candidate pages, most recently touched first. Counts
  // each returned page as a promotion attempt.
  std::vector<PageId> CollectCandidates(ContainerId id, PageCount budget, Tick tick);

  PromotionResult Run(Tick tick);

 private:
  bool HasLocalRoom() const;

  MemoryManager& memory_;
  DemotionEngine& demotion_;
  ThrashDetector* detector_;
  PolicyConfig policy_;
};

}  // namespace tiersim

#endif  // TIERSIM_PROMOTION_H_
