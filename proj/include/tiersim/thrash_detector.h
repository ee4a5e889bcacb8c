#ifndef TIERSIM_THRASH_DETECTOR_H_
#define TIERSIM_THRASH_DETECTOR_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "tiersim/memory_manager.h"
#include "tiersim/rng.h"

namespace tiersim {

struct PromotionRecord {
  PageId page = kNoPage;
  Tick promote_time = 0;
};

struct ThrashState {
  std::uint64_t last_period_counter = 0;
  PageCount active_pages_prev = 0;
  std::uint64_t freed_prev = 0;
  int periods_observed = 0;
  bool has_prev = false;
};

enum class MultiplierChange : std::uint8_t { kNone, kHalved, kDoubled };

struct MultiplierDecision {
  ContainerId container = 0;
  double thrash_rate = 0.0;  // events per second over the last period
  bool steady = false;
  MultiplierChange change = MultiplierChange::kNone;
  double multiplier = 1.0;  // after the change
};

// Samples promotions into a fixed-size table and flags pages demoted again
// within t_resident as thrashing. At every period boundary it clears the
// table and halves (or doubles back) the promotion multiplier of each
// container based on its thrash rate.
class ThrashDetector {
 public:
  ThrashDetector(MemoryManager& memory, Rng& rng, bool mitigation_enabled);

  static std::uint64_t SlotHash(PageId page);
  std::size_t SlotOf(PageId page) const;

  void RecordPromotion(PageId page, Tick tick);
  bool ObserveDemotion(PageId page, Tick tick);
  std::vector<MultiplierDecision> PeriodicUpdate(Tick tick);
  bool IsSteadyState(ContainerId id, Tick tick);

  std::optional<PromotionRecord> RecordAt(std::size_t slot) const;
  std::size_t occupied() const;
  const ThrashState& state(ContainerId id) const { return states_.at(id); }
  bool mitigation_enabled() const { return mitigation_enabled_; }

 private:
  double period_seconds() const;

  MemoryManager& memory_;
  Rng& rng_;
  bool mitigation_enabled_;
  std::vector<PromotionRecord> table_;
  std::vector<ThrashState> states_;
};

}  // namespace tiersim

#endif  // TIERSIM_THRASH_DETECTOR_H_
