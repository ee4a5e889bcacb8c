#ifndef TIERSIM_CONTAINER_H_
#define TIERSIM_CONTAINER_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "tiersim/types.h"

namespace tiersim {

// Per-container tiering activity. Every field only ever increases.
struct TierCounters {
  std::uint64_t demoted = 0;
  std::uint64_t promoted = 0;
  std::uint64_t promotion_attempts = 0;
  std::uint64_t hint_faults = 0;
  std::uint64_t sync_demotions = 0;
  std::uint64_t cxl_fallback_allocs = 0;
  std::uint64_t thrash_events = 0;
  std::uint64_t freed = 0;

  friend bool operator==(const TierCounters&, const TierCounters&) = default;
};

// Cumulative access cost, used to derive achieved access throughput.
struct AccessStats {
  std::uint64_t accesses = 0;
  std::uint64_t local_accesses = 0;
  std::uint64_t access_time_ns = 0;
};

// Promotion-rate multiplier constrained to 2^-k.
class PromoMultiplier {
 public:
  int halvings() const { return halvings_; }
  double value() const { return std::ldexp(1.0, -halvings_); }
  bool Halve(int floor_halvings) {
    if (halvings_ >= floor_halvings) return false;
    ++halvings_;
    return true;
  }
  bool Double() {
    if (halvings_ == 0) return false;
    --halvings_;
    return true;
  }

 private:
  int halvings_ = 0;
};

struct Container {
  ContainerId id = 0;
  std::string name;
  PageCount lower_protection = 0;
  std::optional<PageCount> upper_bound;

  PageCount local_usage = 0;
  PageCount cxl_usage = 0;
  PageCount active_pages = 0;  // both tiers

  TierCounters counters;
  AccessStats access;
  PromoMultiplier promo_multiplier;
  bool throttled = false;
  bool steady_state = false;
  bool oom = false;

  PageCount usage() const { return local_usage + cxl_usage; }
  PageCount usage(Tier t) const { return t == Tier::kLocal ? local_usage : cxl_usage; }
};

}  // namespace tiersim

#endif  // TIERSIM_CONTAINER_H_
