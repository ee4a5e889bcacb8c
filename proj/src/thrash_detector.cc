#include "tiersim/thrash_detector.h"

#include <algorithm>

namespace tiersim {

ThrashDetector::ThrashDetector(MemoryManager& memory, Rng& rng, bool mitigation_enabled)
    : memory_(memory),
      rng_(rng),
      mitigation_enabled_(mitigation_enabled),
      table_(memory.config().hash_table_slots),
      states_(memory.containers().size()) {}

std::uint64_t ThrashDetector::SlotHash(PageId page) {
  // splitmix64 finalizer
  std::uint64_t z = static_cast<std::uint64_t>(page) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t ThrashDetector::SlotOf(PageId page) const {
  return static_cast<std::size_t>(SlotHash(page) % table_.size());
}

double ThrashDetector::period_seconds() const {
  const MachineConfig& cfg = memory_.config();
  return static_cast<double>(cfg.detector_period) * cfg.tick_seconds();
}

void ThrashDetector::RecordPromotion(PageId page, Tick tick) {
  if (!rng_.Bernoulli(memory_.config().promo_sample_rate)) return;
  table_[SlotOf(page)] = PromotionRecord{page, tick};
}

bool ThrashDetector::ObserveDemotion(PageId page, Tick tick) {
  PromotionRecord& rec = table_[SlotOf(page)];
  if (rec.page != page) return false;
  const double resident_ms =
      static_cast<double>(tick - rec.promote_time) * memory_.config().tick_length_ms;
  if (resident_ms >= memory_.config().t_resident_ms) return false;
  rec = PromotionRecord{};
  ++memory_.container(memory_.page(page).owner).counters.thrash_events;
  return true;
}

bool ThrashDetector::IsSteadyState(ContainerId id, Tick /*tick*/) {
  Container& c = memory_.container(id);
  ThrashState& st = states_.at(id);
  const MachineConfig& cfg = memory_.config();
  if (!st.has_prev && c.usage() == 0) {
    c.steady_state = false;
    return false;
  }
  ++st.periods_observed;
  bool steady = false;
  if (st.has_prev && st.periods_observed > cfg.steady_grace_periods) {
    const PageCount active = c.active_pages;
    const PageCount delta = active > st.active_pages_prev ? active - st.active_pages_prev
                                                          : st.active_pages_prev - active;
    const bool active_ok =
        static_cast<double>(delta) <= cfg.steady_active_delta * static_cast<double>(active);
    const double free_rate =
        static_cast<double>(c.counters.freed - st.freed_prev) / period_seconds();
    steady = active_ok && free_rate <= cfg.steady_free_rate;
  }
  st.active_pages_prev = c.active_pages;
  st.freed_prev = c.counters.freed;
  st.has_prev = true;
  c.steady_state = steady;
  return steady;
}

std::vector<MultiplierDecision> ThrashDetector::PeriodicUpdate(Tick tick) {
  std::fill(table_.begin(), table_.end(), PromotionRecord{});
  const MachineConfig& cfg = memory_.config();
  std::vector<MultiplierDecision> decisions;
  decisions.reserve(states_.size());
  for (Container& c : memory_.containers()) {
    ThrashState& st = states_[c.id];
    MultiplierDecision d;
    d.container = c.id;
    d.steady = IsSteadyState(c.id, tick);
    d.thrash_rate =
        static_cast<double>(c.counters.thrash_events - st.last_period_counter) / period_seconds();
    st.last_period_counter = c.counters.thrash_events;
    if (mitigation_enabled_) {
      if (d.thrash_rate > cfg.r_thrashing) {
        if (d.steady && c.promo_multiplier.Halve(cfg.multiplier_floor_halvings)) {
          d.change = MultiplierChange::kHalved;
        }
      } else if (c.promo_multiplier.Double()) {
        d.change = MultiplierChange::kDoubled;
      }
    }
    d.multiplier = c.promo_multiplier.value();
    decisions.push_back(d);
  }
  return decisions;
}

std::optional<PromotionRecord> ThrashDetector::RecordAt(std::size_t slot) const {
  const PromotionRecord& r = table_.at(slot);
  if (r.page == kNoPage) return std::nullopt;
  return r;
}

std::size_t ThrashDetector::occupied() const {
  return static_cast<std::size_t>(std::count_if(
      table_.begin(), table_.end(), [](const PromotionRecord& r) { return r.page != kNoPage; }));
}

}  // namespace tiersim
