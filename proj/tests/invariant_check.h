#ifndef TIERSIM_TESTS_INVARIANT_CHECK_H_
#define TIERSIM_TESTS_INVARIANT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>

#include "tiersim/simulator.h"

namespace tiersim::testing {

// Independent model of the two-touch filter, fed by the simulator's trace.
class FilterOracle {
 public:
  FilterOracle(Tick window, Tick horizon) : window_(window), horizon_(horizon) {}

  void Place(PageId p, Tick tick) {
    State& s = pages_[p];
    s = State{};
    s.last_access = tick;
  }
  void Migrate(PageId p, Tier dest) {
    State& s = pages_[p];
    s.on_cxl = dest == Tier::kCxl;
    s.last_touch = -1;
    s.faulted = false;
  }
  // Returns whether this access should be a hint fault.
  bool Access(PageId p, Tick tick) {
    State& s = pages_[p];
    if (tick - s.last_access >= horizon_ + 2) s.faulted = false;  // aged out in between
    const bool within = s.last_touch >= 0 && tick - s.last_touch <= window_;
    const bool fault = s.on_cxl && within;
    if (fault) s.faulted = true;
    s.last_touch = tick;
    s.last_access = tick;
    return fault;
  }
  // Candidacy after aging at the end of tick `now`.
  bool Candidate(PageId p, Tick now) const {
    const auto it = pages_.find(p);
    if (it == pages_.end()) return false;
    const State& s = it->second;
    return s.on_cxl && s.faulted && now < s.last_access + horizon_ + 1;
  }

  void MarkCxl(PageId p) { pages_[p].on_cxl = true; }

 private:
  struct State {
    bool on_cxl = false;
    bool faulted = false;
    Tick last_touch = -1;
    Tick last_access = 0;
  };
  Tick window_;
  Tick horizon_;
  std::unordered_map<PageId, State> pages_;
};

inline std::string ExportText(const Simulator& sim) {
  std::ostringstream out;
  ExportTimeseries(sim.snapshots(), sim.RunHeader(), out, ExportFormat::kCsv);
  return out.str();
}

inline bool IsPowerOfTwoStep(double m, int floor_halvings) {
  const double k = -std::log2(m);
  return k >= 0 && k <= floor_halvings && std::abs(k - std::round(k)) < 1e-12;
}

struct InvariantReport {
  std::uint64_t conservation = 0;
  std::uint64_t counter_regressions = 0;
  std::uint64_t exemption = 0;
  std::uint64_t upper_bound = 0;
  std::uint64_t fight = 0;
  std::uint64_t trajectory = 0;
  std::uint64_t hint_faults = 0;
  std::uint64_t candidates = 0;
  std::uint64_t determinism = 0;
  std::string first_broken;  // first CheckInvariants failure
  std::string csv;

  std::uint64_t total() const {
    return conservation + counter_regressions + exemption + upper_bound + fight + trajectory +
           hint_faults + candidates + determinism + (first_broken.empty() ? 0 : 1);
  }
};

// Runs a scenario with per-tick property checks, then reruns it and compares
// exports byte for byte.
inline InvariantReport CheckScenarioInvariants(const Scenario& scenario) {
  InvariantReport rep;
  Simulator sim(scenario);
  const MachineConfig& cfg = sim.memory().config();
  const std::size_t n = scenario.containers.size();

  FilterOracle oracle(cfg.hint_window, cfg.aging_horizon);
  std::uint64_t oracle_faults = 0;
  TraceHooks hooks;
  hooks.on_allocate = [&](ContainerId, std::span<const PageId> pages, Tick t) {
    for (PageId p : pages) {
      oracle.Place(p, t);
      if (sim.memory().page(p).tier == Tier::kCxl) oracle.MarkCxl(p);
    }
  };
  hooks.on_migrate = [&](PageId p, Tier dest, Tick) { oracle.Migrate(p, dest); };
  hooks.on_access = [&](ContainerId, PageId p, Tick t, const AccessResult& r) {
    const bool want = oracle.Access(p, t);
    oracle_faults += want;
    if (want != r.hint_fault) ++rep.hint_faults;
  };
  sim.set_trace_hooks(std::move(hooks));

  std::vector<TierCounters> prev(n);
  std::vector<double> prev_mult(n, 1.0);

  while (!sim.done()) {
    const Tick t = sim.tick();
    std::vector<PageCount> local_before(n);
    for (ContainerId id = 0; id < n; ++id) local_before[id] = sim.memory().container(id).local_usage;
    sim.Step();
    const MemoryManager& mm = sim.memory();

    PageCount local_sum = 0;
    PageCount cxl_sum = 0;
    std::uint64_t demoted_sum = 0;
    std::uint64_t promoted_sum = 0;
    for (ContainerId id = 0; id < n; ++id) {
      const Container& c = mm.container(id);
      const TierCounters& k = c.counters;
      const TierCounters& p = prev[id];
      local_sum += c.local_usage;
      cxl_sum += c.cxl_usage;
      demoted_sum += k.demoted;
      promoted_sum += k.promoted;
      if (c.local_usage + c.cxl_usage != sim.slots(id).size()) ++rep.conservation;

      if (k.demoted < p.demoted || k.promoted < p.promoted ||
          k.promotion_attempts < p.promotion_attempts || k.hint_faults < p.hint_faults ||
          k.sync_demotions < p.sync_demotions || k.cxl_fallback_allocs < p.cxl_fallback_allocs ||
          k.thrash_events < p.thrash_events || k.freed < p.freed ||
          k.promoted > k.promotion_attempts) {
        ++rep.counter_regressions;
      }

      // Stayed under protection for the whole tick: no pressure demotions.
      if (local_before[id] <= c.lower_protection && c.local_usage < c.lower_protection &&
          scenario.policy.demotion_order == DemotionOrder::kOverageRatio) {
        if ((k.demoted - p.demoted) != (k.sync_demotions - p.sync_demotions)) ++rep.exemption;
      }

      if (c.upper_bound) {
        const PageCount batch = std::max<PageCount>(
            1, static_cast<PageCount>(cfg.sync_batch_fraction *
                                      static_cast<double>(std::max(c.local_usage, *c.upper_bound))));
        if (c.local_usage > *c.upper_bound + batch) ++rep.upper_bound;
      }

      const double m = c.promo_multiplier.value();
      if (!IsPowerOfTwoStep(m, cfg.multiplier_floor_halvings)) ++rep.trajectory;
      if (m != prev_mult[id]) {
        const bool boundary = (t + 1) % cfg.detector_period == 0;
        const bool one_step = m == prev_mult[id] * 2 || m == prev_mult[id] / 2;
        if (!boundary || !one_step) ++rep.trajectory;
      }
      prev_mult[id] = m;
      prev[id] = k;
    }
    if (local_sum + mm.free_pages(Tier::kLocal) != cfg.local_capacity ||
        cxl_sum + mm.free_pages(Tier::kCxl) != cfg.cxl_capacity ||
        demoted_sum != mm.stats().demoted || promoted_sum != mm.stats().promoted) {
      ++rep.conservation;
    }

    // Wherever the demotion plan would act on a container, promotion for it
    // must be throttled.
    if (scenario.policy.throttle_promotion && sim.demotion().Triggered()) {
      const DemotionPlan plan = sim.demotion().BuildPlan(sim.tick());
      for (const DemotionPlanEntry& e : plan.entries) {
        if (e.exempt || e.d_scan == 0) continue;
        if (!plan.under_pressure && e.bound_scan == 0) continue;
        Container& c = sim.memory().container(e.container);
        const bool saved = c.throttled;
        if (!sim.promotion().EvaluateThrottle(e.container, mm.watermark_state())) {
          ++rep.fight;
        }
        c.throttled = saved;
      }
    }

    if (sim.tick() % 25 == 0 || sim.done()) {
      const std::string broken = mm.CheckInvariants();
      if (!broken.empty() && rep.first_broken.empty()) {
        rep.first_broken = "tick " + std::to_string(sim.tick()) + ": " + broken;
      }
      for (ContainerId id = 0; id < n; ++id) {
        for (PageId p : sim.slots(id)) {
          if (mm.page(p).owner != id) ++rep.conservation;
          if (mm.page(p).candidate != oracle.Candidate(p, t)) ++rep.candidates;
        }
      }
    }
  }

  std::uint64_t faults = 0;
  for (const Container& c : sim.memory().containers()) faults += c.counters.hint_faults;
  if (faults != oracle_faults) ++rep.hint_faults;
  sim.Run();
  rep.csv = ExportText(sim);

  Simulator again(scenario);
  again.Run();
  if (ExportText(again) != rep.csv) ++rep.determinism;
  return rep;
}

}  // namespace tiersim::testing

#endif  // TIERSIM_TESTS_INVARIANT_CHECK_H_
