#include <doctest.h>

#include "invariant_check.h"
#include "test_util.h"

using namespace tiersim;
using tiersim::testing::InvariantReport;

TEST_CASE("fixture runs satisfy every invariant and replay identically") {
  for (const std::string& file : tiersim::testing::FixtureFiles()) {
    {
      CAPTURE(file);
      const InvariantReport r =
          tiersim::testing::CheckScenarioInvariants(tiersim::testing::LoadFixture(file));
      CHECK(r.first_broken == "");
      CHECK(r.conservation == 0);
      CHECK(r.counter_regressions == 0);
      CHECK(r.exemption == 0);
      CHECK(r.upper_bound == 0);
      CHECK(r.fight == 0);
      CHECK(r.trajectory == 0);
      CHECK(r.hint_faults == 0);
      CHECK(r.candidates == 0);
      CHECK(r.determinism == 0);
    }
  }
}

TEST_CASE("demotion never touches exempt containers") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    MachineConfig m = tiersim::testing::SmallMachine(1000, 2000, 40, 80);
    std::vector<ContainerSpec> specs;
    const int count = 2 + static_cast<int>(rng.Below(3));
    for (int i = 0; i < count; ++i) {
      specs.push_back(tiersim::testing::Idle("c" + std::to_string(i), rng.Below(1000 / count)));
    }
    MemoryManager mm(m, specs);
    DemotionEngine de(mm, PolicyConfig{});
    for (int i = 0; i < count; ++i) mm.Allocate(i, 50 + rng.Below(400), 0);
    std::vector<PageCount> before;
    for (const Container& c : mm.containers()) before.push_back(c.local_usage);
    const DemotionPlan plan = de.BuildPlan(1);
    de.RunBackground(plan, 1);
    for (const DemotionPlanEntry& e : plan.entries) {
      const Container& c = mm.container(e.container);
      CHECK(e.exempt == (before[e.container] <= c.lower_protection));
      if (e.exempt) {
        CHECK(e.d_scan == 0);
        CHECK(c.counters.demoted == 0);
      } else {
        CHECK(c.local_usage >= c.lower_protection);
      }
    }
    CHECK(mm.CheckInvariants() == "");
  }
}

TEST_CASE("acting demotion plans always come with throttled promotion") {
  Rng rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    MachineConfig m = tiersim::testing::SmallMachine(1000, 2000, 40, 80);
    std::vector<ContainerSpec> specs;
    for (int i = 0; i < 3; ++i) {
      const PageCount prot = rng.Below(300);
      std::optional<PageCount> bound;
      if (rng.Below(2) == 0) bound = prot + 50 + rng.Below(400);
      specs.push_back(tiersim::testing::Idle("c" + std::to_string(i), prot, bound));
    }
    MemoryManager mm(m, specs);
    DemotionEngine de(mm, PolicyConfig{});
    PromotionEngine pe(mm, de, nullptr, PolicyConfig{});
    mm.set_sync_reclaimer(&de);
    for (int i = 0; i < 3; ++i) mm.Allocate(i, 100 + rng.Below(400), 0);
    if (!de.Triggered()) continue;
    const DemotionPlan plan = de.BuildPlan(1);
    for (const DemotionPlanEntry& e : plan.entries) {
      if (e.exempt || e.d_scan == 0) continue;
      if (!plan.under_pressure && e.bound_scan == 0) continue;
      CHECK(pe.EvaluateThrottle(e.container, mm.watermark_state()));
    }
  }
}
