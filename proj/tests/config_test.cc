#include <doctest.h>

#include <algorithm>

#include "test_util.h"
#include "tiersim/config.h"

using namespace tiersim;
using tiersim::testing::Idle;
using tiersim::testing::SmallMachine;

namespace {

bool Mentions(const std::vector<std::string>& v, std::string_view needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("valid watermark ordering passes") {
  const MachineConfig m = SmallMachine(1000, 100, 50, 100);
  const std::vector<ContainerSpec> cs = {Idle("a")};
  CHECK(FindConfigViolations(m, cs).empty());
  CHECK_NOTHROW(ValidateConfig(m, cs));
}

TEST_CASE("inverted watermarks are rejected") {
  const MachineConfig m = SmallMachine(1000, 100, 100, 50);
  const std::vector<ContainerSpec> cs = {Idle("a")};
  const auto v = FindConfigViolations(m, cs);
  CHECK(Mentions(v, "watermark ordering"));
  CHECK_THROWS_AS(ValidateConfig(m, cs), InvalidConfig);
}

TEST_CASE("upper bound below protection is rejected") {
  const MachineConfig m = SmallMachine(1000, 100, 50, 100);
  const std::vector<ContainerSpec> cs = {Idle("a", 200, 100)};
  CHECK(Mentions(FindConfigViolations(m, cs), "bound ordering"));
}

TEST_CASE("every violation is reported at once") {
  const MachineConfig m = SmallMachine(1000, 100, 100, 50);
  const std::vector<ContainerSpec> cs = {Idle("a", 2000, 100), Idle("a")};
  try {
    ValidateConfig(m, cs);
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    CHECK(Mentions(e.violations(), "watermark ordering"));
    CHECK(Mentions(e.violations(), "bound ordering"));
    CHECK(Mentions(e.violations(), "protection exceeds capacity"));
    CHECK(Mentions(e.violations(), "duplicate container id"));
  }
}

TEST_CASE("capacity defaults fill watermarks and steady free rate") {
  MachineConfig m;
  m.local_capacity = 61'440;
  ApplyCapacityDefaults(m);
  CHECK(m.low_watermark == 120);
  CHECK(m.high_watermark == 240);
  CHECK(m.steady_free_rate == doctest::Approx(614.4));
}

TEST_CASE("default detector period spans five simulated seconds") {
  const MachineConfig m;
  CHECK(static_cast<double>(m.detector_period) * m.tick_length_ms == doctest::Approx(5000.0));
  CHECK(m.multiplier_floor() == doctest::Approx(1.0 / 64.0));
}

TEST_CASE("policy profiles") {
  const PolicyConfig fair = PolicyConfig::Fair();
  CHECK(fair.throttle_promotion);
  CHECK(fair.thrash_mitigation);
  const PolicyConfig base = PolicyConfig::Baseline();
  CHECK_FALSE(base.throttle_promotion);
  CHECK_FALSE(base.thrash_mitigation);
  CHECK(base.promotion_gate == PromotionGate::kAboveHigh);
  CHECK(base.demotion_order == DemotionOrder::kGlobalLru);
}
