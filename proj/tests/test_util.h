#ifndef TIERSIM_TESTS_TEST_UTIL_H_
#define TIERSIM_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "tiersim/config.h"
#include "tiersim/scenario.h"

namespace tiersim::testing {

inline MachineConfig SmallMachine(PageCount local, PageCount cxl, PageCount low = 4,
                                  PageCount high = 8) {
  MachineConfig m;
  m.local_capacity = local;
  m.cxl_capacity = cxl;
  m.low_watermark = low;
  m.high_watermark = high;
  m.rng_seed = 1;
  ApplyCapacityDefaults(m);
  return m;
}

inline ContainerSpec Idle(std::string name, PageCount protection = 0,
                          std::optional<PageCount> bound = std::nullopt) {
  ContainerSpec c;
  c.name = std::move(name);
  c.lower_protection = protection;
  c.upper_bound = bound;
  c.workload.kind = WorkloadKind::kIdle;
  c.workload.footprint = 1;
  return c;
}

inline std::string FixturePath(const std::string& file) {
  return std::string(TIERSIM_SCENARIO_DIR) + "/" + file;
}

inline Scenario LoadFixture(const std::string& file) { return ParseScenarioFile(FixturePath(file)); }

inline const std::vector<std::string>& FixtureFiles() {
  static const std::vector<std::string> files = {
      "full_residency.yaml",        "contention.yaml",        "donation.yaml",
      "upper_bound.yaml",           "thrashing_mitigation.yaml", "launch_order_baseline.yaml",
      "launch_order_fair.yaml",     "hotness_asymmetry.yaml", "thrashing_interference.yaml",
  };
  return files;
}

}  // namespace tiersim::testing

#endif  // TIERSIM_TESTS_TEST_UTIL_H_
