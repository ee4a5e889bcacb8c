#ifndef TIERSIM_CONFIG_H_
#define TIERSIM_CONFIG_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tiersim/types.h"
#include "tiersim/workload.h"

namespace tiersim {

// Machine-wide parameters. All sizes are in pages; all cadences in ticks
// unless the field name says otherwise.
struct MachineConfig {
  PageCount local_capacity = 0;
  PageCount cxl_capacity = 0;
  std::uint64_t page_size = 4096;
  PageCount low_watermark = 0;
  PageCount high_watermark = 0;

  double tick_length_ms = 100.0;
  Tick promo_scan_interval = 10;
  Tick demote_scan_interval = 1;
  Tick detector_period = 50;

  // Thrash detection.
  double t_resident_ms = 10'000.0;
  double r_thrashing = 1'000.0;  // thrash events per second per container
  std::uint32_t hash_table_slots = 65'536;
  double promo_sample_rate = 0.125;
  int multiplier_floor_halvings = 6;  // floor = 2^-6 = 1/64

  // Promotion and demotion shaping.
  double p_base_fraction = 0.125;
  double bound_headroom_fraction = 0.02;
  double sync_batch_fraction = 0.01;
  int sync_retries = 3;
  PageCount migration_cap_per_tick = 0;  // 0 = unlimited

  // LRU and hint-fault modeling.
  Tick hint_window = 20;
  Tick aging_horizon = 50;

  // Steady-state detection.
  double steady_active_delta = 0.05;
  double steady_free_rate = 0.0;  // pages per second
  int steady_grace_periods = 2;

  // Access cost model used for throughput accounting. Migration traffic in
  // the previous tick inflates both tiers' latency by
  // min(1, migrated / migration_bandwidth).
  double local_latency_ns = 100.0;
  double cxl_latency_ns = 250.0;
  PageCount migration_bandwidth = 0;  // pages per tick, 0 = no interference

  std::uint64_t rng_seed = 0;

  double tick_seconds() const { return tick_length_ms / 1000.0; }
  double multiplier_floor() const;
};

// Fills watermark and steady-free-rate defaults that depend on capacity.
void ApplyCapacityDefaults(MachineConfig& machine);

enum class PromotionGate : std::uint8_t {
  kFreeFrame,  // promote while any local frame is free
  kAboveHigh,  // promote only while free local memory is above the high watermark
};

enum class DemotionOrder : std::uint8_t {
  kOverageRatio,  // per-container, descending usage / protection
  kGlobalLru,     // oldest local page system-wide first
};

// Mechanism toggles. "fair" enables the container-aware policy; "baseline"
// approximates an unmodified tiering kernel.
struct PolicyConfig {
  std::string profile = "fair";
  bool throttle_promotion = true;
  bool thrash_mitigation = true;
  PromotionGate promotion_gate = PromotionGate::kFreeFrame;
  DemotionOrder demotion_order = DemotionOrder::kOverageRatio;

  static PolicyConfig Fair();
  static PolicyConfig Baseline();
};

struct ContainerSpec {
  std::string name;
  PageCount lower_protection = 0;
  std::optional<PageCount> upper_bound;
  WorkloadSpec workload;
};

class InvalidConfig : public std::runtime_error {
 public:
  explicit InvalidConfig(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Every violated constraint; empty when the configuration is runnable.
std::vector<std::string> FindConfigViolations(const MachineConfig& machine,
                                              std::span<const ContainerSpec> containers);

// Throws InvalidConfig listing every violation.
void ValidateConfig(const MachineConfig& machine, std::span<const ContainerSpec> containers);

}  // namespace tiersim

#endif  // TIERSIM_CONFIG_H_
