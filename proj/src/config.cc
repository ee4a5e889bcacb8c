#include "tiersim/config.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tiersim {

std::string_view ToString(Tier t) { return t == Tier::kLocal ? "local" : "cxl"; }

std::string_view ToString(WatermarkState s) {
  switch (s) {
    case WatermarkState::kAboveHigh:
      return "above_high";
    case WatermarkState::kBelowHigh:
      return "below_high";
    case WatermarkState::kBelowLow:
      return "below_low";
  }
  return "?";
}

std::string_view ToString(Status s) {
  switch (s) {
    case Status::kOk:
      return "ok";
    case Status::kOutOfMemory:
      return "out_of_memory";
    case Status::kDestinationFull:
      return "destination_full";
    case Status::kCxlFull:
      return "cxl_full";
  }
  return "?";
}

double MachineConfig::multiplier_floor() const {
  return std::ldexp(1.0, -multiplier_floor_halvings);
}

void ApplyCapacityDefaults(MachineConfig& machine) {
  if (machine.low_watermark == 0 && machine.high_watermark == 0) {
    machine.low_watermark = std::max<PageCount>(1, machine.local_capacity / 512);
    machine.high_watermark = 2 * machine.low_watermark;
  }
  if (machine.steady_free_rate <= 0.0) {
    machine.steady_free_rate = static_cast<double>(machine.local_capacity) / 100.0;
  }
}

PolicyConfig PolicyConfig::Fair() { return PolicyConfig{}; }

PolicyConfig PolicyConfig::Baseline() {
  PolicyConfig p;
  p.profile = "baseline";
  p.throttle_promotion = false;
  p.thrash_mitigation = false;
  p.promotion_gate = PromotionGate::kAboveHigh;
  p.demotion_order = DemotionOrder::kGlobalLru;
  return p;
}

namespace {

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

bool InUnitInterval(double v) { return v > 0.0 && v <= 1.0; }

}  // namespace

InvalidConfig::InvalidConfig(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration: " + Join(violations)),
      violations_(std::move(violations)) {}

std::vector<std::string> FindConfigViolations(const MachineConfig& m,
                                              std::span<const ContainerSpec> containers) {
  std::vector<std::string> v;
  auto add = [&v](std::string s) { v.push_back(std::move(s)); };

  if (m.local_capacity == 0) add("watermark ordering: local_capacity must be positive");
  if (!(0 < m.low_watermark && m.low_watermark < m.high_watermark &&
        m.high_watermark < m.local_capacity)) {
    std::ostringstream os;
    os << "watermark ordering: require 0 < low_watermark (" << m.low_watermark
       << ") < high_watermark (" << m.high_watermark << ") < local_capacity ("
       << m.local_capacity << ")";
    add(os.str());
  }
  if (m.page_size == 0) add("page_size must be positive");
  if (!(m.tick_length_ms > 0.0)) add("tick_length_ms must be positive");
  if (m.promo_scan_interval <= 0) add("promo_scan_interval must be positive");
  if (m.demote_scan_interval <= 0) add("demote_scan_interval must be positive");
  if (m.detector_period <= 0) add("detector_period must be positive");
  if (m.hint_window < 0) add("hint_window must be non-negative");
  if (m.aging_horizon <= 0) add("aging_horizon must be positive");
  if (m.hash_table_slots == 0) add("hash_table_slots must be positive");
  if (!(m.promo_sample_rate >= 0.0 && m.promo_sample_rate <= 1.0)) {
    add("promo_sample_rate must lie in [0, 1]");
  }
  if (!InUnitInterval(m.p_base_fraction)) add("p_base_fraction must lie in (0, 1]");
  if (m.multiplier_floor_halvings < 0 || m.multiplier_floor_halvings > 62) {
    add("multiplier_floor must be a power of two in (0, 1]");
  }
  if (!(m.bound_headroom_fraction >= 0.0 && m.bound_headroom_fraction < 1.0)) {
    add("bound_headroom_fraction must lie in [0, 1)");
  }
  if (!(m.sync_batch_fraction >= 0.0 && m.sync_batch_fraction <= 1.0)) {
    add("sync_batch_fraction must lie in [0, 1]");
  }
  if (m.sync_retries < 1) add("sync_retries must be at least 1");
  if (!(m.t_resident_ms >= 0.0)) add("t_resident_ms must be non-negative");
  if (!(m.r_thrashing >= 0.0)) add("r_thrashing must be non-negative");
  if (!(m.steady_active_delta >= 0.0)) add("steady_active_delta must be non-negative");
  if (m.steady_grace_periods < 0) add("steady_grace_periods must be non-negative");
  if (!(m.local_latency_ns > 0.0 && m.cxl_latency_ns > 0.0)) {
    add("access latencies must be positive");
  }

  std::set<std::string> names;
  PageCount protection_sum = 0;
  for (const ContainerSpec& c : containers) {
    if (c.name.empty()) add("container id must be non-empty");
    if (!names.insert(c.name).second) add("duplicate container id '" + c.name + "'");
    protection_sum += c.lower_protection;
    if (c.lower_protection > m.local_capacity) {
      add("protection exceeds capacity: container '" + c.name +
          "' lower_protection is larger than local_capacity");
    }
    if (c.upper_bound && *c.upper_bound < c.lower_protection) {
      add("bound ordering: container '" + c.name + "' upper_bound < lower_protection");
    }
    const WorkloadSpec& w = c.workload;
    if (w.kind != WorkloadKind::kIdle && w.kind != WorkloadKind::kBursty && w.footprint == 0) {
      add("container '" + c.name + "' footprint must be positive");
    }
    if (w.launch_delay < 0) add("container '" + c.name + "' launch_delay must be >= 0");
    if (!InUnitInterval(w.hot_fraction)) {
      add("container '" + c.name + "' hot_fraction must lie in (0, 1]");
    }
    if (!(w.hotness >= 0.0)) add("container '" + c.name + "' hotness must be >= 0");
    if (w.kind == WorkloadKind::kBursty) {
      if (w.burst_profile.empty()) add("container '" + c.name + "' bursty workload needs burst_profile");
      Tick prev = -1;
      for (const BurstPoint& b : w.burst_profile) {
        if (b.offset <= prev) {
          add("container '" + c.name + "' burst_profile offsets must be strictly increasing");
          break;
        }
        prev = b.offset;
      }
    }
    if (w.kind == WorkloadKind::kThrashing && w.block_size == 0 && w.reaccess_gap <= 0) {
      add("container '" + c.name + "' thrashing workload needs block_size or reaccess_gap");
    }
  }
  if (protection_sum > m.local_capacity) {
    add("protection exceeds capacity: sum of lower_protection exceeds local_capacity");
  }
  return v;
}

void ValidateConfig(const MachineConfig& machine, std::span<const ContainerSpec> containers) {
  auto violations = FindConfigViolations(machine, containers);
  if (!violations.empty()) throw InvalidConfig(std::move(violations));
}

}  // namespace tiersim
