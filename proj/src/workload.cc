#include "tiersim/workload.h"

#include <algorithm>
#include <cmath>

namespace tiersim {

std::string_view ToString(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kStreaming:
      return "streaming";
    case WorkloadKind::kBursty:
      return "bursty";
    case WorkloadKind::kThrashing:
      return "thrashing";
    case WorkloadKind::kIdle:
      return "idle";
  }
  return "?";
}

WorkloadGenerator::WorkloadGenerator(const WorkloadSpec& spec, double tick_length_ms)
    : spec_(spec), tick_seconds_(tick_length_ms / 1000.0) {
  if (spec_.kind == WorkloadKind::kThrashing) {
    block_size_ = spec_.block_size;
    if (block_size_ == 0 && spec_.reaccess_gap > 0) {
      const auto gap = static_cast<PageCount>(spec_.reaccess_gap);
      block_size_ = (spec_.footprint + gap - 1) / gap;
    }
    block_size_ = std::max<PageCount>(block_size_, 1);
  }
}

void WorkloadGenerator::EmitResize(PageCount target, std::vector<WorkloadOp>& out) {
  if (target > held_) {
    out.push_back({WorkloadOp::Kind::kAllocate, target - held_});
  } else if (target < held_) {
    out.push_back({WorkloadOp::Kind::kFree, held_ - target});
  }
  held_ = target;
}

void WorkloadGenerator::EmitStreamingAccesses(std::vector<WorkloadOp>& out) {
  if (held_ == 0) return;
  const auto hot = std::max<PageCount>(
      1, static_cast<PageCount>(std::ceil(spec_.hot_fraction * static_cast<double>(held_))));
  carry_ += spec_.hotness * static_cast<double>(hot) * tick_seconds_;
  const auto n = static_cast<std::uint64_t>(std::floor(carry_));
  carry_ -= static_cast<double>(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (cursor_ >= hot) cursor_ = 0;
    out.push_back({WorkloadOp::Kind::kAccess, cursor_});
    ++cursor_;
  }
}

void WorkloadGenerator::EmitThrashingAccesses(std::vector<WorkloadOp>& out) {
  if (held_ == 0) return;
  const std::uint64_t blocks = (held_ + block_size_ - 1) / block_size_;
  if (block_ >= blocks) block_ = 0;
  const std::uint64_t begin = block_ * block_size_;
  const std::uint64_t end = std::min<std::uint64_t>(begin + block_size_, held_);
  // Two passes so every page in the block clears the two-touch filter.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::uint64_t slot = begin; slot < end; ++slot) {
      out.push_back({WorkloadOp::Kind::kAccess, slot});
    }
  }
  ++block_;
}

void WorkloadGenerator::NextOps(Tick tick, Rng& rng, std::vector<WorkloadOp>& out) {
  if (terminated_ || tick < spec_.launch_delay) return;
  const bool first = !started_;
  started_ = true;

  switch (spec_.kind) {
    case WorkloadKind::kIdle:
      return;
    case WorkloadKind::kStreaming:
      if (first) {
        EmitResize(spec_.footprint, out);
        // Desynchronize sequential passes between containers.
        const auto hot = std::max<PageCount>(
            1, static_cast<PageCount>(std::ceil(spec_.hot_fraction * static_cast<double>(held_))));
        cursor_ = rng.Below(hot);
      }
      EmitStreamingAccesses(out);
      return;
    case WorkloadKind::kBursty: {
      const Tick offset = tick - spec_.launch_delay;
      while (next_burst_ < spec_.burst_profile.size() &&
             spec_.burst_profile[next_burst_].offset <= offset) {
        EmitResize(spec_.burst_profile[next_burst_].target, out);
        ++next_burst_;
      }
      EmitStreamingAccesses(out);
      return;
    }
    case WorkloadKind::kThrashing:
      if (first) EmitResize(spec_.footprint, out);
      EmitThrashingAccesses(out);
      return;
  }
}

}  // namespace tiersim
