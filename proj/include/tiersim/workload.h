#ifndef TIERSIM_WORKLOAD_H_
#define TIERSIM_WORKLOAD_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "tiersim/rng.h"
#include "tiersim/types.h"

namespace tiersim {

enum class WorkloadKind : std::uint8_t { kStreaming, kBursty, kThrashing, kIdle };

std::string_view ToString(WorkloadKind k);

struct BurstPoint {
  Tick offset = 0;  // relative to launch
  PageCount target = 0;
};

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kStreaming;
  PageCount footprint = 0;
  // Accesses per page per second over the hot region.
  double hotness = 1.0;
  double hot_fraction = 1.0;
  Tick launch_delay = 0;
  std::vector<BurstPoint> burst_profile;
  // Thrashing: pages touched per tick. Zero means derive from reaccess_gap.
  PageCount block_size = 0;
  // Thrashing: ticks between consecutive visits to the same block.
  Tick reaccess_gap = 0;
};

// Operations are expressed in the workload's logical page space: slot i is
// the i-th page the workload allocated and still holds. Frees release the
// most recently allocated slots.
struct WorkloadOp {
  enum class Kind : std::uint8_t { kAllocate, kAccess, kFree };
  Kind kind;
  std::uint64_t value;  // page count for allocate/free, slot for access

  friend bool operator==(const WorkloadOp&, const WorkloadOp&) = default;
};

class WorkloadGenerator {
 public:
  WorkloadGenerator(const WorkloadSpec& spec, double tick_length_ms);

  // Appends this tick's requests to `out`. Ticks must be passed in
  // increasing order.
  void NextOps(Tick tick, Rng& rng, std::vector<WorkloadOp>& out);

  // Stops the workload permanently (e.g. after an allocation failure).
  void Terminate() { terminated_ = true; }
  bool terminated() const { return terminated_; }

  // Logical footprint the generator believes it holds.
  PageCount held() const { return held_; }
  const WorkloadSpec& spec() const { return spec_; }
  PageCount block_size() const { return block_size_; }

 private:
  void EmitResize(PageCount target, std::vector<WorkloadOp>& out);
  void EmitStreamingAccesses(std::vector<WorkloadOp>& out);
  void EmitThrashingAccesses(std::vector<WorkloadOp>& out);

  WorkloadSpec spec_;
  double tick_seconds_;
  bool started_ = false;
  bool terminated_ = false;
  PageCount held_ = 0;
  std::uint64_t cursor_ = 0;
  double carry_ = 0.0;
  std::size_t next_burst_ = 0;
  PageCount block_size_ = 0;
  std::uint64_t block_ = 0;
};

}  // namespace tiersim

#endif  // TIERSIM_WORKLOAD_H_
