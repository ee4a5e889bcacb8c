#include <doctest.h>

#include <map>
#include <set>

#include "test_util.h"
#include "tiersim/memory_manager.h"
#include "tiersim/workload.h"

using namespace tiersim;

namespace {

std::vector<WorkloadOp> Collect(WorkloadGenerator& g, Rng& rng, Tick from, Tick to) {
  std::vector<WorkloadOp> out;
  for (Tick t = from; t < to; ++t) g.NextOps(t, rng, out);
  return out;
}

WorkloadSpec Streaming(PageCount footprint, double hotness) {
  WorkloadSpec s;
  s.kind = WorkloadKind::kStreaming;
  s.footprint = footprint;
  s.hotness = hotness;
  return s;
}

}  // namespace

TEST_CASE("streaming allocates once then passes sequentially at the hotness rate") {
  WorkloadGenerator g(Streaming(1000, 3.0), 100.0);
  Rng rng(1);
  std::vector<WorkloadOp> ops = Collect(g, rng, 0, 10);  // one simulated second
  REQUIRE(!ops.empty());
  CHECK(ops[0] == WorkloadOp{WorkloadOp::Kind::kAllocate, 1000});
  std::vector<std::uint64_t> slots;
  for (std::size_t i = 1; i < ops.size(); ++i) {
    REQUIRE(ops[i].kind == WorkloadOp::Kind::kAccess);
    slots.push_back(ops[i].value);
  }
  CHECK(slots.size() == 3000);
  for (std::size_t i = 1; i < slots.size(); ++i) CHECK(slots[i] == (slots[i - 1] + 1) % 1000);
  CHECK(g.held() == 1000);
}

TEST_CASE("fractional per-tick budgets carry over") {
  WorkloadGenerator g(Streaming(7, 0.3), 100.0);
  Rng rng(1);
  const std::vector<WorkloadOp> ops = Collect(g, rng, 0, 1000);
  // 0.3 accesses/page/s x 7 pages x 100 s = 210.
  CHECK(ops.size() == 1 + 210);
}

TEST_CASE("hot fraction limits the pass to the first pages") {
  WorkloadSpec s = Streaming(1000, 10.0);
  s.hot_fraction = 0.25;
  WorkloadGenerator g(s, 100.0);
  Rng rng(1);
  for (const WorkloadOp& op : Collect(g, rng, 0, 50)) {
    if (op.kind == WorkloadOp::Kind::kAccess) CHECK(op.value < 250);
  }
}

TEST_CASE("nothing happens before the launch delay") {
  WorkloadSpec s = Streaming(100, 1.0);
  s.launch_delay = 300;
  WorkloadGenerator g(s, 100.0);
  Rng rng(1);
  CHECK(Collect(g, rng, 0, 300).empty());
  std::vector<WorkloadOp> out;
  g.NextOps(300, rng, out);
  REQUIRE(!out.empty());
  CHECK(out[0].kind == WorkloadOp::Kind::kAllocate);
}

TEST_CASE("bursty follows its profile relative to launch") {
  WorkloadSpec s;
  s.kind = WorkloadKind::kBursty;
  s.launch_delay = 5;
  s.hotness = 0.0;
  s.burst_profile = {{0, 100}, {10, 400}, {20, 50}};
  WorkloadGenerator g(s, 100.0);
  Rng rng(1);
  std::vector<WorkloadOp> ops = Collect(g, rng, 0, 40);
  REQUIRE(ops.size() == 3);
  CHECK(ops[0] == WorkloadOp{WorkloadOp::Kind::kAllocate, 100});
  CHECK(ops[1] == WorkloadOp{WorkloadOp::Kind::kAllocate, 300});
  CHECK(ops[2] == WorkloadOp{WorkloadOp::Kind::kFree, 350});
  CHECK(g.held() == 50);
}

TEST_CASE("idle and terminated workloads emit nothing") {
  WorkloadSpec idle;
  idle.kind = WorkloadKind::kIdle;
  idle.footprint = 10;
  WorkloadGenerator gi(idle, 100.0);
  Rng rng(1);
  CHECK(Collect(gi, rng, 0, 100).empty());

  WorkloadGenerator gs(Streaming(10, 10.0), 100.0);
  CHECK(!Collect(gs, rng, 0, 2).empty());
  gs.Terminate();
  CHECK(Collect(gs, rng, 2, 100).empty());
}

TEST_CASE("identical spec and seed yield identical streams") {
  WorkloadSpec s = Streaming(5000, 2.5);
  WorkloadGenerator a(s, 100.0);
  WorkloadGenerator b(s, 100.0);
  Rng ra(99);
  Rng rb(99);
  CHECK(Collect(a, ra, 0, 200) == Collect(b, rb, 0, 200));
}

TEST_CASE("block size derives from the re-access gap") {
  WorkloadSpec s;
  s.kind = WorkloadKind::kThrashing;
  s.footprint = 1000;
  s.reaccess_gap = 30;
  CHECK(WorkloadGenerator(s, 100.0).block_size() == 34);
}

// Replays a thrashing workload's trace against an isolated two-touch filter
// and checks the two-touch-then-cold pattern: every page qualifies once per
// visit and is not touched again for footprint / block_size ticks.
TEST_CASE("thrashing trace passes the filter then goes cold") {
  WorkloadSpec s;
  s.kind = WorkloadKind::kThrashing;
  s.footprint = 1000;
  s.block_size = 40;
  WorkloadGenerator g(s, 100.0);
  Rng rng(1);
  const Tick window = 20;
  std::map<std::uint64_t, std::vector<Tick>> touches;
  for (Tick t = 0; t < 200; ++t) {
    std::vector<WorkloadOp> ops;
    g.NextOps(t, rng, ops);
    for (const WorkloadOp& op : ops) {
      if (op.kind == WorkloadOp::Kind::kAccess) touches[op.value].push_back(t);
    }
  }
  REQUIRE(touches.size() == 1000);
  const Tick gap = 1000 / 40;
  for (const auto& [slot, ticks] : touches) {
    REQUIRE(ticks.size() % 2 == 0);
    for (std::size_t i = 0; i + 1 < ticks.size(); i += 2) {
      CHECK(ticks[i + 1] - ticks[i] <= window);  // the pair qualifies
      if (i + 2 < ticks.size()) CHECK(ticks[i + 2] - ticks[i + 1] == gap);
    }
  }
  // A new block becomes hot every tick, so candidates appear every window.
  std::set<Tick> qualifying;
  for (const auto& [slot, ticks] : touches) qualifying.insert(ticks.front());
  CHECK(qualifying.size() == 25);
}

TEST_CASE("only streams hotter than the hint window produce candidates") {
  // Every page past the first 16 sits on CXL; count promotion candidates.
  auto candidates_for = [](double hotness) {
    MachineConfig m = tiersim::testing::SmallMachine(16, 4096, 2, 4);
    std::vector<ContainerSpec> cs = {tiersim::testing::Idle("a")};
    MemoryManager mm(m, cs);
    WorkloadGenerator g(Streaming(2000, hotness), m.tick_length_ms);
    Rng rng(5);
    std::vector<PageId> slots;
    std::uint64_t n = 0;
    for (Tick t = 0; t < 600; ++t) {
      std::vector<WorkloadOp> ops;
      g.NextOps(t, rng, ops);
      for (const WorkloadOp& op : ops) {
        if (op.kind == WorkloadOp::Kind::kAllocate) {
          slots = mm.Allocate(0, op.value, t).pages;
        } else if (op.kind == WorkloadOp::Kind::kAccess) {
          n += mm.RecordAccess(0, slots[op.value], t).became_candidate ? 1 : 0;
        }
      }
      mm.AgeLrus(t);
    }
    return n;
  };
  // Hint window 20 ticks of 100 ms: a page must be touched at least every 2 s.
  CHECK(candidates_for(0.2) == 0);
  CHECK(candidates_for(0.4) == 0);
  CHECK(candidates_for(0.8) > 1900);
  CHECK(candidates_for(3.2) > 1900);
}
