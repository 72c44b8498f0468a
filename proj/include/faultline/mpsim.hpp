#pragma once

#include <cstdint>
#include <vector>

#include "faultline/vm.hpp"

namespace faultline {

struct GroupOutcome {
  enum class Kind { Completed, Crashed };
  enum class CrashReason { Trap, Deadlock, BudgetExceeded };

  Kind kind = Kind::Completed;
  CrashReason crash = CrashReason::Trap;
  int trap_rank = 0;
  uint32_t trap_pc = 0;
  TrapKind trap_kind = TrapKind::OutOfBounds;

  std::vector<VmState> ranks;  // final per-rank states (Completed only)
  uint64_t total_steps = 0;
  uint64_t undelivered_messages = 0;

  bool completed() const { return kind == Kind::Completed; }
};

const char* crash_reason_name(GroupOutcome::CrashReason r);

// Runs nranks copies of the program under a strict round-robin cooperative
// scheduler (one instruction per turn, blocked/halted ranks skipped).
// Channels are FIFO per (src,dst) with unbounded buffering; allreduce_sum
// accumulates in ascending rank order. Any trap crashes the whole group;
// a pass with no progress while unhalted ranks remain is a deadlock.
// The hook, if given, is bound to hook_rank only.
GroupOutcome run_group(const Program& program, int nranks, uint64_t step_budget,
                       InjectionHook* hook = nullptr, int hook_rank = 0,
                       ClassPcCensus* census = nullptr, int census_rank = 0);

}  // namespace faultline
