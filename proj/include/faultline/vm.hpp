#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "faultline/isa.hpp"

namespace faultline {

// Flips bit `bit` (0..63) of an IEEE binary64 bit pattern. Involution;
// NaN payloads pass through untouched.
uint64_t apply_bitflip(uint64_t bits, int bit);

double bits_to_double(uint64_t bits);
uint64_t double_to_bits(double v);

enum class TrapKind { OutOfBounds, IntDivZero, RankOutOfRange, CallStackUnderflow };
const char* trap_kind_name(TrapKind k);

enum class VmStatus { Running, Halted, Trapped, BlockedOnRecv, BlockedOnCollective };

enum class CollectiveKind { AllreduceSum, Barrier };

struct VmState {
  std::array<double, 32> fregs{};
  std::array<int64_t, 16> iregs{};
  std::vector<uint64_t> mem;  // 64-bit words
  uint32_t pc = 0;
  uint64_t steps = 0;
  std::array<uint64_t, kNumOpcodeClasses> class_counters{};
  int rank = 0;
  int nranks = 1;
  VmStatus status = VmStatus::Running;
  TrapKind trap = TrapKind::OutOfBounds;
  std::vector<uint32_t> call_stack;

  // Pending messaging request while blocked.
  int blocked_peer = 0;    // recv source rank
  int blocked_reg = 0;     // destination register
  CollectiveKind blocked_collective = CollectiveKind::Barrier;
  double collective_value = 0.0;

  uint64_t counter(OpcodeClass c) const { return class_counters[static_cast<int>(c)]; }
};

VmState make_vm_state(const Program& program, int rank, int nranks);

// Single-bit fault armed at the k-th dynamic instance of one opcode class.
// Fires at most once; when it fires the computed result bits are replaced
// before register writeback and the site is recorded.
struct InjectionHook {
  OpcodeClass opcode_class = OpcodeClass::Fadd;
  uint64_t k = 1;  // 1-based dynamic index
  int bit = 0;

  bool fired = false;
  uint32_t fault_pc = 0;
  uint64_t original_bits = 0;
  uint64_t corrupted_bits = 0;
};

// Optional per-class observer: counts retired instructions of one class by pc.
struct ClassPcCensus {
  OpcodeClass opcode_class = OpcodeClass::Fadd;
  std::map<uint32_t, uint64_t> counts;
};

struct StepEvent {
  enum class Kind { Retired, Halted, Trapped, WantsSend, WantsRecv, WantsCollective };
  Kind kind = Kind::Retired;
  TrapKind trap = TrapKind::OutOfBounds;
  int peer = 0;                // send dst / recv src
  int reg = 0;                 // recv destination freg
  double value = 0.0;          // send / collective payload
  CollectiveKind collective = CollectiveKind::Barrier;
};

// Executes one instruction. Messaging instructions do not retire here:
// the caller satisfies the request via the complete_* helpers below.
StepEvent step(VmState& state, const Program& program, InjectionHook* hook = nullptr,
               ClassPcCensus* census = nullptr);

// Completion helpers used by the scheduler (and by run_single for the
// degenerate nranks=1 collectives).
void complete_send(VmState& state);                    // send retires once enqueued
void complete_recv(VmState& state, double value);      // delivers into the blocked freg
void complete_collective(VmState& state, double value);

struct RankOutcome {
  enum class Kind { Halted, Trapped, BudgetExceeded };
  Kind kind = Kind::Halted;
  VmState state;
  TrapKind trap = TrapKind::OutOfBounds;
  uint32_t trap_pc = 0;
};

// Runs one rank to completion (nranks = 1; collectives are identity,
// send/recv trap). Deterministic: equal inputs give bit-identical states.
RankOutcome run_single(const Program& program, uint64_t step_budget,
                       InjectionHook* hook = nullptr, ClassPcCensus* census = nullptr);

}  // namespace faultline
