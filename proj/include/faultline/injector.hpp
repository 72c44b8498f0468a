#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "faultline/mpsim.hpp"
#include "faultline/rng.hpp"

namespace faultline {

struct InjectError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fault-free dynamic instance counts of one opcode class, per rank.
struct Profile {
  OpcodeClass opcode_class = OpcodeClass::Fadd;
  int nranks = 1;
  std::vector<uint64_t> per_rank_counts;

  uint64_t total() const;
};

struct FaultSpec {
  int rank = 0;
  OpcodeClass opcode_class = OpcodeClass::Fadd;
  uint64_t k = 1;  // 1-based dynamic index
  int bit = 0;     // 0..63
};

enum class Outcome { Unclassified, Benign, SDC, Crash };

struct TrialRecord {
  FaultSpec spec;
  uint32_t faulted_pc = 0;
  SourceLoc faulted_loc;
  uint64_t original_bits = 0;
  uint64_t corrupted_bits = 0;
  Outcome outcome = Outcome::Unclassified;
  GroupOutcome::CrashReason crash_reason = GroupOutcome::CrashReason::Trap;
  std::optional<double> checksum;  // present iff the group completed
  uint64_t steps = 0;
};

// Pass 1: fault-free run, recording per-rank class counters at halt.
// Throws InjectError if the fault-free run itself cannot complete.
Profile profile(const Program& program, int nranks, OpcodeClass opcode_class,
                uint64_t step_budget);

// Draws a fault site uniformly over {ranks with count>0} x [1..count] x [0..63].
// Consumes exactly three rng draws. Throws InjectError when every rank has
// zero target instances.
FaultSpec draw_fault(SplitMix64& rng, const Profile& profile);

// Pass 2: one injected execution. The hook fires exactly once, at the k-th
// dynamic instance of the class on the target rank. Outcome is left
// Unclassified; campaign::classify fills it in.
TrialRecord injected_run(const Program& program, int nranks, const FaultSpec& spec,
                         uint64_t step_budget);

}  // namespace faultline
