#include "faultline/injector.hpp"

namespace faultline {

uint64_t Profile::total() const {
  uint64_t t = 0;
  for (uint64_t c : per_rank_counts) t += c;
  return t;
}

Profile profile(const Program& program, int nranks, OpcodeClass opcode_class,
                uint64_t step_budget) {
  GroupOutcome out = run_group(program, nranks, step_budget);
  if (!out.completed())
    throw InjectError(std::string("fault-free run did not complete: ") +
                      crash_reason_name(out.crash));
  Profile p;
  p.opcode_class = opcode_class;
  p.nranks = nranks;
  p.per_rank_counts.reserve(nranks);
  for (const VmState& s : out.ranks) p.per_rank_counts.push_back(s.counter(opcode_class));
  return p;
}

FaultSpec draw_fault(SplitMix64& rng, const Profile& profile) {
  std::vector<int> nonzero;
  for (int r = 0; r < profile.nranks; ++r)
    if (profile.per_rank_counts[r] > 0) nonzero.push_back(r);
  if (nonzero.empty()) throw InjectError("no injection targets: all rank counts are zero");

  // exactly three draws per fault, always, so trial streams line up
  uint64_t d_rank = rng.next();
  uint64_t d_k = rng.next();
  uint64_t d_bit = rng.next();

  FaultSpec spec;
  spec.opcode_class = profile.opcode_class;
  spec.rank = nonzero[d_rank % nonzero.size()];
  spec.k = 1 + d_k % profile.per_rank_counts[spec.rank];
  spec.bit = static_cast<int>(d_bit % 64);
  return spec;
}

TrialRecord injected_run(const Program& program, int nranks, const FaultSpec& spec,
                         uint64_t step_budget) {
  InjectionHook hook;
  hook.opcode_class = spec.opcode_class;
  hook.k = spec.k;
  hook.bit = spec.bit;

  GroupOutcome out = run_group(program, nranks, step_budget, &hook, spec.rank);
  if (!hook.fired)
    throw InjectError("fault index k=" + std::to_string(spec.k) +
                      " beyond the fault-free dynamic count of rank " +
                      std::to_string(spec.rank));

  TrialRecord rec;
  rec.spec = spec;
  rec.faulted_pc = hook.fault_pc;
  rec.faulted_loc = program.loc(hook.fault_pc);
  rec.original_bits = hook.original_bits;
  rec.corrupted_bits = hook.corrupted_bits;
  rec.steps = out.total_steps;
  if (out.completed()) {
    rec.checksum = out.ranks[0].fregs[program.verify.freg];
  } else {
    rec.crash_reason = out.crash;
  }
  return rec;
}

}  // namespace faultline
