#include "faultline/mpsim.hpp"

#include <deque>
#include <map>

namespace faultline {

const char* crash_reason_name(GroupOutcome::CrashReason r) {
  switch (r) {
    case GroupOutcome::CrashReason::Trap: return "Trap";
    case GroupOutcome::CrashReason::Deadlock: return "Deadlock";
    case GroupOutcome::CrashReason::BudgetExceeded: return "BudgetExceeded";
  }
  return "?";
}

namespace {

struct Collective {
  std::vector<bool> arrived;
  std::vector<CollectiveKind> kind;
  int count = 0;
};

}  // namespace

GroupOutcome run_group(const Program& program, int nranks, uint64_t step_budget,
                       InjectionHook* hook, int hook_rank,
                       ClassPcCensus* census, int census_rank) {
  GroupOutcome out;
  std::vector<VmState> ranks;
  ranks.reserve(nranks);
  for (int r = 0; r < nranks; ++r) ranks.push_back(make_vm_state(program, r, nranks));

  std::map<std::pair<int, int>, std::deque<double>> channels;  // (src,dst) FIFO
  Collective coll;
  coll.arrived.assign(nranks, false);
  coll.kind.assign(nranks, CollectiveKind::Barrier);

  auto crash = [&](GroupOutcome::CrashReason reason) {
    out.kind = GroupOutcome::Kind::Crashed;
    out.crash = reason;
    uint64_t total = 0;
    for (const VmState& s : ranks) total += s.steps;
    out.total_steps = total;
    return out;
  };

  int halted = 0;
  for (;;) {
    bool progress = false;
    for (int r = 0; r < nranks; ++r) {
      VmState& s = ranks[r];
      if (s.status == VmStatus::Halted || s.status == VmStatus::Trapped) continue;

      if (s.status == VmStatus::BlockedOnRecv) {
        auto& q = channels[{s.blocked_peer, r}];
        if (q.empty()) continue;
        complete_recv(s, q.front());
        q.pop_front();
        progress = true;
        continue;
      }
      if (s.status == VmStatus::BlockedOnCollective) continue;  // resolved on arrival of the last rank

      if (s.steps >= step_budget) return crash(GroupOutcome::CrashReason::BudgetExceeded);

      InjectionHook* h = (hook && r == hook_rank) ? hook : nullptr;
      ClassPcCensus* c = (census && r == census_rank) ? census : nullptr;
      StepEvent ev = step(s, program, h, c);
      switch (ev.kind) {
        case StepEvent::Kind::Retired:
          progress = true;
          break;
        case StepEvent::Kind::Halted:
          ++halted;
          progress = true;
          break;
        case StepEvent::Kind::Trapped:
          out.trap_rank = r;
          out.trap_pc = s.pc;
          out.trap_kind = ev.trap;
          return crash(GroupOutcome::CrashReason::Trap);
        case StepEvent::Kind::WantsSend:
          channels[{r, ev.peer}].push_back(ev.value);
          complete_send(s);
          progress = true;
          break;
        case StepEvent::Kind::WantsRecv: {
          auto& q = channels[{ev.peer, r}];
          if (!q.empty()) {
            s.blocked_reg = ev.reg;
            complete_recv(s, q.front());
            q.pop_front();
            progress = true;
          } else {
            s.status = VmStatus::BlockedOnRecv;
            s.blocked_peer = ev.peer;
            s.blocked_reg = ev.reg;
          }
          break;
        }
        case StepEvent::Kind::WantsCollective: {
          s.status = VmStatus::BlockedOnCollective;
          s.blocked_collective = ev.collective;
          s.blocked_reg = ev.reg;
          s.collective_value = ev.value;
          coll.arrived[r] = true;
          coll.kind[r] = ev.collective;
          ++coll.count;
          if (coll.count == nranks) {
            bool same_kind = true;
            for (int i = 1; i < nranks; ++i)
              if (coll.kind[i] != coll.kind[0]) same_kind = false;
            if (same_kind) {
              // allreduce sums in ascending rank order: fixed FP association
              double sum = 0.0;
              if (coll.kind[0] == CollectiveKind::AllreduceSum)
                for (int i = 0; i < nranks; ++i) sum += ranks[i].collective_value;
              for (int i = 0; i < nranks; ++i) complete_collective(ranks[i], sum);
              coll.arrived.assign(nranks, false);
              coll.count = 0;
              progress = true;
            }
            // mismatched kinds never complete; the no-progress pass below
            // reports the deadlock
          }
          break;
        }
      }
    }

    if (halted == nranks) break;
    if (!progress) return crash(GroupOutcome::CrashReason::Deadlock);
  }

  out.kind = GroupOutcome::Kind::Completed;
  uint64_t total = 0;
  for (const VmState& s : ranks) total += s.steps;
  out.total_steps = total;
  for (const auto& [key, q] : channels) out.undelivered_messages += q.size();
  out.ranks = std::move(ranks);
  return out;
}

}  // namespace faultline
