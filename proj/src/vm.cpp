#include "faultline/vm.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace faultline {

uint64_t apply_bitflip(uint64_t bits, int bit) {
  if (bit < 0 || bit > 63) throw std::invalid_argument("bit index out of range 0..63");
  return bits ^ (1ULL << bit);
}

double bits_to_double(uint64_t bits) { return std::bit_cast<double>(bits); }
uint64_t double_to_bits(double v) { return std::bit_cast<uint64_t>(v); }

const char* trap_kind_name(TrapKind k) {
  switch (k) {
    case TrapKind::OutOfBounds: return "OutOfBounds";
    case TrapKind::IntDivZero: return "IntDivZero";
    case TrapKind::RankOutOfRange: return "RankOutOfRange";
    case TrapKind::CallStackUnderflow: return "CallStackUnderflow";
  }
  return "?";
}

VmState make_vm_state(const Program& program, int rank, int nranks) {
  VmState s;
  s.mem.assign(program.mem_words, 0);
  for (const auto& [addr, word] : program.data) s.mem[addr] = word;
  s.pc = program.entry;
  s.rank = rank;
  s.nranks = nranks;
  return s;
}

namespace {

inline StepEvent trap(VmState& s, TrapKind kind) {
  s.status = VmStatus::Trapped;
  s.trap = kind;
  StepEvent ev;
  ev.kind = StepEvent::Kind::Trapped;
  ev.trap = kind;
  return ev;
}

inline StepEvent retired(VmState& s, uint32_t next_pc) {
  s.pc = next_pc;
  ++s.steps;
  StepEvent ev;
  ev.kind = StepEvent::Kind::Retired;
  return ev;
}

// Computes an FP result, runs the class counter / hook / census machinery,
// and writes back (possibly corrupted) bits.
inline void fp_writeback(VmState& s, OpcodeClass cls, int dest, double result,
                         InjectionHook* hook, ClassPcCensus* census) {
  uint64_t& counter = s.class_counters[static_cast<int>(cls)];
  ++counter;
  if (census && census->opcode_class == cls) ++census->counts[s.pc];
  if (hook && !hook->fired && hook->opcode_class == cls && counter == hook->k) {
    uint64_t bits = double_to_bits(result);
    hook->fired = true;
    hook->fault_pc = s.pc;
    hook->original_bits = bits;
    hook->corrupted_bits = apply_bitflip(bits, hook->bit);
    result = bits_to_double(hook->corrupted_bits);
  }
  s.fregs[dest] = result;
}

}  // namespace

StepEvent step(VmState& s, const Program& program, InjectionHook* hook,
               ClassPcCensus* census) {
  if (s.pc >= program.size()) return trap(s, TrapKind::OutOfBounds);
  const Instruction& in = program.instructions[s.pc];
  auto& ir = s.iregs;
  auto& fr = s.fregs;

  switch (in.op) {
    case Opcode::Add: ir[in.a] = ir[in.b] + ir[in.c]; return retired(s, s.pc + 1);
    case Opcode::Sub: ir[in.a] = ir[in.b] - ir[in.c]; return retired(s, s.pc + 1);
    case Opcode::Mul: ir[in.a] = ir[in.b] * ir[in.c]; return retired(s, s.pc + 1);
    case Opcode::Div: {
      if (ir[in.c] == 0) return trap(s, TrapKind::IntDivZero);
      if (ir[in.b] == std::numeric_limits<int64_t>::min() && ir[in.c] == -1)
        ir[in.a] = std::numeric_limits<int64_t>::min();
      else
        ir[in.a] = ir[in.b] / ir[in.c];
      return retired(s, s.pc + 1);
    }
    case Opcode::Addi: ir[in.a] = ir[in.b] + in.c; return retired(s, s.pc + 1);
    case Opcode::Ld: {
      uint64_t addr = static_cast<uint64_t>(ir[in.b] + in.c);
      if (addr >= s.mem.size()) return trap(s, TrapKind::OutOfBounds);
      ir[in.a] = static_cast<int64_t>(s.mem[addr]);
      return retired(s, s.pc + 1);
    }
    case Opcode::St: {
      uint64_t addr = static_cast<uint64_t>(ir[in.b] + in.c);
      if (addr >= s.mem.size()) return trap(s, TrapKind::OutOfBounds);
      s.mem[addr] = static_cast<uint64_t>(ir[in.a]);
      return retired(s, s.pc + 1);
    }
    case Opcode::Mov: ir[in.a] = ir[in.b]; return retired(s, s.pc + 1);
    case Opcode::Li: ir[in.a] = in.b; return retired(s, s.pc + 1);

    case Opcode::Fadd:
      fp_writeback(s, OpcodeClass::Fadd, static_cast<int>(in.a), fr[in.b] + fr[in.c], hook, census);
      return retired(s, s.pc + 1);
    case Opcode::Fmul:
      fp_writeback(s, OpcodeClass::Fmul, static_cast<int>(in.a), fr[in.b] * fr[in.c], hook, census);
      return retired(s, s.pc + 1);
    case Opcode::Fsub:
      fp_writeback(s, OpcodeClass::Fsub, static_cast<int>(in.a), fr[in.b] - fr[in.c], hook, census);
      return retired(s, s.pc + 1);
    case Opcode::Fdiv:
      fp_writeback(s, OpcodeClass::Fdiv, static_cast<int>(in.a), fr[in.b] / fr[in.c], hook, census);
      return retired(s, s.pc + 1);
    case Opcode::Fld: {
      uint64_t addr = static_cast<uint64_t>(ir[in.b] + in.c);
      if (addr >= s.mem.size()) return trap(s, TrapKind::OutOfBounds);
      fr[in.a] = bits_to_double(s.mem[addr]);
      return retired(s, s.pc + 1);
    }
    case Opcode::Fst: {
      uint64_t addr = static_cast<uint64_t>(ir[in.b] + in.c);
      if (addr >= s.mem.size()) return trap(s, TrapKind::OutOfBounds);
      s.mem[addr] = double_to_bits(fr[in.a]);
      return retired(s, s.pc + 1);
    }
    case Opcode::Fmovi: fr[in.a] = bits_to_double(static_cast<uint64_t>(in.b)); return retired(s, s.pc + 1);

    case Opcode::Beq: return retired(s, ir[in.a] == ir[in.b] ? static_cast<uint32_t>(in.c) : s.pc + 1);
    case Opcode::Bne: return retired(s, ir[in.a] != ir[in.b] ? static_cast<uint32_t>(in.c) : s.pc + 1);
    case Opcode::Blt: return retired(s, ir[in.a] < ir[in.b] ? static_cast<uint32_t>(in.c) : s.pc + 1);
    case Opcode::Bge: return retired(s, ir[in.a] >= ir[in.b] ? static_cast<uint32_t>(in.c) : s.pc + 1);
    case Opcode::Jmp: return retired(s, static_cast<uint32_t>(in.a));
    case Opcode::Call:
      s.call_stack.push_back(s.pc + 1);
      return retired(s, static_cast<uint32_t>(in.a));
    case Opcode::Ret: {
      if (s.call_stack.empty()) return trap(s, TrapKind::CallStackUnderflow);
      uint32_t target = s.call_stack.back();
      s.call_stack.pop_back();
      return retired(s, target);
    }
    case Opcode::Halt: {
      s.status = VmStatus::Halted;
      ++s.steps;
      StepEvent ev;
      ev.kind = StepEvent::Kind::Halted;
      return ev;
    }

    case Opcode::Send: {
      int64_t dst = ir[in.a];
      if (dst < 0 || dst >= s.nranks || dst == s.rank) return trap(s, TrapKind::RankOutOfRange);
      StepEvent ev;
      ev.kind = StepEvent::Kind::WantsSend;
      ev.peer = static_cast<int>(dst);
      ev.value = fr[in.b];
      return ev;
    }
    case Opcode::Recv: {
      int64_t src = ir[in.a];
      if (src < 0 || src >= s.nranks || src == s.rank) return trap(s, TrapKind::RankOutOfRange);
      StepEvent ev;
      ev.kind = StepEvent::Kind::WantsRecv;
      ev.peer = static_cast<int>(src);
      ev.reg = static_cast<int>(in.b);
      return ev;
    }
    case Opcode::AllreduceSum: {
      StepEvent ev;
      ev.kind = StepEvent::Kind::WantsCollective;
      ev.collective = CollectiveKind::AllreduceSum;
      ev.reg = static_cast<int>(in.a);
      ev.value = fr[in.a];
      return ev;
    }
    case Opcode::Barrier: {
      StepEvent ev;
      ev.kind = StepEvent::Kind::WantsCollective;
      ev.collective = CollectiveKind::Barrier;
      return ev;
    }
    case Opcode::Rank: ir[in.a] = s.rank; return retired(s, s.pc + 1);
    case Opcode::Nranks: ir[in.a] = s.nranks; return retired(s, s.pc + 1);
  }
  return trap(s, TrapKind::OutOfBounds);  // unreachable
}

void complete_send(VmState& s) {
  ++s.pc;
  ++s.steps;
  s.status = VmStatus::Running;
}

void complete_recv(VmState& s, double value) {
  s.fregs[s.blocked_reg] = value;
  ++s.pc;
  ++s.steps;
  s.status = VmStatus::Running;
}

void complete_collective(VmState& s, double value) {
  if (s.blocked_collective == CollectiveKind::AllreduceSum) s.fregs[s.blocked_reg] = value;
  ++s.pc;
  ++s.steps;
  s.status = VmStatus::Running;
}

RankOutcome run_single(const Program& program, uint64_t step_budget,
                       InjectionHook* hook, ClassPcCensus* census) {
  RankOutcome out;
  out.state = make_vm_state(program, 0, 1);
  VmState& s = out.state;
  while (s.status == VmStatus::Running) {
    if (s.steps >= step_budget) {
      out.kind = RankOutcome::Kind::BudgetExceeded;
      return out;
    }
    StepEvent ev = step(s, program, hook, census);
    switch (ev.kind) {
      case StepEvent::Kind::Retired:
        break;
      case StepEvent::Kind::Halted:
        out.kind = RankOutcome::Kind::Halted;
        return out;
      case StepEvent::Kind::Trapped:
        out.kind = RankOutcome::Kind::Trapped;
        out.trap = ev.trap;
        out.trap_pc = s.pc;
        return out;
      case StepEvent::Kind::WantsCollective:
        // nranks = 1: collectives are identity
        s.blocked_collective = ev.collective;
        s.blocked_reg = ev.reg;
        complete_collective(s, ev.value);
        break;
      case StepEvent::Kind::WantsSend:
      case StepEvent::Kind::WantsRecv:
        // unreachable: send/recv trap at nranks = 1 before requesting
        break;
    }
  }
  if (s.status == VmStatus::Trapped) {
    out.kind = RankOutcome::Kind::Trapped;
    out.trap = s.trap;
    out.trap_pc = s.pc;
  }
  return out;
}

}  // namespace faultline
