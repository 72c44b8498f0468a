#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "faultline/asm.hpp"
#include "faultline/vm.hpp"

using namespace faultline;

namespace {

RankOutcome run(const std::string& src, uint64_t budget = 100000,
                InjectionHook* hook = nullptr) {
  Program p = assemble(src);
  return run_single(p, budget, hook);
}

}  // namespace

TEST_CASE("fadd computes the exact sum and bumps the class counter") {
  auto out = run(
      "fmovi f0, 1.5\n"
      "fmovi f1, 2.5\n"
      "fadd f2, f0, f1\n"
      "halt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(out.state.fregs[2] == 4.0);
  CHECK(out.state.counter(OpcodeClass::Fadd) == 1);
  CHECK(out.state.counter(OpcodeClass::Fmul) == 0);
}

TEST_CASE("fmul squares in place") {
  auto out = run("fmovi f0, 3.0\nfmul f0, f0, f0\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(out.state.fregs[0] == 9.0);
}

TEST_CASE("hook at the next fadd flips the sign bit before writeback") {
  InjectionHook hook;
  hook.opcode_class = OpcodeClass::Fadd;
  hook.k = 1;
  hook.bit = 63;
  auto out = run("fmovi f0, 1.0\nfmovi f1, 0.0\nfadd f2, f0, f1\nhalt\n", 1000, &hook);
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(hook.fired);
  CHECK(hook.fault_pc == 2);
  CHECK(bits_to_double(hook.original_bits) == 1.0);
  CHECK(out.state.fregs[2] == -1.0);
}

TEST_CASE("hook fires at most once even when more instances follow") {
  InjectionHook hook;
  hook.opcode_class = OpcodeClass::Fadd;
  hook.k = 1;
  hook.bit = 63;
  auto out = run(
      "fmovi f0, 1.0\n"
      "fadd f1, f0, f0\n"  // corrupted: 2.0 -> -2.0
      "fadd f2, f1, f0\n"  // runs clean on the corrupted input
      "halt\n",
      1000, &hook);
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(out.state.fregs[1] == -2.0);
  CHECK(out.state.fregs[2] == -1.0);
  CHECK(out.state.counter(OpcodeClass::Fadd) == 2);
}

TEST_CASE("class counters agree with a retired-opcode trace") {
  Program p = assemble(
      "fmovi f0, 2.0\n"
      "li r0, 0\n"
      "li r1, 5\n"
      "loop: fadd f1, f1, f0\n"
      "fmul f2, f1, f0\n"
      "addi r0, r0, 1\n"
      "blt r0, r1, loop\n"
      "fdiv f3, f1, f0\n"
      "halt\n");
  VmState st = make_vm_state(p, 0, 1);
  std::vector<Opcode> trace;
  while (st.status == VmStatus::Running) {
    Opcode op = p.instructions[st.pc].op;
    StepEvent ev = step(st, p);
    if (ev.kind == StepEvent::Kind::Retired || ev.kind == StepEvent::Kind::Halted)
      trace.push_back(op);
  }
  auto count = [&](Opcode op) {
    uint64_t n = 0;
    for (Opcode t : trace)
      if (t == op) ++n;
    return n;
  };
  CHECK(st.counter(OpcodeClass::Fadd) == count(Opcode::Fadd));
  CHECK(st.counter(OpcodeClass::Fmul) == count(Opcode::Fmul));
  CHECK(st.counter(OpcodeClass::Fdiv) == count(Opcode::Fdiv));
  CHECK(st.counter(OpcodeClass::Fadd) == 5);
  CHECK(st.steps == trace.size());
}

TEST_CASE("load at mem size traps OutOfBounds") {
  auto out = run(".mem 4\nli r0, 4\nld r1, [r0]\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Trapped);
  CHECK(out.trap == TrapKind::OutOfBounds);
  CHECK(out.trap_pc == 1);
}

TEST_CASE("negative address traps OutOfBounds") {
  auto out = run(".mem 4\nli r0, -1\nst r0, [r0]\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Trapped);
  CHECK(out.trap == TrapKind::OutOfBounds);
}

TEST_CASE("integer divide by zero traps") {
  auto out = run("li r0, 7\nli r1, 0\ndiv r2, r0, r1\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Trapped);
  CHECK(out.trap == TrapKind::IntDivZero);
}

TEST_CASE("NaN and infinity propagate without trapping") {
  auto out = run(
      "fmovi f0, 1.0\n"
      "fmovi f1, 0.0\n"
      "fdiv f2, f0, f1\n"   // +inf
      "fsub f3, f2, f2\n"   // inf - inf = NaN
      "fadd f4, f3, f0\n"   // NaN propagates
      "halt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(std::isinf(out.state.fregs[2]));
  CHECK(std::isnan(out.state.fregs[3]));
  CHECK(std::isnan(out.state.fregs[4]));
}

TEST_CASE("infinite loop exhausts the budget") {
  auto out = run("spin: jmp spin\nhalt\n", 1000);
  CHECK(out.kind == RankOutcome::Kind::BudgetExceeded);
}

TEST_CASE("send at nranks 1 traps as a rank-range error") {
  auto out = run("fmovi f0, 1.0\nli r0, 0\nsend r0, f0\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Trapped);
  CHECK(out.trap == TrapKind::RankOutOfRange);
}

TEST_CASE("collectives at nranks 1 are identity") {
  auto out = run("fmovi f0, 2.5\nallreduce_sum f0\nbarrier\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(out.state.fregs[0] == 2.5);
}

TEST_CASE("ret with an empty call stack traps") {
  auto out = run("ret\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Trapped);
  CHECK(out.trap == TrapKind::CallStackUnderflow);
}

TEST_CASE("call and ret round-trip") {
  auto out = run(
      ".entry main\n"
      "fn: fmovi f0, 7.0\nret\n"
      "main: call fn\nhalt\n");
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(out.state.fregs[0] == 7.0);
}

TEST_CASE("run_single is bit-deterministic across repeats") {
  Program p = assemble(
      "fmovi f0, 0.1\n"
      "fmovi f1, 0.2\n"
      "li r0, 0\n"
      "li r1, 100\n"
      "loop: fadd f2, f2, f0\n"
      "fmul f3, f2, f1\n"
      "addi r0, r0, 1\n"
      "blt r0, r1, loop\n"
      "halt\n");
  auto a = run_single(p, 100000);
  auto b = run_single(p, 100000);
  REQUIRE(a.kind == RankOutcome::Kind::Halted);
  CHECK(double_to_bits(a.state.fregs[2]) == double_to_bits(b.state.fregs[2]));
  CHECK(double_to_bits(a.state.fregs[3]) == double_to_bits(b.state.fregs[3]));
  CHECK(a.state.steps == b.state.steps);
}

TEST_CASE("pc-indexed census counts retired instances per site") {
  Program p = assemble(
      "fmovi f0, 1.0\n"
      "li r0, 0\n"
      "li r1, 3\n"
      "loop: fadd f1, f1, f0\n"
      "fadd f2, f2, f0\n"
      "addi r0, r0, 1\n"
      "blt r0, r1, loop\n"
      "halt\n");
  ClassPcCensus census;
  census.opcode_class = OpcodeClass::Fadd;
  auto out = run_single(p, 100000, nullptr, &census);
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(census.counts.at(3) == 3);
  CHECK(census.counts.at(4) == 3);
  CHECK(census.counts.size() == 2);
}
