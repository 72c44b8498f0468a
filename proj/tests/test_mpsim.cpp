#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <string>

#include "faultline/asm.hpp"
#include "faultline/mpsim.hpp"

using namespace faultline;

TEST_CASE("allreduce of rank ids gives every rank the sum") {
  // the rank id is materialized as a double by repeated fadd of 1.0
  Program p = assemble(
      "rank r0\n"
      "li r1, 0\n"
      "fmovi f0, 0.0\n"
      "fmovi f1, 1.0\n"
      "loop: bge r1, r0, done\n"
      "fadd f0, f0, f1\n"
      "addi r1, r1, 1\n"
      "jmp loop\n"
      "done: allreduce_sum f0\n"
      "halt\n");
  GroupOutcome out = run_group(p, 4, 100000);
  REQUIRE(out.completed());
  for (int r = 0; r < 4; ++r) CHECK(out.ranks[r].fregs[0] == 6.0);
}

TEST_CASE("mutual recv with no senders deadlocks") {
  Program p = assemble(
      "rank r0\n"
      "li r1, 1\n"
      "sub r2, r1, r0\n"  // the other rank id (0<->1)
      "recv r2, f0\n"
      "halt\n");
  GroupOutcome out = run_group(p, 2, 100000);
  REQUIRE_FALSE(out.completed());
  CHECK(out.crash == GroupOutcome::CrashReason::Deadlock);
}

TEST_CASE("point-to-point FIFO delivery") {
  Program p = assemble(
      "rank r0\n"
      "li r1, 0\n"
      "bne r0, r1, receiver\n"
      "fmovi f0, 3.5\n"
      "li r2, 1\n"
      "send r2, f0\n"
      "halt\n"
      "receiver: recv r1, f1\n"
      "halt\n");
  GroupOutcome out = run_group(p, 2, 100000);
  REQUIRE(out.completed());
  CHECK(out.ranks[1].fregs[1] == 3.5);
  CHECK(out.undelivered_messages == 0);
}

TEST_CASE("messages between one pair stay ordered") {
  Program p = assemble(
      "rank r0\n"
      "li r1, 0\n"
      "bne r0, r1, receiver\n"
      "fmovi f0, 1.0\n"
      "fmovi f1, 2.0\n"
      "li r2, 1\n"
      "send r2, f0\n"
      "send r2, f1\n"
      "halt\n"
      "receiver: recv r1, f2\n"
      "recv r1, f3\n"
      "halt\n");
  GroupOutcome out = run_group(p, 2, 100000);
  REQUIRE(out.completed());
  CHECK(out.ranks[1].fregs[2] == 1.0);
  CHECK(out.ranks[1].fregs[3] == 2.0);
}

TEST_CASE("send to an out-of-range rank traps the whole group") {
  Program p = assemble(
      "fmovi f0, 1.0\n"
      "li r0, 9\n"
      "send r0, f0\n"
      "halt\n");
  GroupOutcome out = run_group(p, 2, 100000);
  REQUIRE_FALSE(out.completed());
  CHECK(out.crash == GroupOutcome::CrashReason::Trap);
  CHECK(out.trap_kind == TrapKind::RankOutOfRange);
  CHECK(out.trap_pc == 2);
}

TEST_CASE("mismatched collectives deadlock rather than hang") {
  Program p = assemble(
      "rank r0\n"
      "li r1, 0\n"
      "fmovi f0, 1.0\n"
      "bne r0, r1, other\n"
      "allreduce_sum f0\n"
      "halt\n"
      "other: barrier\n"
      "halt\n");
  GroupOutcome out = run_group(p, 2, 100000);
  REQUIRE_FALSE(out.completed());
  CHECK(out.crash == GroupOutcome::CrashReason::Deadlock);
}

TEST_CASE("per-rank budget exhaustion crashes the group") {
  Program p = assemble("spin: jmp spin\n");
  GroupOutcome out = run_group(p, 2, 500);
  REQUIRE_FALSE(out.completed());
  CHECK(out.crash == GroupOutcome::CrashReason::BudgetExceeded);
}

TEST_CASE("serial consistency: run_group at 1 rank equals run_single") {
  Program p = assemble(
      "fmovi f0, 0.5\n"
      "li r0, 0\n"
      "li r1, 50\n"
      "loop: fadd f1, f1, f0\n"
      "fmul f2, f1, f0\n"
      "addi r0, r0, 1\n"
      "blt r0, r1, loop\n"
      "allreduce_sum f1\n"
      "barrier\n"
      "halt\n");
  RankOutcome single = run_single(p, 100000);
  GroupOutcome group = run_group(p, 1, 100000);
  REQUIRE(single.kind == RankOutcome::Kind::Halted);
  REQUIRE(group.completed());
  for (int i = 0; i < 32; ++i)
    CHECK(double_to_bits(group.ranks[0].fregs[i]) == double_to_bits(single.state.fregs[i]));
  CHECK(group.ranks[0].steps == single.state.steps);
}

TEST_CASE("interleaving is deterministic (trace hash over two runs)") {
  Program p = assemble(
      "rank r0\n"
      "li r1, 0\n"
      "fmovi f0, 1.25\n"
      "bne r0, r1, other\n"
      "li r2, 1\n"
      "send r2, f0\n"
      "allreduce_sum f0\n"
      "halt\n"
      "other: recv r1, f1\n"
      "allreduce_sum f0\n"
      "halt\n");
  // run_group exposes no step callback, so hash the observable end state
  auto fingerprint = [&]() {
    GroupOutcome out = run_group(p, 2, 100000);
    REQUIRE(out.completed());
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](uint64_t v) { h = (h ^ v) * 1099511628211ull; };
    for (const VmState& st : out.ranks) {
      mix(st.steps);
      for (double f : st.fregs) mix(double_to_bits(f));
      for (int64_t r : st.iregs) mix(static_cast<uint64_t>(r));
    }
    mix(out.total_steps);
    return h;
  };
  CHECK(fingerprint() == fingerprint());
}

TEST_CASE("allreduce sums in ascending rank order (fixed FP association)") {
  // values whose sum depends on association: ((a+b)+c)+d
  Program p = assemble(
      ".data 0 1e16 1.0 -1e16 2.0\n"
      "rank r0\n"
      "fld f0, [r0]\n"
      "allreduce_sum f0\n"
      "halt\n");
  GroupOutcome out = run_group(p, 4, 100000);
  REQUIRE(out.completed());
  double expected = ((1e16 + 1.0) + -1e16) + 2.0;  // = 2.0 under RNE
  for (int r = 0; r < 4; ++r)
    CHECK(double_to_bits(out.ranks[r].fregs[0]) == double_to_bits(expected));
}
