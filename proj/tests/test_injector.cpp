#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "faultline/asm.hpp"
#include "faultline/injector.hpp"

using namespace faultline;

namespace {

const char* kFiveFadds =
    "fmovi f0, 1.0\n"
    "li r0, 0\n"
    "li r1, 5\n"
    "loop: fadd f1, f1, f0\n"
    "addi r0, r0, 1\n"
    "blt r0, r1, loop\n"
    "halt\n";

const char* kOneFadd =
    ".verify f0 AUTO 1e-8\n"
    "fmovi f0, 1.0\n"
    "fmovi f1, 0.0\n"
    "fadd f0, f0, f1\n"
    "halt\n";

}  // namespace

TEST_CASE("profile counts five dynamic fadds on one rank") {
  Program p = assemble(kFiveFadds);
  Profile prof = profile(p, 1, OpcodeClass::Fadd, 100000);
  REQUIRE(prof.per_rank_counts.size() == 1);
  CHECK(prof.per_rank_counts[0] == 5);
  CHECK(prof.total() == 5);
}

TEST_CASE("profile of an absent class is zero") {
  Program p = assemble(kFiveFadds);
  Profile prof = profile(p, 1, OpcodeClass::Fmul, 100000);
  CHECK(prof.per_rank_counts[0] == 0);
  CHECK(prof.total() == 0);
}

TEST_CASE("profile of a crashing program is an error") {
  Program p = assemble("spin: jmp spin\n");
  CHECK_THROWS_AS(profile(p, 1, OpcodeClass::Fadd, 1000), InjectError);
}

TEST_CASE("draw_fault on the degenerate space pins rank and k") {
  Profile prof;
  prof.opcode_class = OpcodeClass::Fadd;
  prof.nranks = 1;
  prof.per_rank_counts = {1};
  SplitMix64 rng(42);
  std::set<int> bits_seen;
  for (int i = 0; i < 2000; ++i) {
    FaultSpec s = draw_fault(rng, prof);
    CHECK(s.rank == 0);
    CHECK(s.k == 1);
    CHECK(s.bit >= 0);
    CHECK(s.bit <= 63);
    bits_seen.insert(s.bit);
  }
  CHECK(bits_seen.size() == 64);  // 2000 draws cover all bits w.h.p.
}

TEST_CASE("ranks with zero instances are never drawn") {
  Profile prof;
  prof.opcode_class = OpcodeClass::Fadd;
  prof.nranks = 4;
  prof.per_rank_counts = {10, 0, 0, 0};
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    FaultSpec s = draw_fault(rng, prof);
    CHECK(s.rank == 0);
    CHECK(s.k >= 1);
    CHECK(s.k <= 10);
  }
}

TEST_CASE("an empty fault space is an error") {
  Profile prof;
  prof.nranks = 2;
  prof.per_rank_counts = {0, 0};
  SplitMix64 rng(1);
  CHECK_THROWS_AS(draw_fault(rng, prof), InjectError);
}

TEST_CASE("draw_fault consumes exactly three rng draws") {
  Profile prof;
  prof.nranks = 4;
  prof.per_rank_counts = {3, 5, 7, 9};
  SplitMix64 a(123), b(123);
  draw_fault(a, prof);
  b.next();
  b.next();
  b.next();
  CHECK(a.next() == b.next());  // streams stay aligned
}

TEST_CASE("sign-bit injection on the 1-fadd program") {
  Program p = assemble(kOneFadd);
  FaultSpec spec{0, OpcodeClass::Fadd, 1, 63};
  TrialRecord rec = injected_run(p, 1, spec, 100000);
  CHECK(rec.faulted_pc == 2);
  CHECK(bits_to_double(rec.original_bits) == 1.0);
  CHECK(bits_to_double(rec.corrupted_bits) == -1.0);
  REQUIRE(rec.checksum.has_value());
  CHECK(*rec.checksum == -1.0);
  CHECK(rec.outcome == Outcome::Unclassified);
}

TEST_CASE("bit-0 injection yields the next representable double") {
  Program p = assemble(kOneFadd);
  FaultSpec spec{0, OpcodeClass::Fadd, 1, 0};
  TrialRecord rec = injected_run(p, 1, spec, 100000);
  REQUIRE(rec.checksum.has_value());
  CHECK(*rec.checksum == 1.0000000000000002);
}

TEST_CASE("equal specs give identical records") {
  Program p = assemble(kFiveFadds);
  FaultSpec spec{0, OpcodeClass::Fadd, 3, 17};
  TrialRecord a = injected_run(p, 1, spec, 100000);
  TrialRecord b = injected_run(p, 1, spec, 100000);
  CHECK(a.faulted_pc == b.faulted_pc);
  CHECK(a.original_bits == b.original_bits);
  CHECK(a.corrupted_bits == b.corrupted_bits);
  CHECK(a.steps == b.steps);
  CHECK(a.checksum.has_value() == b.checksum.has_value());
}

TEST_CASE("k beyond the fault-free count is rejected") {
  Program p = assemble(kFiveFadds);
  FaultSpec spec{0, OpcodeClass::Fadd, 6, 0};
  CHECK_THROWS_AS(injected_run(p, 1, spec, 100000), InjectError);
}

TEST_CASE("prefix before the injection point matches the fault-free run") {
  // fault at the 4th of 5 fadds: the first three accumulator values
  // must match the clean run bit for bit
  Program p = assemble(kFiveFadds);
  auto trace_prefix = [&](InjectionHook* hook) {
    VmState st = make_vm_state(p, 0, 1);
    std::vector<uint64_t> acc;
    while (st.status == VmStatus::Running && st.counter(OpcodeClass::Fadd) < 3) {
      step(st, p, hook);
      acc.push_back(double_to_bits(st.fregs[1]));
    }
    return acc;
  };
  InjectionHook hook;
  hook.opcode_class = OpcodeClass::Fadd;
  hook.k = 4;
  hook.bit = 63;
  auto clean = trace_prefix(nullptr);
  auto armed = trace_prefix(&hook);
  CHECK(clean == armed);
  CHECK_FALSE(hook.fired);  // still waiting for instance 4
}

TEST_CASE("injection corrupts the result, not the operands") {
  // fadd f1, f0, f0 with sign flip: f1 becomes -2.0 while f0 stays 1.0
  Program p = assemble("fmovi f0, 1.0\nfadd f1, f0, f0\nhalt\n");
  InjectionHook hook;
  hook.opcode_class = OpcodeClass::Fadd;
  hook.k = 1;
  hook.bit = 63;
  RankOutcome out = run_single(p, 1000, &hook);
  REQUIRE(out.kind == RankOutcome::Kind::Halted);
  CHECK(out.state.fregs[0] == 1.0);
  CHECK(out.state.fregs[1] == -2.0);
}
