#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace faultline {

enum class Opcode {
  // integer
  Add, Sub, Mul, Div, Addi, Ld, St, Mov, Li,
  // floating point
  Fadd, Fmul, Fsub, Fdiv, Fld, Fst, Fmovi,
  // control
  Beq, Bne, Blt, Bge, Jmp, Call, Ret, Halt,
  // messaging
  Send, Recv, AllreduceSum, Barrier, Rank, Nranks,
};

const char* opcode_name(Opcode op);

// Injectable instruction families.
enum class OpcodeClass { Fadd, Fmul, Fsub, Fdiv };
inline constexpr int kNumOpcodeClasses = 4;

const char* opcode_class_name(OpcodeClass c);
std::optional<OpcodeClass> opcode_class_from_name(const std::string& name);

// Maps a floating-point arithmetic opcode to its class; nullopt for
// everything else (loads, moves, integer ops, ...).
std::optional<OpcodeClass> classify_opcode(Opcode op);

struct SourceLoc {
  std::string file;
  int line = 1;  // 1-based

  bool operator==(const SourceLoc&) const = default;
};

// One decoded instruction. Operand meaning depends on the opcode:
// register indices, immediates and resolved branch targets all live in
// the three int64 slots, pre-validated by the assembler.
struct Instruction {
  uint32_t pc = 0;
  Opcode op = Opcode::Halt;
  int64_t a = 0;
  int64_t b = 0;
  int64_t c = 0;
};

struct VerificationSpec {
  int freg = 0;            // checksum register
  bool golden_auto = true; // golden taken from a fault-free run
  double golden = 0.0;     // used when !golden_auto
  double rel_eps = 1e-8;
};

struct Program {
  std::vector<Instruction> instructions;
  std::map<uint64_t, uint64_t> data;  // address -> initial word
  uint64_t mem_words = 0;             // memory size; covers data by construction
  uint32_t entry = 0;
  std::vector<SourceLoc> debug;       // debug[pc], total by construction
  int nranks_default = 1;
  VerificationSpec verify;
  std::map<std::string, uint32_t> symbols;  // label -> pc

  const SourceLoc& loc(uint32_t pc) const;
  uint32_t size() const { return static_cast<uint32_t>(instructions.size()); }
};

}  // namespace faultline
