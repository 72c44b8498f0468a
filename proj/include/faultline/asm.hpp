#pragma once

#include <stdexcept>
#include <string>

#include "faultline/isa.hpp"

namespace faultline {

struct AsmError : std::runtime_error {
  int line;
  AsmError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Assembles .fasm text into a Program. Fails atomically with an AsmError
// carrying the offending source line.
//
// Grammar (line oriented):
//   ; comment
//   label:
//   mnemonic op1, op2, op3
//   .loc <file> <line>
//   .data <addr> <word>...        words: integer, 0x raw bits, or decimal float
//   .mem <words>
//   .verify <freg> <golden|AUTO> <rel-eps>
//   .entry <label>
// Registers f0-f31 and r0-r15; memory operands [rN] or [rN+imm]; float
// immediates in decimal or 0x raw-bits form.
Program assemble(const std::string& source, const std::string& file_name = "<input>");

// One line per instruction: pc (8 hex digits), mnemonic, operands, file:line.
// Re-assembles to the same instruction list for directive-free programs.
std::string format_listing(const Program& program);

}  // namespace faultline
