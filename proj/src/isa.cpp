#include "faultline/isa.hpp"

#include <stdexcept>

namespace faultline {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::Addi: return "addi";
    case Opcode::Ld: return "ld";
    case Opcode::St: return "st";
    case Opcode::Mov: return "mov";
    case Opcode::Li: return "li";
    case Opcode::Fadd: return "fadd";
    case Opcode::Fmul: return "fmul";
    case Opcode::Fsub: return "fsub";
    case Opcode::Fdiv: return "fdiv";
    case Opcode::Fld: return "fld";
    case Opcode::Fst: return "fst";
    case Opcode::Fmovi: return "fmovi";
    case Opcode::Beq: return "beq";
    case Opcode::Bne: return "bne";
    case Opcode::Blt: return "blt";
    case Opcode::Bge: return "bge";
    case Opcode::Jmp: return "jmp";
    case Opcode::Call: return "call";
    case Opcode::Ret: return "ret";
    case Opcode::Halt: return "halt";
    case Opcode::Send: return "send";
    case Opcode::Recv: return "recv";
    case Opcode::AllreduceSum: return "allreduce_sum";
    case Opcode::Barrier: return "barrier";
    case Opcode::Rank: return "rank";
    case Opcode::Nranks: return "nranks";
  }
  return "?";
}

const char* opcode_class_name(OpcodeClass c) {
  switch (c) {
    case OpcodeClass::Fadd: return "fadd";
    case OpcodeClass::Fmul: return "fmul";
    case OpcodeClass::Fsub: return "fsub";
    case OpcodeClass::Fdiv: return "fdiv";
  }
  return "?";
}

std::optional<OpcodeClass> opcode_class_from_name(const std::string& name) {
  if (name == "fadd") return OpcodeClass::Fadd;
  if (name == "fmul") return OpcodeClass::Fmul;
  if (name == "fsub") return OpcodeClass::Fsub;
  if (name == "fdiv") return OpcodeClass::Fdiv;
  return std::nullopt;
}

std::optional<OpcodeClass> classify_opcode(Opcode op) {
  switch (op) {
    case Opcode::Fadd: return OpcodeClass::Fadd;
    case Opcode::Fmul: return OpcodeClass::Fmul;
    case Opcode::Fsub: return OpcodeClass::Fsub;
    case Opcode::Fdiv: return OpcodeClass::Fdiv;
    default: return std::nullopt;
  }
}

const SourceLoc& Program::loc(uint32_t pc) const {
  if (pc >= debug.size()) throw std::out_of_range("pc out of program bounds");
  return debug[pc];
}

}  // namespace faultline
