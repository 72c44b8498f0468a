#include "faultline/asm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

#include "faultline/vm.hpp"

namespace faultline {

namespace {

struct Signature {
  Opcode op;
  const char* kinds;  // I=ireg F=freg M=[rN(+imm)] L=label/pc X=int imm B=float imm
};

const std::map<std::string, Signature>& signatures() {
  static const std::map<std::string, Signature> table = {
      {"add", {Opcode::Add, "III"}},   {"sub", {Opcode::Sub, "III"}},
      {"mul", {Opcode::Mul, "III"}},   {"div", {Opcode::Div, "III"}},
      {"addi", {Opcode::Addi, "IIX"}}, {"ld", {Opcode::Ld, "IM"}},
      {"st", {Opcode::St, "IM"}},      {"mov", {Opcode::Mov, "II"}},
      {"li", {Opcode::Li, "IX"}},      {"fadd", {Opcode::Fadd, "FFF"}},
      {"fmul", {Opcode::Fmul, "FFF"}}, {"fsub", {Opcode::Fsub, "FFF"}},
      {"fdiv", {Opcode::Fdiv, "FFF"}}, {"fld", {Opcode::Fld, "FM"}},
      {"fst", {Opcode::Fst, "FM"}},    {"fmovi", {Opcode::Fmovi, "FB"}},
      {"beq", {Opcode::Beq, "IIL"}},   {"bne", {Opcode::Bne, "IIL"}},
      {"blt", {Opcode::Blt, "IIL"}},   {"bge", {Opcode::Bge, "IIL"}},
      {"jmp", {Opcode::Jmp, "L"}},     {"call", {Opcode::Call, "L"}},
      {"ret", {Opcode::Ret, ""}},      {"halt", {Opcode::Halt, ""}},
      {"send", {Opcode::Send, "IF"}},  {"recv", {Opcode::Recv, "IF"}},
      {"allreduce_sum", {Opcode::AllreduceSum, "F"}},
      {"barrier", {Opcode::Barrier, ""}},
      {"rank", {Opcode::Rank, "I"}},   {"nranks", {Opcode::Nranks, "I"}},
  };
  return table;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_ident(const std::string& s) {
  if (s.empty() || (!std::isalpha((unsigned char)s[0]) && s[0] != '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

int64_t parse_int(const std::string& tok, int line) {
  std::string t = tok;
  bool neg = false;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  uint64_t v = 0;
  std::from_chars_result res{};
  if (t.rfind("0x", 0) == 0 || t.rfind("0X", 0) == 0)
    res = std::from_chars(t.data() + 2, t.data() + t.size(), v, 16);
  else
    res = std::from_chars(t.data(), t.data() + t.size(), v, 10);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw AsmError(line, "malformed integer '" + tok + "'");
  return neg ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
}

bool looks_like_float(const std::string& t) {
  return t.find('.') != std::string::npos || t.find('e') != std::string::npos ||
         t.find('E') != std::string::npos || t.find("inf") != std::string::npos ||
         t.find("nan") != std::string::npos;
}

uint64_t parse_float_bits(const std::string& tok, int line) {
  if (tok.rfind("0x", 0) == 0 || tok.rfind("0X", 0) == 0)
    return static_cast<uint64_t>(parse_int(tok, line));
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw AsmError(line, "malformed float immediate '" + tok + "'");
  return double_to_bits(v);
}

// .data words: 0x raw bits, plain integer, or decimal float
uint64_t parse_data_word(const std::string& tok, int line) {
  if (tok.rfind("0x", 0) == 0 || tok.rfind("0X", 0) == 0)
    return static_cast<uint64_t>(parse_int(tok, line));
  if (looks_like_float(tok)) return parse_float_bits(tok, line);
  return static_cast<uint64_t>(parse_int(tok, line));
}

int parse_reg(const std::string& tok, char prefix, int max, int line) {
  if (tok.size() < 2 || tok[0] != prefix)
    throw AsmError(line, std::string("expected ") + (prefix == 'f' ? "float" : "integer") +
                             " register, got '" + tok + "'");
  int idx = static_cast<int>(parse_int(tok.substr(1), line));
  if (idx < 0 || idx >= max)
    throw AsmError(line, "register index out of range in '" + tok + "'");
  return idx;
}

struct Fixup {
  size_t instr;
  int slot;  // 0=a 1=b 2=c
  std::string label;
  int line;
};

void set_slot(Instruction& in, int slot, int64_t v) {
  if (slot == 0) in.a = v;
  else if (slot == 1) in.b = v;
  else in.c = v;
}

bool is_listing_pc(const std::string& tok) {
  if (tok.size() != 10 || tok.rfind("0x", 0) != 0) return false;
  return std::all_of(tok.begin() + 2, tok.end(),
                     [](unsigned char c) { return std::isxdigit(c); });
}

}  // namespace

Program assemble(const std::string& source, const std::string& file_name) {
  Program prog;
  std::map<std::string, int> label_lines;  // for duplicate diagnostics
  std::vector<Fixup> fixups;
  std::string entry_label;
  int entry_line = 0;
  bool have_verify = false;
  bool have_mem = false;
  uint64_t mem_directive = 0;
  uint64_t max_data_addr = 0;
  bool have_data = false;
  SourceLoc current_loc;
  bool have_loc = false;

  std::istringstream input(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(input, raw)) {
    ++line_no;
    if (size_t sc = raw.find(';'); sc != std::string::npos) raw.resize(sc);
    std::string line = trim(raw);
    if (line.empty()) continue;

    if (line[0] == '.') {
      auto toks = split_ws(line);
      const std::string& dir = toks[0];
      if (dir == ".loc") {
        if (toks.size() != 3) throw AsmError(line_no, ".loc expects <file> <line>");
        int l = static_cast<int>(parse_int(toks[2], line_no));
        if (l < 1) throw AsmError(line_no, ".loc line must be >= 1");
        current_loc = {toks[1], l};
        have_loc = true;
      } else if (dir == ".data") {
        if (toks.size() < 3) throw AsmError(line_no, ".data expects <addr> <word>...");
        uint64_t addr = static_cast<uint64_t>(parse_int(toks[1], line_no));
        for (size_t i = 2; i < toks.size(); ++i) {
          uint64_t word = parse_data_word(toks[i], line_no);
          if (prog.data.count(addr))
            throw AsmError(line_no, ".data address " + std::to_string(addr) + " set twice");
          prog.data[addr] = word;
          max_data_addr = std::max(max_data_addr, addr);
          have_data = true;
          ++addr;
        }
      } else if (dir == ".mem") {
        if (toks.size() != 2) throw AsmError(line_no, ".mem expects <words>");
        mem_directive = static_cast<uint64_t>(parse_int(toks[1], line_no));
        have_mem = true;
      } else if (dir == ".verify") {
        if (have_verify) throw AsmError(line_no, "duplicate .verify");
        if (toks.size() != 4) throw AsmError(line_no, ".verify expects <freg> <golden|AUTO> <rel-eps>");
        have_verify = true;
        prog.verify.freg = parse_reg(toks[1], 'f', 32, line_no);
        if (toks[2] == "AUTO") {
          prog.verify.golden_auto = true;
        } else {
          prog.verify.golden_auto = false;
          prog.verify.golden = bits_to_double(parse_float_bits(toks[2], line_no));
        }
        char* end = nullptr;
        prog.verify.rel_eps = std::strtod(toks[3].c_str(), &end);
        if (end != toks[3].c_str() + toks[3].size() || !(prog.verify.rel_eps > 0))
          throw AsmError(line_no, "malformed .verify tolerance '" + toks[3] + "'");
      } else if (dir == ".entry") {
        if (toks.size() != 2) throw AsmError(line_no, ".entry expects <label>");
        entry_label = toks[1];
        entry_line = line_no;
      } else {
        throw AsmError(line_no, "unknown directive '" + dir + "'");
      }
      continue;
    }

    // labels, possibly followed by an instruction on the same line
    for (;;) {
      size_t colon = line.find(':');
      if (colon == std::string::npos) break;
      std::string head = trim(line.substr(0, colon));
      if (!is_ident(head)) break;  // not a label (e.g. a listing source suffix)
      if (label_lines.count(head))
        throw AsmError(line_no, "duplicate label '" + head + "' (first defined on line " +
                                    std::to_string(label_lines[head]) + ")");
      label_lines[head] = line_no;
      prog.symbols[head] = prog.size();
      line = trim(line.substr(colon + 1));
      if (line.empty()) break;
    }
    if (line.empty()) continue;

    auto toks = split_ws(line);
    bool listing_line = is_listing_pc(toks[0]);
    if (listing_line) {
      // re-assembling a listing: drop the pc column and the file:line column
      line = trim(line.substr(toks[0].size()));
      size_t last_ws = line.find_last_of(" \t");
      if (last_ws != std::string::npos) {
        std::string tail = line.substr(last_ws + 1);
        size_t colon = tail.rfind(':');
        if (colon != std::string::npos && colon + 1 < tail.size() &&
            std::all_of(tail.begin() + colon + 1, tail.end(),
                        [](unsigned char c) { return std::isdigit(c); }))
          line = trim(line.substr(0, last_ws));
      }
      toks = split_ws(line);
      if (toks.empty()) throw AsmError(line_no, "empty listing line");
    }

    std::string mnemonic = toks[0];
    auto sig_it = signatures().find(mnemonic);
    if (sig_it == signatures().end())
      throw AsmError(line_no, "unknown mnemonic '" + mnemonic + "'");
    const Signature& sig = sig_it->second;

    std::string rest = trim(line.substr(line.find(mnemonic) + mnemonic.size()));
    std::vector<std::string> ops = rest.empty() ? std::vector<std::string>{} : split_operands(rest);
    size_t arity = std::string(sig.kinds).size();
    if (ops.size() != arity)
      throw AsmError(line_no, mnemonic + " expects " + std::to_string(arity) +
                                  " operand(s), got " + std::to_string(ops.size()));

    Instruction in;
    in.pc = prog.size();
    in.op = sig.op;
    int slot = 0;
    for (size_t i = 0; i < arity; ++i) {
      const std::string& tok = ops[i];
      if (tok.empty()) throw AsmError(line_no, "empty operand for " + mnemonic);
      switch (sig.kinds[i]) {
        case 'I': set_slot(in, slot++, parse_reg(tok, 'r', 16, line_no)); break;
        case 'F': set_slot(in, slot++, parse_reg(tok, 'f', 32, line_no)); break;
        case 'X': set_slot(in, slot++, parse_int(tok, line_no)); break;
        case 'B': set_slot(in, slot++, static_cast<int64_t>(parse_float_bits(tok, line_no))); break;
        case 'M': {
          if (tok.size() < 4 || tok.front() != '[' || tok.back() != ']')
            throw AsmError(line_no, "expected memory operand [rN] or [rN+imm], got '" + tok + "'");
          std::string inner = trim(tok.substr(1, tok.size() - 2));
          size_t sign = inner.find_first_of("+-");
          int64_t off = 0;
          std::string reg_tok = inner;
          if (sign != std::string::npos) {
            reg_tok = trim(inner.substr(0, sign));
            off = parse_int(trim(inner.substr(sign)), line_no);
          }
          set_slot(in, slot++, parse_reg(reg_tok, 'r', 16, line_no));
          set_slot(in, slot++, off);
          break;
        }
        case 'L': {
          if (is_ident(tok)) {
            fixups.push_back({prog.instructions.size(), slot, tok, line_no});
            set_slot(in, slot++, 0);
          } else {
            set_slot(in, slot++, parse_int(tok, line_no));
          }
          break;
        }
      }
    }
    prog.instructions.push_back(in);
    prog.debug.push_back(have_loc ? current_loc : SourceLoc{file_name, line_no});
  }

  for (const Fixup& fx : fixups) {
    auto it = prog.symbols.find(fx.label);
    if (it == prog.symbols.end())
      throw AsmError(fx.line, "undefined label '" + fx.label + "'");
    set_slot(prog.instructions[fx.instr], fx.slot, it->second);
  }
  // branch/jump/call targets must land on a real instruction
  for (const Instruction& in : prog.instructions) {
    int64_t target = -1;
    switch (in.op) {
      case Opcode::Beq: case Opcode::Bne: case Opcode::Blt: case Opcode::Bge:
        target = in.c; break;
      case Opcode::Jmp: case Opcode::Call:
        target = in.a; break;
      default: break;
    }
    if (target >= 0 && static_cast<uint64_t>(target) >= prog.instructions.size())
      throw AsmError(1, "control-flow target " + std::to_string(target) +
                            " outside program (size " + std::to_string(prog.size()) + ")");
  }

  if (!entry_label.empty()) {
    auto it = prog.symbols.find(entry_label);
    if (it == prog.symbols.end())
      throw AsmError(entry_line, "undefined label '" + entry_label + "'");
    prog.entry = it->second;
  }
  if (prog.entry >= prog.size() && prog.size() > 0)
    throw AsmError(1, "entry point outside program");

  prog.mem_words = have_data ? max_data_addr + 1 : 0;
  if (have_mem) {
    if (mem_directive < prog.mem_words)
      throw AsmError(1, ".mem smaller than the data segment");
    prog.mem_words = mem_directive;
  }
  return prog;
}

namespace {

std::string operand_text(const Instruction& in) {
  char buf[96];
  auto ireg = [](int64_t r) { return "r" + std::to_string(r); };
  auto freg = [](int64_t r) { return "f" + std::to_string(r); };
  auto memop = [&](int64_t r, int64_t off) {
    return off == 0 ? "[" + ireg(r) + "]"
                    : "[" + ireg(r) + (off > 0 ? "+" : "") + std::to_string(off) + "]";
  };
  auto pc_hex = [&](int64_t v) {
    std::snprintf(buf, sizeof buf, "0x%08llX", (unsigned long long)v);
    return std::string(buf);
  };
  auto bits_hex = [&](int64_t v) {
    std::snprintf(buf, sizeof buf, "0x%016llX", (unsigned long long)v);
    return std::string(buf);
  };
  switch (in.op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Div:
      return ireg(in.a) + ", " + ireg(in.b) + ", " + ireg(in.c);
    case Opcode::Addi: return ireg(in.a) + ", " + ireg(in.b) + ", " + std::to_string(in.c);
    case Opcode::Ld: case Opcode::St: return ireg(in.a) + ", " + memop(in.b, in.c);
    case Opcode::Mov: return ireg(in.a) + ", " + ireg(in.b);
    case Opcode::Li: return ireg(in.a) + ", " + std::to_string(in.b);
    case Opcode::Fadd: case Opcode::Fmul: case Opcode::Fsub: case Opcode::Fdiv:
      return freg(in.a) + ", " + freg(in.b) + ", " + freg(in.c);
    case Opcode::Fld: case Opcode::Fst: return freg(in.a) + ", " + memop(in.b, in.c);
    case Opcode::Fmovi: return freg(in.a) + ", " + bits_hex(in.b);
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt: case Opcode::Bge:
      return ireg(in.a) + ", " + ireg(in.b) + ", " + pc_hex(in.c);
    case Opcode::Jmp: case Opcode::Call: return pc_hex(in.a);
    case Opcode::Ret: case Opcode::Halt: case Opcode::Barrier: return "";
    case Opcode::Send: case Opcode::Recv: return ireg(in.a) + ", " + freg(in.b);
    case Opcode::AllreduceSum: return freg(in.a);
    case Opcode::Rank: case Opcode::Nranks: return ireg(in.a);
  }
  return "";
}

}  // namespace

std::string format_listing(const Program& program) {
  std::string out;
  char buf[64];
  for (uint32_t pc = 0; pc < program.size(); ++pc) {
    const Instruction& in = program.instructions[pc];
    std::snprintf(buf, sizeof buf, "0x%08X  %-14s", pc, opcode_name(in.op));
    std::string line = buf;
    std::string ops = operand_text(in);
    line += ops;
    const SourceLoc& loc = program.loc(pc);
    size_t pad = line.size() < 56 ? 56 - line.size() : 2;
    line.append(pad, ' ');
    line += loc.file + ":" + std::to_string(loc.line);
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace faultline
