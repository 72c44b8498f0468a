#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "faultline/isa.hpp"

namespace faultline {

struct KernelParams {
  int iterations = 0;  // 0 = kernel default
};

struct KernelSpec {
  std::string name;
  std::string source;  // .fasm text
  // structural notes, resolved to pcs after assembly
  uint32_t dominant_pc = 0;              // the hot accumulate instruction
  uint32_t guarded_begin = 0;            // [begin, end) reachable only at nranks > 1
  uint32_t guarded_end = 0;
  double verify_eps = 1e-8;

  bool pc_is_guarded(uint32_t pc) const { return pc >= guarded_begin && pc < guarded_end; }
};

std::vector<std::string> kernel_names();  // {"cg", "ft", "bt"}
bool is_kernel_name(const std::string& name);

// Returns the assembled program plus its structural spec. Throws
// std::invalid_argument for unknown names.
std::pair<Program, KernelSpec> build_kernel(const std::string& name,
                                            const KernelParams& params = {});

// Raw .fasm text of a bundled kernel (as shipped in kernels/).
const std::string& kernel_source(const std::string& name);

}  // namespace faultline
