#include "faultline/kernels.hpp"

#include <stdexcept>

#include "faultline/asm.hpp"

namespace faultline {

namespace detail {
extern const char* const kCgSource;
extern const char* const kFtSource;
extern const char* const kBtSource;
}  // namespace detail

std::vector<std::string> kernel_names() { return {"cg", "ft", "bt"}; }

bool is_kernel_name(const std::string& name) {
  return name == "cg" || name == "ft" || name == "bt";
}

const std::string& kernel_source(const std::string& name) {
  static const std::string cg = detail::kCgSource;
  static const std::string ft = detail::kFtSource;
  static const std::string bt = detail::kBtSource;
  if (name == "cg") return cg;
  if (name == "ft") return ft;
  if (name == "bt") return bt;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

namespace {

uint32_t symbol(const Program& p, const std::string& name) {
  auto it = p.symbols.find(name);
  if (it == p.symbols.end())
    throw std::logic_error("kernel is missing the '" + name + "' label");
  return it->second;
}

// cg keeps its iteration count in a data word so callers can rescale it
constexpr uint64_t kCgIterationsSlot = 1699;

}  // namespace

std::pair<Program, KernelSpec> build_kernel(const std::string& name,
                                            const KernelParams& params) {
  Program prog = assemble(kernel_source(name), name + ".fasm");

  KernelSpec spec;
  spec.name = name;
  spec.source = kernel_source(name);
  spec.verify_eps = prog.verify.rel_eps;

  if (name == "cg") {
    spec.dominant_pc = symbol(prog, "mv_acc");
    spec.guarded_begin = symbol(prog, "rs_par");
    spec.guarded_end = symbol(prog, "rs_done");
    if (params.iterations != 0) {
      if (params.iterations < 1 || params.iterations > 1000)
        throw std::invalid_argument("cg iterations must be in 1..1000");
      prog.data[kCgIterationsSlot] = static_cast<uint64_t>(params.iterations);
    }
  } else if (name == "ft") {
    spec.dominant_pc = symbol(prog, "bf_are");
    if (params.iterations != 0)
      throw std::invalid_argument("ft takes no iteration parameter");
  } else if (name == "bt") {
    spec.dominant_pc = symbol(prog, "el_acc_0_1");
    if (params.iterations != 0)
      throw std::invalid_argument("bt takes no iteration parameter");
  } else {
    throw std::invalid_argument("unknown kernel '" + name + "'");
  }
  return {std::move(prog), std::move(spec)};
}

}  // namespace faultline
