// Python bindings. Structured results cross the boundary as JSON text so
// the Python side sees exactly the same documents the CLI writes.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "faultline/asm.hpp"
#include "faultline/kernels.hpp"
#include "faultline/report_io.hpp"

namespace py = pybind11;
using namespace faultline;

namespace {

Program program_from(const std::string& kernel, const std::string& source) {
  if (!kernel.empty() && !source.empty())
    throw std::invalid_argument("give either kernel or source, not both");
  if (!kernel.empty()) return build_kernel(kernel).first;
  if (!source.empty()) return assemble(source);
  throw std::invalid_argument("one of kernel or source is required");
}

OpcodeClass class_from(const std::string& name) {
  auto c = opcode_class_from_name(name);
  if (!c) throw std::invalid_argument("unknown opcode class '" + name + "'");
  return *c;
}

}  // namespace

PYBIND11_MODULE(_faultline, m) {
  m.doc() = "deterministic instruction-level fault-injection laboratory";

  m.def("apply_bitflip", &apply_bitflip, py::arg("bits"), py::arg("bit"),
        "Flip one bit of an IEEE binary64 bit pattern.");
  m.def("double_to_bits", &double_to_bits, py::arg("value"));
  m.def("bits_to_double", &bits_to_double, py::arg("bits"));

  m.def("kernel_names", &kernel_names, "Names of the bundled benchmark kernels.");
  m.def("kernel_source", [](const std::string& name) { return kernel_source(name); },
        py::arg("name"));

  m.def(
      "assemble_listing",
      [](const std::string& source, const std::string& file_name) {
        return format_listing(assemble(source, file_name));
      },
      py::arg("source"), py::arg("file_name") = "<input>",
      "Assemble .fasm text and return its program listing.");

  m.def(
      "run",
      [](const std::string& kernel, const std::string& source, int nranks, uint64_t budget) {
        Program prog = program_from(kernel, source);
        if (nranks == 0) nranks = prog.nranks_default;
        GroupOutcome out = run_group(prog, nranks, budget);
        if (!out.completed())
          throw std::runtime_error(std::string("run crashed: ") +
                                   crash_reason_name(out.crash));
        py::dict d;
        d["checksum"] = out.ranks[0].fregs[prog.verify.freg];
        d["total_steps"] = out.total_steps;
        d["nranks"] = nranks;
        return d;
      },
      py::arg("kernel") = "", py::arg("source") = "", py::arg("nranks") = 0,
      py::arg("budget") = uint64_t{50'000'000}, "Fault-free run; returns the checksum.");

  m.def(
      "profile",
      [](const std::string& kernel, const std::string& source, int nranks,
         const std::string& opcode_class, uint64_t budget) {
        Program prog = program_from(kernel, source);
        if (nranks == 0) nranks = prog.nranks_default;
        return profile(prog, nranks, class_from(opcode_class), budget).per_rank_counts;
      },
      py::arg("kernel") = "", py::arg("source") = "", py::arg("nranks") = 0,
      py::arg("opcode_class") = "fadd", py::arg("budget") = uint64_t{50'000'000},
      "Fault-free per-rank dynamic instance counts of one opcode class.");

  m.def(
      "inject",
      [](const std::string& kernel, const std::string& source, int nranks, int rank,
         const std::string& opcode_class, uint64_t k, int bit, uint64_t budget) {
        Program prog = program_from(kernel, source);
        if (nranks == 0) nranks = prog.nranks_default;
        FaultSpec spec{rank, class_from(opcode_class), k, bit};
        double golden = golden_checksum(prog, nranks, budget);
        TrialRecord rec = injected_run(prog, nranks, spec, budget);
        GroupOutcome shape;
        shape.kind = rec.checksum ? GroupOutcome::Kind::Completed
                                  : GroupOutcome::Kind::Crashed;
        shape.crash = rec.crash_reason;
        Outcome o = classify(shape, rec.checksum, golden, prog.verify.rel_eps);
        py::dict d;
        d["pc"] = rec.faulted_pc;
        d["file"] = rec.faulted_loc.file;
        d["line"] = rec.faulted_loc.line;
        d["original_bits"] = rec.original_bits;
        d["corrupted_bits"] = rec.corrupted_bits;
        d["outcome"] = o == Outcome::Benign ? "Benign" : o == Outcome::SDC ? "SDC" : "Crash";
        if (rec.checksum) d["checksum"] = *rec.checksum;
        d["golden"] = golden;
        return d;
      },
      py::arg("kernel") = "", py::arg("source") = "", py::arg("nranks") = 0,
      py::arg("rank") = 0, py::arg("opcode_class") = "fadd", py::arg("k") = uint64_t{1},
      py::arg("bit") = 0, py::arg("budget") = uint64_t{50'000'000},
      "Run one injection at a chosen fault site.");

  m.def(
      "run_campaign",
      [](const std::string& kernel, const std::string& source, const std::string& mode,
         int nranks, const std::string& opcode_class, uint64_t trials, uint64_t seed,
         uint64_t interval, double epsilon, uint64_t budget, unsigned jobs) {
        Program prog = program_from(kernel, source);
        CampaignConfig cfg;
        cfg.kernel = kernel.empty() ? "<source>" : kernel;
        auto m_ = mode_from_name(mode);
        if (!m_) throw std::invalid_argument("mode must be serial or parallel");
        cfg.mode = *m_;
        cfg.nranks = nranks != 0 ? nranks : (cfg.mode == Mode::Serial ? 1 : 4);
        cfg.opcode_class = class_from(opcode_class);
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.checkpoint_interval = interval;
        cfg.epsilon = epsilon > 0 ? epsilon : prog.verify.rel_eps;
        cfg.step_budget = budget;
        CampaignResult result;
        {
          py::gil_scoped_release release;
          result = run_campaign(prog, cfg, jobs);
        }
        return campaign_to_json(result);
      },
      py::arg("kernel") = "", py::arg("source") = "", py::arg("mode") = "serial",
      py::arg("nranks") = 0, py::arg("opcode_class") = "fadd",
      py::arg("trials") = uint64_t{1000}, py::arg("seed") = uint64_t{0},
      py::arg("interval") = uint64_t{1000}, py::arg("epsilon") = 0.0,
      py::arg("budget") = uint64_t{50'000'000}, py::arg("jobs") = 1u,
      "Run a sampled injection campaign; returns the campaign JSON document.");

  m.def(
      "run_exhaustive",
      [](const std::string& kernel, const std::string& source, int nranks,
         const std::string& opcode_class, double epsilon, uint64_t budget) {
        Program prog = program_from(kernel, source);
        if (nranks == 0) nranks = prog.nranks_default;
        double eps = epsilon > 0 ? epsilon : prog.verify.rel_eps;
        auto records = run_exhaustive(prog, nranks, class_from(opcode_class), eps, budget);
        CampaignResult result;
        result.config.kernel = kernel.empty() ? "<source>" : kernel;
        result.config.mode = nranks == 1 ? Mode::Serial : Mode::Parallel;
        result.config.nranks = nranks;
        result.config.opcode_class = class_from(opcode_class);
        result.config.trials = records.size();
        result.config.epsilon = eps;
        result.config.step_budget = budget;
        result.golden = golden_checksum(prog, nranks, budget);
        result.records = std::move(records);
        std::vector<Outcome> outcomes;
        for (const TrialRecord& r : result.records) outcomes.push_back(r.outcome);
        result.rate_series = rolling_rates(outcomes, result.config.checkpoint_interval);
        return campaign_to_json(result);
      },
      py::arg("kernel") = "", py::arg("source") = "", py::arg("nranks") = 0,
      py::arg("opcode_class") = "fadd", py::arg("epsilon") = 0.0,
      py::arg("budget") = uint64_t{50'000'000},
      "Inject at every (rank, k, bit) site; returns a campaign-style JSON document.");

  m.def(
      "analyze",
      [](const std::string& serial_json, const std::string& parallel_json,
         const std::string& kernel, const std::string& source) {
        CampaignResult serial = campaign_from_json(serial_json);
        CampaignResult parallel = campaign_from_json(parallel_json);
        Program prog;
        if (!kernel.empty() || !source.empty())
          prog = program_from(kernel, source);
        else if (is_kernel_name(serial.config.kernel))
          prog = build_kernel(serial.config.kernel).first;
        else
          throw std::invalid_argument("pass kernel or source to annotate custom programs");
        return report_to_json(build_report(serial, parallel, prog));
      },
      py::arg("serial_json"), py::arg("parallel_json"), py::arg("kernel") = "",
      py::arg("source") = "",
      "Compare a serial and a parallel campaign; returns the report JSON document.");
}
