#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "faultline/asm.hpp"
#include "faultline/kernels.hpp"
#include "faultline/report_io.hpp"

using namespace faultline;

namespace {

struct CommonOpts {
  std::string kernel;
  std::string program_path;
  std::string mode = "serial";
  int nranks = 0;  // 0 = pick from mode
  std::string opcode_class = "fadd";
  uint64_t trials = 1000;
  uint64_t seed = 0;
  uint64_t interval = 1000;
  double tol = 0.01;
  uint64_t window = 4;
  double epsilon = 0.0;  // 0 = program's .verify tolerance
  uint64_t budget = 50'000'000;
  unsigned jobs = 1;
  std::string out;
  std::string svg;
  std::string config_file;
};

void add_program_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--kernel", o.kernel, "bundled kernel name (cg, ft, bt)");
  cmd->add_option("--program", o.program_path, "path to a .fasm program");
}

void add_campaign_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--mode", o.mode, "serial or parallel")
      ->check(CLI::IsMember({"serial", "parallel"}));
  cmd->add_option("--nranks", o.nranks, "rank count (default 1 serial, 4 parallel)");
  cmd->add_option("--class", o.opcode_class, "injection class (fadd, fmul, fsub, fdiv)")
      ->check(CLI::IsMember({"fadd", "fmul", "fsub", "fdiv"}));
  cmd->add_option("--trials", o.trials, "number of injection trials");
  cmd->add_option("--seed", o.seed, "campaign seed (env FAULTLINE_SEED as fallback)");
  cmd->add_option("--interval", o.interval, "SDC-rate checkpoint interval");
  cmd->add_option("--tol", o.tol, "convergence tolerance (absolute rate)");
  cmd->add_option("--window", o.window, "convergence window (checkpoints)");
  cmd->add_option("--epsilon", o.epsilon, "verification tolerance (default: .verify)");
  cmd->add_option("--budget", o.budget, "per-rank step budget");
  cmd->add_option("--jobs", o.jobs, "worker threads for trials");
  cmd->add_option("--config", o.config_file, "JSON config file (flags override)");
}

// config-file keys mirror the flags; an explicitly given flag wins
void apply_config_file(CLI::App* cmd, CommonOpts& o) {
  if (o.config_file.empty()) return;
  nlohmann::json j = nlohmann::json::parse(read_file(o.config_file));
  auto unset = [&](const char* flag) {
    auto* opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  if (j.contains("kernel") && unset("--kernel")) o.kernel = j["kernel"].get<std::string>();
  if (j.contains("program") && unset("--program")) o.program_path = j["program"].get<std::string>();
  if (j.contains("mode") && unset("--mode")) o.mode = j["mode"].get<std::string>();
  if (j.contains("nranks") && unset("--nranks")) o.nranks = j["nranks"].get<int>();
  if (j.contains("class") && unset("--class")) o.opcode_class = j["class"].get<std::string>();
  if (j.contains("trials") && unset("--trials")) o.trials = j["trials"].get<uint64_t>();
  if (j.contains("seed") && unset("--seed")) o.seed = j["seed"].get<uint64_t>();
  if (j.contains("interval") && unset("--interval")) o.interval = j["interval"].get<uint64_t>();
  if (j.contains("tol") && unset("--tol")) o.tol = j["tol"].get<double>();
  if (j.contains("window") && unset("--window")) o.window = j["window"].get<uint64_t>();
  if (j.contains("epsilon") && unset("--epsilon")) o.epsilon = j["epsilon"].get<double>();
  if (j.contains("budget") && unset("--budget")) o.budget = j["budget"].get<uint64_t>();
  if (j.contains("jobs") && unset("--jobs")) o.jobs = j["jobs"].get<unsigned>();
}

Program load_program(const CommonOpts& o, std::string* name_out = nullptr) {
  if (!o.kernel.empty() && !o.program_path.empty())
    throw std::runtime_error("give either --kernel or --program, not both");
  if (!o.kernel.empty()) {
    if (name_out) *name_out = o.kernel;
    return build_kernel(o.kernel).first;
  }
  if (!o.program_path.empty()) {
    if (name_out) *name_out = o.program_path;
    return assemble(read_file(o.program_path), o.program_path);
  }
  throw std::runtime_error("one of --kernel or --program is required");
}

CampaignConfig make_config(const CommonOpts& o, const Program& prog,
                           const std::string& name, bool seed_given) {
  CampaignConfig cfg;
  cfg.kernel = name;
  auto mode = mode_from_name(o.mode);
  if (!mode) throw std::runtime_error("bad --mode");
  cfg.mode = *mode;
  cfg.nranks = o.nranks != 0 ? o.nranks : (cfg.mode == Mode::Serial ? 1 : 4);
  auto cls = opcode_class_from_name(o.opcode_class);
  if (!cls) throw std::runtime_error("bad --class");
  cfg.opcode_class = *cls;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  if (!seed_given) {
    if (const char* env = std::getenv("FAULTLINE_SEED")) cfg.seed = std::strtoull(env, nullptr, 0);
  }
  cfg.checkpoint_interval = o.interval;
  cfg.convergence_tol = o.tol;
  cfg.convergence_window = o.window;
  cfg.epsilon = o.epsilon > 0.0 ? o.epsilon : prog.verify.rel_eps;
  cfg.step_budget = o.budget;
  return cfg;
}

void emit_campaign_bundle(const CampaignResult& result, const std::string& out_path) {
  std::string json = campaign_to_json(result);
  if (out_path.empty()) {
    std::cout << json;
    return;
  }
  write_file(out_path, json);
  std::string stem = out_path;
  if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json")
    stem.resize(stem.size() - 5);
  write_file(stem + ".trials.csv", trials_csv(result));
  write_file(stem + ".rates.csv", rates_csv(result));
}

std::string svg_cell_path(const std::string& dir, const PcHistogram& h) {
  std::string outcome = h.outcome;
  for (char& c : outcome)
    if (c == '+') c = '_';
  return dir + "/" + mode_name(h.mode) + "-" + outcome + ".svg";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"faultline: deterministic instruction-level fault-injection laboratory"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* cmd_assemble = app.add_subcommand("assemble", "assemble a .fasm program and print its listing");
  add_program_flags(cmd_assemble, o);
  cmd_assemble->add_option("--out", o.out, "listing output path (default stdout)");

  auto* cmd_run = app.add_subcommand("run", "fault-free run; prints the checksum");
  add_program_flags(cmd_run, o);
  cmd_run->add_option("--nranks", o.nranks, "rank count");
  cmd_run->add_option("--budget", o.budget, "per-rank step budget");

  auto* cmd_profile = app.add_subcommand("profile", "fault-free dynamic instance counts per rank");
  add_program_flags(cmd_profile, o);
  cmd_profile->add_option("--nranks", o.nranks, "rank count");
  cmd_profile->add_option("--class", o.opcode_class, "opcode class")
      ->check(CLI::IsMember({"fadd", "fmul", "fsub", "fdiv"}));
  cmd_profile->add_option("--budget", o.budget, "per-rank step budget");

  int inj_rank = 0;
  uint64_t inj_k = 1;
  int inj_bit = 0;
  auto* cmd_inject = app.add_subcommand("inject", "run one injection at a chosen fault site");
  add_program_flags(cmd_inject, o);
  cmd_inject->add_option("--nranks", o.nranks, "rank count");
  cmd_inject->add_option("--class", o.opcode_class, "opcode class")
      ->check(CLI::IsMember({"fadd", "fmul", "fsub", "fdiv"}));
  cmd_inject->add_option("--rank", inj_rank, "target rank");
  cmd_inject->add_option("--k", inj_k, "dynamic instance index (1-based)")->required();
  cmd_inject->add_option("--bit", inj_bit, "bit to flip (0..63)")->required();
  cmd_inject->add_option("--budget", o.budget, "per-rank step budget");
  cmd_inject->add_option("--epsilon", o.epsilon, "verification tolerance");

  auto* cmd_campaign = app.add_subcommand("campaign", "run a sampled injection campaign");
  add_program_flags(cmd_campaign, o);
  add_campaign_flags(cmd_campaign, o);
  cmd_campaign->add_option("--out", o.out, "campaign JSON path (also writes trials/rates CSVs)");

  auto* cmd_exhaustive = app.add_subcommand("exhaustive", "inject at every (rank, k, bit) site");
  add_program_flags(cmd_exhaustive, o);
  add_campaign_flags(cmd_exhaustive, o);
  cmd_exhaustive->add_option("--out", o.out, "output JSON path");

  std::string serial_path, parallel_path;
  auto* cmd_analyze = app.add_subcommand("analyze", "compare a serial and a parallel campaign");
  cmd_analyze->add_option("--serial", serial_path, "serial campaign JSON")->required();
  cmd_analyze->add_option("--parallel", parallel_path, "parallel campaign JSON")->required();
  add_program_flags(cmd_analyze, o);
  cmd_analyze->add_option("--out", o.out, "report JSON path (default stdout)");
  cmd_analyze->add_option("--svg", o.svg, "directory for per-cell SVG charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_assemble) {
      Program prog = load_program(o);
      std::string listing = format_listing(prog);
      if (o.out.empty())
        std::cout << listing;
      else
        write_file(o.out, listing);
      return 0;
    }

    if (*cmd_run) {
      Program prog = load_program(o);
      int nranks = o.nranks != 0 ? o.nranks : prog.nranks_default;
      GroupOutcome out = run_group(prog, nranks, o.budget);
      if (!out.completed()) {
        std::cerr << "crashed: " << crash_reason_name(out.crash);
        if (out.crash == GroupOutcome::CrashReason::Trap)
          std::cerr << " (" << trap_kind_name(out.trap_kind) << " at rank " << out.trap_rank
                    << " pc " << out.trap_pc << ")";
        std::cerr << "\n";
        return 1;
      }
      std::printf("checksum %.17g (f%d), %llu total steps, %d rank(s)\n",
                  out.ranks[0].fregs[prog.verify.freg], prog.verify.freg,
                  (unsigned long long)out.total_steps, nranks);
      return 0;
    }

    if (*cmd_profile) {
      Program prog = load_program(o);
      int nranks = o.nranks != 0 ? o.nranks : prog.nranks_default;
      auto cls = opcode_class_from_name(o.opcode_class);
      Profile p = profile(prog, nranks, *cls, o.budget);
      for (int r = 0; r < p.nranks; ++r)
        std::printf("rank %d: %llu %s instruction(s)\n", r,
                    (unsigned long long)p.per_rank_counts[r], opcode_class_name(*cls));
      std::printf("total: %llu\n", (unsigned long long)p.total());
      return 0;
    }

    if (*cmd_inject) {
      Program prog = load_program(o);
      int nranks = o.nranks != 0 ? o.nranks : prog.nranks_default;
      auto cls = opcode_class_from_name(o.opcode_class);
      FaultSpec spec{inj_rank, *cls, inj_k, inj_bit};
      double golden = golden_checksum(prog, nranks, o.budget);
      double eps = o.epsilon > 0.0 ? o.epsilon : prog.verify.rel_eps;
      TrialRecord rec = injected_run(prog, nranks, spec, o.budget);
      GroupOutcome shape;  // only completeness matters for classify here
      shape.kind = rec.checksum ? GroupOutcome::Kind::Completed : GroupOutcome::Kind::Crashed;
      shape.crash = rec.crash_reason;
      rec.outcome = classify(shape, rec.checksum, golden, eps);
      std::printf("pc 0x%08X (%s:%d) original %.17g corrupted %.17g -> %s\n", rec.faulted_pc,
                  rec.faulted_loc.file.c_str(), rec.faulted_loc.line,
                  bits_to_double(rec.original_bits), bits_to_double(rec.corrupted_bits),
                  rec.outcome == Outcome::Benign ? "Benign"
                  : rec.outcome == Outcome::SDC  ? "SDC"
                                                 : "Crash");
      if (rec.checksum)
        std::printf("checksum %.17g (golden %.17g)\n", *rec.checksum, golden);
      return 0;
    }

    if (*cmd_campaign) {
      apply_config_file(cmd_campaign, o);
      std::string name;
      Program prog = load_program(o, &name);
      bool seed_given = cmd_campaign->get_option_no_throw("--seed")->count() > 0;
      CampaignConfig cfg = make_config(o, prog, name, seed_given);
      CampaignResult result = run_campaign(prog, cfg, o.jobs);
      emit_campaign_bundle(result, o.out);
      return 0;
    }

    if (*cmd_exhaustive) {
      apply_config_file(cmd_exhaustive, o);
      std::string name;
      Program prog = load_program(o, &name);
      bool seed_given = cmd_exhaustive->get_option_no_throw("--seed")->count() > 0;
      CampaignConfig cfg = make_config(o, prog, name, seed_given);
      CampaignResult result;
      result.config = cfg;
      result.golden = golden_checksum(prog, cfg.nranks, cfg.step_budget);
      result.records = run_exhaustive(prog, cfg.nranks, cfg.opcode_class, cfg.epsilon,
                                      cfg.step_budget);
      result.config.trials = result.records.size();
      std::vector<Outcome> outcomes;
      outcomes.reserve(result.records.size());
      for (const TrialRecord& r : result.records) outcomes.push_back(r.outcome);
      result.rate_series = rolling_rates(outcomes, cfg.checkpoint_interval);
      Convergence conv =
          is_converged(result.rate_series, cfg.convergence_tol, cfg.convergence_window);
      result.converged = conv.converged;
      result.converged_at = conv.at;
      emit_campaign_bundle(result, o.out);
      return 0;
    }

    if (*cmd_analyze) {
      CampaignResult serial = campaign_from_json(read_file(serial_path));
      CampaignResult parallel = campaign_from_json(read_file(parallel_path));
      Program prog;
      if (!o.kernel.empty() || !o.program_path.empty()) {
        prog = load_program(o);
      } else if (is_kernel_name(serial.config.kernel)) {
        prog = build_kernel(serial.config.kernel).first;
      } else {
        throw std::runtime_error(
            "campaigns reference a custom program; pass --program to annotate");
      }
      DistributionReport report = build_report(serial, parallel, prog);
      std::string json = report_to_json(report);
      if (o.out.empty())
        std::cout << json;
      else
        write_file(o.out, json);
      if (!o.svg.empty()) {
        for (const PcHistogram& h : report.histograms)
          write_file(svg_cell_path(o.svg, h), histogram_svg(h, report.annotations));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
