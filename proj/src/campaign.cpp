#include "faultline/campaign.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace faultline {

const char* mode_name(Mode m) { return m == Mode::Serial ? "serial" : "parallel"; }

std::optional<Mode> mode_from_name(const std::string& name) {
  if (name == "serial") return Mode::Serial;
  if (name == "parallel") return Mode::Parallel;
  return std::nullopt;
}

double golden_checksum(const Program& program, int nranks, uint64_t step_budget) {
  GroupOutcome out = run_group(program, nranks, step_budget);
  if (!out.completed())
    throw InjectError(std::string("kernel defect: fault-free run did not complete: ") +
                      crash_reason_name(out.crash));
  double value = out.ranks[0].fregs[program.verify.freg];
  if (program.verify.golden_auto) return value;
  double golden = program.verify.golden;
  double bound = program.verify.rel_eps * std::fabs(golden);
  if (golden == 0.0) bound = program.verify.rel_eps;
  if (std::isnan(value) || std::fabs(value - golden) > bound)
    throw InjectError("kernel defect: fault-free checksum misses the fixed golden");
  return golden;
}

namespace {

Outcome classify_checksum(std::optional<double> checksum, double golden, double epsilon) {
  if (!checksum) return Outcome::Crash;
  double v = *checksum;
  if (std::isnan(v)) return Outcome::SDC;
  if (golden == 0.0) return std::fabs(v) <= epsilon ? Outcome::Benign : Outcome::SDC;
  return std::fabs(v - golden) <= epsilon * std::fabs(golden) ? Outcome::Benign
                                                              : Outcome::SDC;
}

}  // namespace

Outcome classify(const GroupOutcome& outcome, std::optional<double> checksum,
                 double golden, double epsilon) {
  if (!outcome.completed()) return Outcome::Crash;
  return classify_checksum(checksum, golden, epsilon);
}

std::vector<double> rolling_rates(const std::vector<Outcome>& outcomes, uint64_t interval) {
  std::vector<double> series;
  if (interval < 1) throw std::invalid_argument("interval must be >= 1");
  uint64_t sdc = 0;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i] == Outcome::SDC) ++sdc;
    uint64_t n = i + 1;
    if (n % interval == 0 || n == outcomes.size())
      series.push_back(static_cast<double>(sdc) / static_cast<double>(n));
  }
  return series;
}

Convergence is_converged(const std::vector<double>& series, double tol, uint64_t window) {
  if (window < 2) throw std::invalid_argument("window must be >= 2");
  Convergence c;
  if (series.size() < window) return c;
  size_t end = series.size() - 1;
  double final_rate = series[end];
  size_t j = 0;
  for (size_t i = 0; i <= end; ++i)
    if (std::fabs(series[i] - final_rate) > tol) j = i + 1;
  if (end - j + 1 >= window) {
    c.converged = true;
    c.at = j;
  }
  return c;
}

CampaignResult run_campaign(const Program& program, const CampaignConfig& config,
                            unsigned jobs) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(config.epsilon > 0.0) || !(config.epsilon < 1.0))
    throw std::invalid_argument("epsilon must be in (0, 1)");
  if (config.mode == Mode::Serial && config.nranks != 1)
    throw std::invalid_argument("serial mode requires nranks = 1");

  CampaignResult result;
  result.config = config;
  result.golden = golden_checksum(program, config.nranks, config.step_budget);

  Profile prof = profile(program, config.nranks, config.opcode_class, config.step_budget);
  if (prof.total() == 0)
    throw InjectError("no injection targets: kernel retires no " +
                      std::string(opcode_class_name(config.opcode_class)) +
                      " instructions");

  result.records.resize(config.trials);
  const uint64_t trials = config.trials;
  unsigned workers = std::max(1u, jobs);
  workers = static_cast<unsigned>(std::min<uint64_t>(workers, trials));

  auto run_range = [&](uint64_t lo, uint64_t hi, std::exception_ptr& err) {
    try {
      for (uint64_t i = lo; i < hi; ++i) {
        SplitMix64 rng(mix64(config.seed, i));
        FaultSpec spec = draw_fault(rng, prof);
        TrialRecord rec = injected_run(program, config.nranks, spec, config.step_budget);
        rec.outcome = classify_checksum(rec.checksum, result.golden, config.epsilon);
        result.records[i] = std::move(rec);
      }
    } catch (...) {
      err = std::current_exception();
    }
  };

  if (workers == 1) {
    std::exception_ptr err;
    run_range(0, trials, err);
    if (err) std::rethrow_exception(err);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    uint64_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      uint64_t lo = w * chunk;
      uint64_t hi = std::min<uint64_t>(lo + chunk, trials);
      threads.emplace_back(run_range, lo, hi, std::ref(errors[w]));
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<Outcome> outcomes;
  outcomes.reserve(result.records.size());
  for (const TrialRecord& r : result.records) outcomes.push_back(r.outcome);
  result.rate_series = rolling_rates(outcomes, config.checkpoint_interval);
  Convergence conv =
      is_converged(result.rate_series, config.convergence_tol, config.convergence_window);
  result.converged = conv.converged;
  result.converged_at = conv.at;
  return result;
}

std::vector<TrialRecord> run_exhaustive(const Program& program, int nranks,
                                        OpcodeClass opcode_class, double epsilon,
                                        uint64_t step_budget, uint64_t site_cap) {
  Profile prof = profile(program, nranks, opcode_class, step_budget);
  uint64_t sites = prof.total() * 64;
  if (sites == 0) throw InjectError("no injection targets: empty fault space");
  if (sites > site_cap)
    throw InjectError("fault space has " + std::to_string(sites) +
                      " sites, above the cap of " + std::to_string(site_cap));

  double golden = golden_checksum(program, nranks, step_budget);
  std::vector<TrialRecord> records;
  records.reserve(sites);
  for (int rank = 0; rank < nranks; ++rank) {
    for (uint64_t k = 1; k <= prof.per_rank_counts[rank]; ++k) {
      for (int bit = 0; bit < 64; ++bit) {
        FaultSpec spec{rank, opcode_class, k, bit};
        TrialRecord rec = injected_run(program, nranks, spec, step_budget);
        rec.outcome = classify_checksum(rec.checksum, golden, epsilon);
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

}  // namespace faultline
