#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faultline/injector.hpp"

namespace faultline {

enum class Mode { Serial, Parallel };
const char* mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& name);

struct CampaignConfig {
  std::string kernel;  // kernel name or program identifier (config echo)
  Mode mode = Mode::Serial;
  int nranks = 1;  // 1 if Serial, 4 by default if Parallel
  OpcodeClass opcode_class = OpcodeClass::Fadd;
  uint64_t trials = 1;
  uint64_t seed = 0;
  uint64_t checkpoint_interval = 1000;
  double convergence_tol = 0.01;
  uint64_t convergence_window = 4;
  double epsilon = 1e-8;  // relative verification tolerance
  uint64_t step_budget = 50'000'000;
};

struct CampaignResult {
  CampaignConfig config;
  double golden = 0.0;
  std::vector<TrialRecord> records;
  std::vector<double> rate_series;  // cumulative SDC rate per checkpoint
  bool converged = false;
  std::optional<uint64_t> converged_at;  // checkpoint index, 0-based
};

// Fault-free verification value: the checksum register of rank 0 at halt.
// With an AUTO golden this value *is* the golden; otherwise the program's
// fixed golden is returned after checking the fault-free run against it.
double golden_checksum(const Program& program, int nranks, uint64_t step_budget);

Outcome classify(const GroupOutcome& outcome, std::optional<double> checksum,
                 double golden, double epsilon);

// Runs config.trials independent injections. Trial i draws from
// SplitMix64(mix64(seed, i)); trials may run on several threads (jobs)
// with results identical to the sequential order.
CampaignResult run_campaign(const Program& program, const CampaignConfig& config,
                            unsigned jobs = 1);

// Injects at every (rank, k, bit) site. Refuses when the site count
// exceeds the cap (default 2^20).
std::vector<TrialRecord> run_exhaustive(const Program& program, int nranks,
                                        OpcodeClass opcode_class, double epsilon,
                                        uint64_t step_budget,
                                        uint64_t site_cap = 1ull << 20);

// Cumulative SDC fraction at each multiple of interval, plus a final
// partial checkpoint when trials % interval != 0.
std::vector<double> rolling_rates(const std::vector<Outcome>& outcomes,
                                  uint64_t interval);

struct Convergence {
  bool converged = false;
  std::optional<uint64_t> at;  // first converged checkpoint index
};

// Converged at the smallest j such that every checkpoint i in [j, end]
// satisfies |series[i] - series[end]| <= tol and end - j + 1 >= window.
Convergence is_converged(const std::vector<double>& series, double tol,
                         uint64_t window);

}  // namespace faultline
