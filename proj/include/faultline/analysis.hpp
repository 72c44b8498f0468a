#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "faultline/campaign.hpp"

namespace faultline {

struct PcHistogram {
  Mode mode = Mode::Serial;
  std::string outcome;  // "Benign", "SDC", "Crash", or "Benign+SDC"
  std::map<uint32_t, uint64_t> counts;  // pc -> occurrences; zeros omitted
  uint64_t total = 0;

  bool empty() const { return counts.empty(); }
  std::set<uint32_t> support() const;
};

PcHistogram tally(const CampaignResult& result, Outcome outcome);
PcHistogram tally_completed(const CampaignResult& result);  // Benign + SDC

// 1/2 * sum over the union support of |p_hat - q_hat|. In [0,1].
double total_variation(const PcHistogram& p, const PcHistogram& q);

// Jensen-Shannon divergence, base-2 logarithm, union support. In [0,1],
// finite without smoothing, symmetric.
double js_divergence(const PcHistogram& p, const PcHistogram& q);

// |support(p) n support(q)| / |support(p) u support(q)|.
double jaccard_support(const PcHistogram& p, const PcHistogram& q);

// support(a) \ support(b).
std::set<uint32_t> exclusive_pcs(const PcHistogram& a, const PcHistogram& b);

struct MetricRow {
  std::string cell_a;
  std::string cell_b;
  double tv = 0.0;
  double js = 0.0;
  double jaccard = 0.0;
};

struct DistributionReport {
  std::string kernel;
  OpcodeClass opcode_class = OpcodeClass::Fadd;
  std::vector<PcHistogram> histograms;  // nonempty (mode, outcome) cells
  PcHistogram serial_completed;         // Benign+SDC per mode
  PcHistogram parallel_completed;
  std::map<uint32_t, SourceLoc> annotations;  // every pc seen anywhere
  std::vector<MetricRow> metrics;             // all pairs of nonempty cells
  MetricRow mode_metrics;                     // serial vs parallel, Benign+SDC
  std::set<uint32_t> parallel_only_pcs;       // completed-parallel \ completed-serial
  std::set<uint32_t> serial_only_pcs;
  // pcs present in (serial Benign, parallel Benign, parallel SDC) but
  // absent from serial SDC; a finite-sample pattern, reported as-is
  std::set<uint32_t> absent_from_serial_sdc;
};

SourceLoc pc_to_source(const Program& program, uint32_t pc);

// Both campaigns must come from the same kernel and opcode class.
DistributionReport build_report(const CampaignResult& serial,
                                const CampaignResult& parallel,
                                const Program& program);

}  // namespace faultline
