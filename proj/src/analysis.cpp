#include "faultline/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace faultline {

std::set<uint32_t> PcHistogram::support() const {
  std::set<uint32_t> s;
  for (const auto& [pc, n] : counts) s.insert(pc);
  return s;
}

namespace {

const char* outcome_label(Outcome o) {
  switch (o) {
    case Outcome::Benign: return "Benign";
    case Outcome::SDC: return "SDC";
    case Outcome::Crash: return "Crash";
    case Outcome::Unclassified: return "Unclassified";
  }
  return "?";
}

void require_nonzero(const PcHistogram& h, const char* who) {
  if (h.total == 0) throw std::invalid_argument(std::string(who) + ": zero-total histogram");
}

}  // namespace

PcHistogram tally(const CampaignResult& result, Outcome outcome) {
  PcHistogram h;
  h.mode = result.config.mode;
  h.outcome = outcome_label(outcome);
  for (const TrialRecord& r : result.records) {
    if (r.outcome != outcome) continue;
    ++h.counts[r.faulted_pc];
    ++h.total;
  }
  return h;
}

PcHistogram tally_completed(const CampaignResult& result) {
  PcHistogram h;
  h.mode = result.config.mode;
  h.outcome = "Benign+SDC";
  for (const TrialRecord& r : result.records) {
    if (r.outcome != Outcome::Benign && r.outcome != Outcome::SDC) continue;
    ++h.counts[r.faulted_pc];
    ++h.total;
  }
  return h;
}

double total_variation(const PcHistogram& p, const PcHistogram& q) {
  require_nonzero(p, "total_variation");
  require_nonzero(q, "total_variation");
  std::set<uint32_t> support = p.support();
  for (const auto& [pc, n] : q.counts) support.insert(pc);
  double tv = 0.0;
  for (uint32_t pc : support) {
    auto ip = p.counts.find(pc);
    auto iq = q.counts.find(pc);
    double ph = ip == p.counts.end() ? 0.0 : double(ip->second) / double(p.total);
    double qh = iq == q.counts.end() ? 0.0 : double(iq->second) / double(q.total);
    tv += std::fabs(ph - qh);
  }
  return std::clamp(0.5 * tv, 0.0, 1.0);
}

double js_divergence(const PcHistogram& p, const PcHistogram& q) {
  require_nonzero(p, "js_divergence");
  require_nonzero(q, "js_divergence");
  std::set<uint32_t> support = p.support();
  for (const auto& [pc, n] : q.counts) support.insert(pc);
  double js = 0.0;
  for (uint32_t pc : support) {
    auto ip = p.counts.find(pc);
    auto iq = q.counts.find(pc);
    double ph = ip == p.counts.end() ? 0.0 : double(ip->second) / double(p.total);
    double qh = iq == q.counts.end() ? 0.0 : double(iq->second) / double(q.total);
    double m = 0.5 * (ph + qh);
    if (ph > 0.0) js += 0.5 * ph * std::log2(ph / m);
    if (qh > 0.0) js += 0.5 * qh * std::log2(qh / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

double jaccard_support(const PcHistogram& p, const PcHistogram& q) {
  require_nonzero(p, "jaccard_support");
  require_nonzero(q, "jaccard_support");
  std::set<uint32_t> sp = p.support();
  std::set<uint32_t> sq = q.support();
  size_t inter = 0;
  for (uint32_t pc : sp) inter += sq.count(pc);
  size_t uni = sp.size() + sq.size() - inter;
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

std::set<uint32_t> exclusive_pcs(const PcHistogram& a, const PcHistogram& b) {
  std::set<uint32_t> out;
  std::set<uint32_t> sb = b.support();
  for (const auto& [pc, n] : a.counts)
    if (!sb.count(pc)) out.insert(pc);
  return out;
}

SourceLoc pc_to_source(const Program& program, uint32_t pc) { return program.loc(pc); }

namespace {

std::string cell_name(const PcHistogram& h) {
  return std::string(mode_name(h.mode)) + "+" + h.outcome;
}

}  // namespace

DistributionReport build_report(const CampaignResult& serial,
                                const CampaignResult& parallel,
                                const Program& program) {
  if (serial.config.kernel != parallel.config.kernel ||
      serial.config.opcode_class != parallel.config.opcode_class)
    throw std::invalid_argument("campaigns disagree on kernel or opcode class");
  if (serial.config.mode != Mode::Serial || parallel.config.mode != Mode::Parallel)
    throw std::invalid_argument("build_report expects one serial and one parallel campaign");

  DistributionReport rep;
  rep.kernel = serial.config.kernel;
  rep.opcode_class = serial.config.opcode_class;

  PcHistogram cells[6] = {
      tally(serial, Outcome::Benign),   tally(serial, Outcome::SDC),
      tally(serial, Outcome::Crash),    tally(parallel, Outcome::Benign),
      tally(parallel, Outcome::SDC),    tally(parallel, Outcome::Crash),
  };
  for (const PcHistogram& h : cells)
    if (!h.empty()) rep.histograms.push_back(h);

  for (const PcHistogram& h : rep.histograms)
    for (const auto& [pc, n] : h.counts) rep.annotations[pc] = pc_to_source(program, pc);

  for (size_t i = 0; i < rep.histograms.size(); ++i) {
    for (size_t j = i + 1; j < rep.histograms.size(); ++j) {
      MetricRow row;
      row.cell_a = cell_name(rep.histograms[i]);
      row.cell_b = cell_name(rep.histograms[j]);
      row.tv = total_variation(rep.histograms[i], rep.histograms[j]);
      row.js = js_divergence(rep.histograms[i], rep.histograms[j]);
      row.jaccard = jaccard_support(rep.histograms[i], rep.histograms[j]);
      rep.metrics.push_back(row);
    }
  }

  rep.serial_completed = tally_completed(serial);
  rep.parallel_completed = tally_completed(parallel);
  if (!rep.serial_completed.empty() && !rep.parallel_completed.empty()) {
    rep.mode_metrics.cell_a = cell_name(rep.serial_completed);
    rep.mode_metrics.cell_b = cell_name(rep.parallel_completed);
    rep.mode_metrics.tv = total_variation(rep.serial_completed, rep.parallel_completed);
    rep.mode_metrics.js = js_divergence(rep.serial_completed, rep.parallel_completed);
    rep.mode_metrics.jaccard = jaccard_support(rep.serial_completed, rep.parallel_completed);
    rep.parallel_only_pcs = exclusive_pcs(rep.parallel_completed, rep.serial_completed);
    rep.serial_only_pcs = exclusive_pcs(rep.serial_completed, rep.parallel_completed);
  }

  // pcs seen in the three other completed cells but never in serial+SDC
  {
    PcHistogram sb = tally(serial, Outcome::Benign);
    PcHistogram ss = tally(serial, Outcome::SDC);
    PcHistogram pb = tally(parallel, Outcome::Benign);
    PcHistogram ps = tally(parallel, Outcome::SDC);
    std::set<uint32_t> ss_support = ss.support();
    for (const auto& [pc, n] : sb.counts)
      if (pb.counts.count(pc) && ps.counts.count(pc) && !ss_support.count(pc))
        rep.absent_from_serial_sdc.insert(pc);
  }
  return rep;
}

}  // namespace faultline
