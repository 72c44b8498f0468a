#include "faultline/report_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace faultline {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string hex_bits(uint64_t bits) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIX64, bits);
  return buf;
}

uint64_t parse_hex_bits(const std::string& s) {
  if (s.rfind("0x", 0) != 0) throw std::runtime_error("bad bit pattern '" + s + "'");
  return std::stoull(s.substr(2), nullptr, 16);
}

std::string hex_pc(uint32_t pc) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", pc);
  return buf;
}

std::string outcome_str(Outcome o) {
  switch (o) {
    case Outcome::Benign: return "Benign";
    case Outcome::SDC: return "SDC";
    case Outcome::Crash: return "Crash";
    case Outcome::Unclassified: return "Unclassified";
  }
  return "?";
}

Outcome outcome_from_str(const std::string& s) {
  if (s == "Benign") return Outcome::Benign;
  if (s == "SDC") return Outcome::SDC;
  if (s == "Crash") return Outcome::Crash;
  return Outcome::Unclassified;
}

GroupOutcome::CrashReason crash_from_str(const std::string& s) {
  if (s == "Deadlock") return GroupOutcome::CrashReason::Deadlock;
  if (s == "BudgetExceeded") return GroupOutcome::CrashReason::BudgetExceeded;
  return GroupOutcome::CrashReason::Trap;
}

std::string checksum_text(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace

std::string campaign_to_json(const CampaignResult& result) {
  const CampaignConfig& c = result.config;
  ordered_json j;
  j["format"] = "faultline-campaign-v1";
  j["config"] = {
      {"kernel", c.kernel},
      {"mode", mode_name(c.mode)},
      {"nranks", c.nranks},
      {"class", opcode_class_name(c.opcode_class)},
      {"trials", c.trials},
      {"seed", c.seed},
      {"interval", c.checkpoint_interval},
      {"tol", c.convergence_tol},
      {"window", c.convergence_window},
      {"epsilon", c.epsilon},
      {"budget", c.step_budget},
  };
  j["golden_bits"] = hex_bits(double_to_bits(result.golden));

  ordered_json records = ordered_json::array();
  for (size_t i = 0; i < result.records.size(); ++i) {
    const TrialRecord& r = result.records[i];
    ordered_json rec;
    rec["trial"] = i;
    rec["rank"] = r.spec.rank;
    rec["k"] = r.spec.k;
    rec["bit"] = r.spec.bit;
    rec["pc"] = hex_pc(r.faulted_pc);
    rec["file"] = r.faulted_loc.file;
    rec["line"] = r.faulted_loc.line;
    rec["original_bits"] = hex_bits(r.original_bits);
    rec["corrupted_bits"] = hex_bits(r.corrupted_bits);
    rec["outcome"] = outcome_str(r.outcome);
    if (r.outcome == Outcome::Crash) rec["crash_reason"] = crash_reason_name(r.crash_reason);
    if (r.checksum) rec["checksum_bits"] = hex_bits(double_to_bits(*r.checksum));
    rec["steps"] = r.steps;
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  j["rate_series"] = result.rate_series;
  j["converged"] = result.converged;
  if (result.converged_at)
    j["converged_at"] = *result.converged_at;
  else
    j["converged_at"] = nullptr;
  return j.dump(2) + "\n";
}

CampaignResult campaign_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (j.value("format", "") != "faultline-campaign-v1")
    throw std::runtime_error("not a faultline campaign file");
  CampaignResult result;
  const auto& c = j.at("config");
  result.config.kernel = c.at("kernel").get<std::string>();
  auto mode = mode_from_name(c.at("mode").get<std::string>());
  if (!mode) throw std::runtime_error("bad mode in campaign file");
  result.config.mode = *mode;
  result.config.nranks = c.at("nranks").get<int>();
  auto cls = opcode_class_from_name(c.at("class").get<std::string>());
  if (!cls) throw std::runtime_error("bad opcode class in campaign file");
  result.config.opcode_class = *cls;
  result.config.trials = c.at("trials").get<uint64_t>();
  result.config.seed = c.at("seed").get<uint64_t>();
  result.config.checkpoint_interval = c.at("interval").get<uint64_t>();
  result.config.convergence_tol = c.at("tol").get<double>();
  result.config.convergence_window = c.at("window").get<uint64_t>();
  result.config.epsilon = c.at("epsilon").get<double>();
  result.config.step_budget = c.at("budget").get<uint64_t>();
  result.golden = bits_to_double(parse_hex_bits(j.at("golden_bits").get<std::string>()));

  for (const auto& rec : j.at("records")) {
    TrialRecord r;
    r.spec.rank = rec.at("rank").get<int>();
    r.spec.opcode_class = result.config.opcode_class;
    r.spec.k = rec.at("k").get<uint64_t>();
    r.spec.bit = rec.at("bit").get<int>();
    r.faulted_pc = static_cast<uint32_t>(parse_hex_bits(rec.at("pc").get<std::string>()));
    r.faulted_loc.file = rec.at("file").get<std::string>();
    r.faulted_loc.line = rec.at("line").get<int>();
    r.original_bits = parse_hex_bits(rec.at("original_bits").get<std::string>());
    r.corrupted_bits = parse_hex_bits(rec.at("corrupted_bits").get<std::string>());
    r.outcome = outcome_from_str(rec.at("outcome").get<std::string>());
    if (rec.contains("crash_reason"))
      r.crash_reason = crash_from_str(rec.at("crash_reason").get<std::string>());
    if (rec.contains("checksum_bits"))
      r.checksum = bits_to_double(parse_hex_bits(rec.at("checksum_bits").get<std::string>()));
    r.steps = rec.at("steps").get<uint64_t>();
    result.records.push_back(std::move(r));
  }
  result.rate_series = j.at("rate_series").get<std::vector<double>>();
  result.converged = j.at("converged").get<bool>();
  if (!j.at("converged_at").is_null())
    result.converged_at = j.at("converged_at").get<uint64_t>();
  return result;
}

std::string trials_csv(const CampaignResult& result) {
  std::string out = "trial,rank,class,k,bit,pc,file,line,outcome,checksum,steps\n";
  for (size_t i = 0; i < result.records.size(); ++i) {
    const TrialRecord& r = result.records[i];
    std::string outcome = outcome_str(r.outcome);
    if (r.outcome == Outcome::Crash)
      outcome += std::string("(") + crash_reason_name(r.crash_reason) + ")";
    out += std::to_string(i) + "," + std::to_string(r.spec.rank) + "," +
           opcode_class_name(r.spec.opcode_class) + "," + std::to_string(r.spec.k) + "," +
           std::to_string(r.spec.bit) + "," + hex_pc(r.faulted_pc) + "," +
           r.faulted_loc.file + "," + std::to_string(r.faulted_loc.line) + "," + outcome +
           "," + checksum_text(r.checksum) + "," + std::to_string(r.steps) + "\n";
  }
  return out;
}

std::string rates_csv(const CampaignResult& result) {
  std::string out = "checkpoint,trials,sdc_rate\n";
  uint64_t interval = result.config.checkpoint_interval;
  uint64_t total = result.records.size();
  for (size_t i = 0; i < result.rate_series.size(); ++i) {
    uint64_t n = std::min<uint64_t>((i + 1) * interval, total);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", result.rate_series[i]);
    out += std::to_string(i + 1) + "," + std::to_string(n) + "," + buf + "\n";
  }
  return out;
}

std::string report_to_json(const DistributionReport& report) {
  ordered_json j;
  j["format"] = "faultline-report-v1";
  j["kernel"] = report.kernel;
  j["class"] = opcode_class_name(report.opcode_class);

  auto hist_json = [&](const PcHistogram& h) {
    ordered_json hj;
    hj["mode"] = mode_name(h.mode);
    hj["outcome"] = h.outcome;
    hj["total"] = h.total;
    ordered_json counts = ordered_json::array();
    for (const auto& [pc, n] : h.counts) {
      ordered_json e;
      e["pc"] = hex_pc(pc);
      e["count"] = n;
      auto it = report.annotations.find(pc);
      if (it != report.annotations.end()) {
        e["file"] = it->second.file;
        e["line"] = it->second.line;
      }
      counts.push_back(std::move(e));
    }
    hj["counts"] = std::move(counts);
    return hj;
  };

  ordered_json hists = ordered_json::array();
  for (const PcHistogram& h : report.histograms) hists.push_back(hist_json(h));
  j["histograms"] = std::move(hists);

  auto metric_json = [](const MetricRow& m) {
    ordered_json mj;
    mj["cell_a"] = m.cell_a;
    mj["cell_b"] = m.cell_b;
    mj["total_variation"] = m.tv;
    mj["js_divergence"] = m.js;
    mj["jaccard_support"] = m.jaccard;
    return mj;
  };
  ordered_json metrics = ordered_json::array();
  for (const MetricRow& m : report.metrics) metrics.push_back(metric_json(m));
  j["metrics"] = std::move(metrics);
  if (!report.mode_metrics.cell_a.empty()) j["mode_metrics"] = metric_json(report.mode_metrics);

  auto pcs_json = [](const std::set<uint32_t>& pcs) {
    ordered_json arr = ordered_json::array();
    for (uint32_t pc : pcs) arr.push_back(hex_pc(pc));
    return arr;
  };
  j["parallel_only_pcs"] = pcs_json(report.parallel_only_pcs);
  j["serial_only_pcs"] = pcs_json(report.serial_only_pcs);
  j["absent_from_serial_sdc"] = pcs_json(report.absent_from_serial_sdc);
  return j.dump(2) + "\n";
}

std::string histogram_svg(const PcHistogram& hist,
                          const std::map<uint32_t, SourceLoc>& annotations) {
  const int bar_w = 28, gap = 6, chart_h = 220, margin = 40;
  size_t n = hist.counts.size();
  int width = margin * 2 + static_cast<int>(n) * (bar_w + gap);
  int height = chart_h + 2 * margin + 40;
  uint64_t max_count = 1;
  for (const auto& [pc, c] : hist.counts) max_count = std::max(max_count, c);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "<text x=\"" << margin << "\" y=\"20\" font-family=\"monospace\" font-size=\"14\">"
      << mode_name(hist.mode) << " + " << hist.outcome << " (" << hist.total
      << " trials)</text>\n";
  int x = margin;
  for (const auto& [pc, c] : hist.counts) {
    int h = static_cast<int>(static_cast<double>(c) / static_cast<double>(max_count) * chart_h);
    int y = margin + chart_h - h;
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w << "\" height=\"" << h
        << "\" fill=\"#4878a8\"/>\n";
    svg << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << y - 4
        << "\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"middle\">" << c
        << "</text>\n";
    std::string label = hex_pc(pc);
    auto it = annotations.find(pc);
    if (it != annotations.end())
      label += " " + it->second.file + ":" + std::to_string(it->second.line);
    svg << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << margin + chart_h + 10
        << "\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"middle\" "
           "transform=\"rotate(45 "
        << x + bar_w / 2 << " " << margin + chart_h + 10 << ")\">" << label << "</text>\n";
    x += bar_w + gap;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace faultline
