#pragma once

#include <string>

#include "faultline/analysis.hpp"

namespace faultline {

// Campaign JSON document. Deterministic: equal results serialize to equal
// bytes. Checksums and goldens are stored as raw-bit hex strings so NaN
// and infinities round-trip losslessly.
std::string campaign_to_json(const CampaignResult& result);
CampaignResult campaign_from_json(const std::string& text);

// trials CSV: trial,rank,class,k,bit,pc,file,line,outcome,checksum,steps
std::string trials_csv(const CampaignResult& result);

// rates CSV: checkpoint,trials,sdc_rate
std::string rates_csv(const CampaignResult& result);

std::string report_to_json(const DistributionReport& report);

// One bar chart per histogram: x = pc (hex), y = count.
std::string histogram_svg(const PcHistogram& hist,
                          const std::map<uint32_t, SourceLoc>& annotations);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace faultline
