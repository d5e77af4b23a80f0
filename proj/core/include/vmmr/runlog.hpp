#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/pipeline.hpp"

namespace vmmr {

// query_id -> true label, ordered by query id.
using TruthMap = std::map<std::string, VehicleLabel, std::less<>>;

// `query_id<TAB>make<TAB>model` per line; '#' comments allowed.
TruthMap parse_truths(std::string_view content);
TruthMap load_truths(const std::filesystem::path& path);

struct RunLogOptions {
  // Latencies are written as 0 when false so logs compare byte-for-byte.
  bool include_timings = true;
};

// One JSON object per query: query_id, description, hits (record_id,
// label, score, rank), prompt_hash, raw_reasoner_text, label, make, model,
// match_rule, true_label, latency_ms, error.
std::string run_log_line(const BatchEntry& entry, const TruthMap* truths,
                         const RunLogOptions& options);
std::string serialize_run_log(std::span<const BatchEntry> entries, const TruthMap* truths,
                              const RunLogOptions& options);

struct RunLog {
  std::vector<BatchEntry> entries;
  TruthMap truths;  // true labels recorded in the log, if any
};

// Throws Error(kSchemaError).
RunLog parse_run_log(std::string_view content);
RunLog load_run_log(const std::filesystem::path& path);

}  // namespace vmmr
