#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/index.hpp"

namespace vmmr {

enum class MatchRule { kCanonical, kUniqueCandidate, kUniqueGlobal, kArgmax, kAbstain };

std::string_view to_string(MatchRule rule) noexcept;
std::optional<MatchRule> parse_match_rule(std::string_view text) noexcept;

struct StageLatency {
  double describe_ms = 0;
  double embed_ms = 0;
  double retrieve_ms = 0;
  double reason_ms = 0;
};

/// A parsed outcome plus everything needed to audit or replay it.
struct Prediction {
  std::string query_id;
  std::optional<VehicleLabel> label;  // nullopt = abstain
  std::string raw_reasoner_text;
  MatchRule match_rule = MatchRule::kAbstain;
  std::vector<RetrievalHit> hits;
  std::vector<VehicleLabel> hit_labels;  // parallel to hits
  std::optional<Description> description_used;
  std::string prompt_hash;
  StageLatency latency;

  bool abstained() const noexcept { return !label.has_value(); }
};

}  // namespace vmmr
