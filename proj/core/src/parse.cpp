#include "vmmr/parse.hpp"

#include <optional>
#include <vector>

#include "vmmr/util.hpp"

namespace vmmr {

std::string_view to_string(MatchRule rule) noexcept {
  switch (rule) {
    case MatchRule::kCanonical: return "canonical";
    case MatchRule::kUniqueCandidate: return "unique-candidate";
    case MatchRule::kUniqueGlobal: return "unique-global";
    case MatchRule::kArgmax: return "argmax";
    case MatchRule::kAbstain: return "abstain";
  }
  return "abstain";
}

std::optional<MatchRule> parse_match_rule(std::string_view text) noexcept {
  for (auto rule : {MatchRule::kCanonical, MatchRule::kUniqueCandidate, MatchRule::kUniqueGlobal,
                    MatchRule::kArgmax, MatchRule::kAbstain}) {
    if (to_string(rule) == text) return rule;
  }
  return std::nullopt;
}

namespace {

bool is_alnum(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Text after the last line that starts with "ANSWER:" (case-insensitive).
std::optional<std::string_view> answer_line(std::string_view raw) {
  std::optional<std::string_view> found;
  for (auto line : split(raw, '\n')) {
    auto t = trim(line);
    // tolerate markdown emphasis like "**ANSWER:**"
    while (!t.empty() && (t.front() == '*' || t.front() == '#')) t.remove_prefix(1);
    if (t.size() >= 7 && to_lower_ascii(t.substr(0, 7)) == "answer:") {
      auto rest = t.substr(7);
      while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
      found = trim(rest);
    }
  }
  return found;
}

bool bounded_at(std::string_view hay, std::size_t pos, std::size_t len) {
  const bool left = pos == 0 || !is_alnum(hay[pos - 1]);
  const bool right = pos + len >= hay.size() || !is_alnum(hay[pos + len]);
  return left && right;
}

std::optional<std::size_t> first_bounded(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return std::nullopt;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    if (bounded_at(hay, pos, needle.size())) return pos;
  }
  return std::nullopt;
}

const VehicleLabel* rule_canonical(std::string_view canon_text,
                                   const std::vector<const VehicleLabel*>& universe) {
  const VehicleLabel* best = nullptr;
  std::size_t best_pos = 0, best_len = 0;
  for (const auto* label : universe) {
    const std::string joined = canonical_part(label->make()) + "-" + canonical_part(label->model());
    for (const std::string& key : {joined, label->canonical_id()}) {
      auto pos = first_bounded(canon_text, key);
      if (!pos) continue;
      if (!best || *pos < best_pos || (*pos == best_pos && key.size() > best_len)) {
        best = label;
        best_pos = *pos;
        best_len = key.size();
      }
    }
  }
  return best;
}

const VehicleLabel* rule_unique_model(std::string_view canon_text,
                                      const std::vector<const VehicleLabel*>& pool) {
  const VehicleLabel* match = nullptr;
  for (const auto* label : pool) {
    const std::string model = canonical_part(label->model());
    if (canon_text.find(model) == std::string_view::npos) continue;
    if (match && match->canonical_id() != label->canonical_id()) return nullptr;
    match = label;
  }
  return match;
}

}  // namespace

Prediction parse_prediction(std::string_view raw, std::span<const VehicleLabel> candidates,
                            const LabelSet& full_label_set) {
  Prediction out;
  out.raw_reasoner_text = std::string(raw);

  std::vector<const VehicleLabel*> universe;
  std::vector<const VehicleLabel*> candidate_pool;
  LabelSet fallback;
  if (full_label_set.empty()) {
    for (const auto& c : candidates) fallback.insert_if_absent(c);
  }
  const LabelSet& allowed = full_label_set.empty() ? fallback : full_label_set;
  for (const auto& label : allowed) universe.push_back(&label);
  for (const auto& c : candidates) {
    // candidates outside the allowed set are ignored; use the set's copy
    if (const auto* member = allowed.find(c.canonical_id())) candidate_pool.push_back(member);
  }

  std::vector<std::string_view> scopes;
  const auto answer = answer_line(raw);
  if (answer && !answer->empty()) scopes.push_back(*answer);
  scopes.push_back(raw);

  for (auto scope : scopes) {
    const std::string canon = canonical_part(scope);
    const VehicleLabel* hit = nullptr;
    if ((hit = rule_canonical(canon, universe))) {
      out.match_rule = MatchRule::kCanonical;
    } else if (!candidate_pool.empty() && (hit = rule_unique_model(canon, candidate_pool))) {
      out.match_rule = MatchRule::kUniqueCandidate;
    } else if ((hit = rule_unique_model(canon, universe))) {
      out.match_rule = MatchRule::kUniqueGlobal;
    }
    if (hit) {
      out.label = *hit;
      return out;
    }
  }
  out.match_rule = MatchRule::kAbstain;
  return out;
}

}  // namespace vmmr
