#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/index.hpp"
#include "vmmr/kb.hpp"

namespace vmmr {

/// Text with named `{placeholder}` slots. `{{` and `}}` are literal braces.
/// A brace not forming a valid `{identifier}` is copied through as-is.
struct PromptTemplate {
  std::string name;
  std::string text;
};

using PromptValues = std::map<std::string, std::string, std::less<>>;

// Names referenced by the template, in order of first appearance.
std::vector<std::string> template_placeholders(const PromptTemplate& tmpl);

// Throws Error(kTemplateRenderError) when a referenced placeholder has no
// value. Values the template does not reference are ignored.
std::string render_template(const PromptTemplate& tmpl, const PromptValues& values);

PromptTemplate default_describer_template();
PromptTemplate default_reasoner_template();

// Rendered in place of the candidate blocks when retrieval returned nothing.
inline constexpr std::string_view kNoContextSentinel = "(no reference entries available)";

struct PromptOptions {
  // Candidate blocks carry only `[i] <make> <model>`, no descriptions.
  bool labels_only_context = false;
};

// `[i] <make> <model>: <description>` per hit, rank order, newline-separated.
// Throws Error(kUnresolvedRecordId).
std::string format_candidates(std::span<const RetrievalHit> hits, const KnowledgeBase& kb,
                              const PromptOptions& options = {});

// Renders {description}, {candidates} and {label_list} (the knowledge base's
// labels, one `- <make> <model>` per line).
std::string build_prompt(const Description& description, std::span<const RetrievalHit> hits,
                         const KnowledgeBase& kb, const PromptTemplate& tmpl,
                         const PromptOptions& options = {});

// 16 hex digits of FNV-1a 64 over the prompt bytes. Keys recorded responses.
std::string prompt_hash(std::string_view prompt);

}  // namespace vmmr
