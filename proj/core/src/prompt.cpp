#include "vmmr/prompt.hpp"

#include <optional>

#include "vmmr/error.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

namespace {

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

// Length of `{identifier}` starting at pos, or nullopt.
std::optional<std::size_t> placeholder_at(std::string_view text, std::size_t pos) {
  if (text[pos] != '{' || pos + 1 >= text.size() || !ident_start(text[pos + 1])) {
    return std::nullopt;
  }
  std::size_t end = pos + 2;
  while (end < text.size() && ident_char(text[end])) ++end;
  if (end >= text.size() || text[end] != '}') return std::nullopt;
  return end - pos + 1;
}

template <typename OnText, typename OnSlot>
void scan(std::string_view text, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c) {
      on_text(std::string_view(&text[i], 1));
      i += 2;
      continue;
    }
    if (c == '{') {
      if (auto len = placeholder_at(text, i)) {
        on_slot(text.substr(i + 1, *len - 2));
        i += *len;
        continue;
      }
    }
    on_text(std::string_view(&text[i], 1));
    ++i;
  }
}

}  // namespace

std::vector<std::string> template_placeholders(const PromptTemplate& tmpl) {
  std::vector<std::string> names;
  scan(
      tmpl.text, [](std::string_view) {},
      [&](std::string_view name) {
        for (const auto& n : names) {
          if (n == name) return;
        }
        names.emplace_back(name);
      });
  return names;
}

std::string render_template(const PromptTemplate& tmpl, const PromptValues& values) {
  std::string out;
  out.reserve(tmpl.text.size());
  scan(
      tmpl.text, [&](std::string_view t) { out += t; },
      [&](std::string_view name) {
        auto it = values.find(name);
        if (it == values.end()) {
          throw Error(ErrorCode::kTemplateRenderError,
                      "template '" + tmpl.name + "' references missing placeholder {" +
                          std::string(name) + "}");
        }
        out += it->second;
      });
  return out;
}

PromptTemplate default_describer_template() {
  return {"describer-default",
          "Describe the front end of the vehicle in this image in one paragraph. "
          "Cover only exterior features: the shape of the headlights and whether they are "
          "split into separate units, the outline and texture of the grille, the geometry of "
          "the bumper and air intakes, any creases on the hood, and the position of the badge. "
          "Be specific about details that distinguish this vehicle from similar-looking ones. "
          "Do not name any brand, make, or model."};
}

PromptTemplate default_reasoner_template() {
  return {"reasoner-default",
          "You identify vehicle makes and models from written descriptions.\n"
          "\n"
          "Query vehicle description:\n"
          "{description}\n"
          "\n"
          "Reference entries from the vehicle database, most similar first:\n"
          "{candidates}\n"
          "\n"
          "Known vehicle labels:\n"
          "{label_list}\n"
          "\n"
          "Compare the query description with each reference entry feature by feature "
          "(headlights, grille, bumper and air intakes, hood lines, badge position) and pick "
          "the entry that matches best. If there are no reference entries, pick from the known "
          "vehicle labels.\n"
          "End your reply with exactly one line of the form:\n"
          "ANSWER: <make> <model>\n"};
}

std::string format_candidates(std::span<const RetrievalHit> hits, const KnowledgeBase& kb,
                              const PromptOptions& options) {
  if (hits.empty()) return std::string(kNoContextSentinel);
  std::string out;
  std::size_t i = 0;
  for (const auto& hit : hits) {
    const DescriptionRecord* record = kb.find(hit.record_id);
    if (!record) throw Error(ErrorCode::kUnresolvedRecordId, hit.record_id);
    if (i > 0) out += '\n';
    out += '[' + std::to_string(++i) + "] " + record->label.display();
    if (!options.labels_only_context) {
      out += ": ";
      out += record->description.text();
    }
  }
  return out;
}

std::string build_prompt(const Description& description, std::span<const RetrievalHit> hits,
                         const KnowledgeBase& kb, const PromptTemplate& tmpl,
                         const PromptOptions& options) {
  std::string label_list;
  for (const auto& label : kb.label_set()) {
    if (!label_list.empty()) label_list += '\n';
    label_list += "- " + label.display();
  }
  if (label_list.empty()) label_list = "(none)";

  PromptValues values;
  values["description"] = description.text();
  values["candidates"] = format_candidates(hits, kb, options);
  values["label_list"] = std::move(label_list);
  return render_template(tmpl, values);
}

std::string prompt_hash(std::string_view prompt) { return hex64(fnv1a64(prompt)); }

}  // namespace vmmr
