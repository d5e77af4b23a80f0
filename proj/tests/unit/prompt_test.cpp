#include <gtest/gtest.h>

#include "vmmr/error.hpp"
#include "vmmr/kb.hpp"
#include "vmmr/prompt.hpp"

namespace vmmr {
namespace {

KnowledgeBase two_record_kb() {
  KnowledgeBase kb;
  kb.ingest(canonicalize_label("Kia", "EV9"), Description("vertical LED cubes"));
  kb.ingest(canonicalize_label("Volvo", "EX30"), Description("Thor's hammer lights"));
  return kb;
}

std::vector<RetrievalHit> hits(std::initializer_list<const char*> ids) {
  std::vector<RetrievalHit> out;
  std::size_t rank = 1;
  for (const char* id : ids) out.push_back({id, 1.0 / static_cast<double>(rank), rank++});
  return out;
}

TEST(Template, Placeholders) {
  const PromptTemplate t{"t", "{a} and {b} then {a} {{literal}} {not valid} {"};
  EXPECT_EQ(template_placeholders(t), (std::vector<std::string>{"a", "b"}));
}

TEST(Template, RendersAndEscapes) {
  const PromptTemplate t{"t", "x={x}; {{x}}; }} {{"};
  EXPECT_EQ(render_template(t, {{"x", "1"}, {"unused", "2"}}), "x=1; {x}; } {");
}

TEST(Template, MissingValueIsRenderError) {
  try {
    render_template({"t", "{description} {candidates}"}, {{"description", "d"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTemplateRenderError);
    EXPECT_NE(std::string(e.what()).find("candidates"), std::string::npos);
  }
}

TEST(Template, ValuesAreNotReexpanded) {
  EXPECT_EQ(render_template({"t", "{a}"}, {{"a", "{b}"}}), "{b}");
}

TEST(Template, DefaultsReferenceExpectedSlots) {
  const auto reasoner = template_placeholders(default_reasoner_template());
  EXPECT_EQ(reasoner, (std::vector<std::string>{"description", "candidates", "label_list"}));
  EXPECT_NE(default_reasoner_template().text.find("ANSWER: <make> <model>"), std::string::npos);
  EXPECT_TRUE(template_placeholders(default_describer_template()).empty());
  const std::string describer = default_describer_template().text;
  for (const char* cue : {"headlight", "grille", "bumper", "hood", "badge"}) {
    EXPECT_NE(describer.find(cue), std::string::npos) << cue;
  }
}

TEST(Prompt, CandidatesInRankOrder) {
  const auto kb = two_record_kb();
  const std::string p = build_prompt(Description("query text"), hits({"volvo/ex30#1", "kia/ev9#1"}),
                                     kb, default_reasoner_template());
  const auto first = p.find("[1] Volvo EX30: Thor's hammer lights");
  const auto second = p.find("[2] Kia EV9: vertical LED cubes");
  ASSERT_NE(first, std::string::npos) << p;
  ASSERT_NE(second, std::string::npos) << p;
  EXPECT_LT(first, second);
  EXPECT_EQ(p.find("query text"), p.rfind("query text"));
  EXPECT_NE(p.find("- Kia EV9\n- Volvo EX30"), std::string::npos);
}

TEST(Prompt, EmptyContextSentinel) {
  const auto kb = two_record_kb();
  const std::string p = build_prompt(Description("query text"), {}, kb, default_reasoner_template());
  EXPECT_NE(p.find("query text"), std::string::npos);
  EXPECT_NE(p.find(kNoContextSentinel), std::string::npos);
}

TEST(Prompt, DeterministicAndOrderSensitive) {
  const auto kb = two_record_kb();
  const auto a = build_prompt(Description("q"), hits({"kia/ev9#1", "volvo/ex30#1"}), kb,
                              default_reasoner_template());
  const auto b = build_prompt(Description("q"), hits({"kia/ev9#1", "volvo/ex30#1"}), kb,
                              default_reasoner_template());
  const auto swapped = build_prompt(Description("q"), hits({"volvo/ex30#1", "kia/ev9#1"}), kb,
                                    default_reasoner_template());
  EXPECT_EQ(a, b);
  EXPECT_NE(a, swapped);
  EXPECT_NE(prompt_hash(a), prompt_hash(swapped));
}

TEST(Prompt, UnresolvedRecordId) {
  const auto kb = two_record_kb();
  try {
    build_prompt(Description("q"), hits({"nope#1"}), kb, default_reasoner_template());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnresolvedRecordId);
  }
}

TEST(Prompt, LabelsOnlyContext) {
  const auto kb = two_record_kb();
  const auto p = build_prompt(Description("q"), hits({"kia/ev9#1"}), kb, default_reasoner_template(),
                              {.labels_only_context = true});
  EXPECT_NE(p.find("[1] Kia EV9\n"), std::string::npos) << p;
  EXPECT_EQ(p.find("vertical LED cubes"), std::string::npos);
}

TEST(Prompt, HashIsSixteenHexDigitsAndByteSensitive) {
  const std::string h = prompt_hash("abc");
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_NE(prompt_hash("abc"), prompt_hash("abd"));
  EXPECT_NE(prompt_hash("abc"), prompt_hash("abc "));
}

}  // namespace
}  // namespace vmmr
