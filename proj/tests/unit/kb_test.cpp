#include <gtest/gtest.h>

#include "support.hpp"
#include "vmmr/error.hpp"
#include "vmmr/kb.hpp"

namespace vmmr {
namespace {

Timestamp ts(const char* text) { return *parse_rfc3339(text); }

EmbeddingBackendConfig mock64() {
  EmbeddingBackendConfig c;
  c.kind = EmbeddingBackendKind::kMock;
  c.dim = 64;
  return c;
}

const std::vector<std::pair<const char*, const char*>> kTableOne = {
    {"Ferrari", "Purosangue"}, {"Kia", "EV9"},          {"Lamborghini", "Revuelto"},
    {"Mazda", "EZ6"},          {"Mitsubishi", "Xforce"}, {"Nissan", "Ariya"},
    {"Rolls Royce", "Spectre"}, {"Toyota", "Supra GRMN"}, {"Volkswagen", "ID.Buzz"},
    {"Volvo", "EX30"}};

KnowledgeBase table_one_kb() {
  KnowledgeBase kb;
  int i = 0;
  for (auto [make, model] : kTableOne) {
    kb.ingest(canonicalize_label(make, model),
              Description(std::string("front view with feature set ") + std::to_string(i++) +
                          " of the " + model + " grille lights bumper"),
              ts("2024-01-02T03:04:05Z"));
  }
  return kb;
}

TEST(Kb, SequenceNumbersPerLabel) {
  KnowledgeBase kb;
  const auto ev9 = canonicalize_label("Kia", "EV9");
  EXPECT_EQ(kb.ingest(ev9, Description("a")), "kia/ev9#1");
  EXPECT_EQ(kb.label_set().size(), 1u);
  EXPECT_EQ(kb.ingest(canonicalize_label("Volvo", "EX30"), Description("b")), "volvo/ex30#1");
  EXPECT_EQ(kb.ingest(ev9, Description("c")), "kia/ev9#2");
  EXPECT_EQ(kb.size(), 3u);
  EXPECT_EQ(kb.label_set().size(), 2u);
  ASSERT_NE(kb.find("kia/ev9#2"), nullptr);
  EXPECT_EQ(kb.find("kia/ev9#2")->description.text(), "c");
}

TEST(Kb, TableOneIngest) {
  const auto kb = table_one_kb();
  EXPECT_EQ(kb.size(), 10u);
  EXPECT_EQ(kb.label_set().size(), 10u);
  EXPECT_EQ(kb.records()[6].record_id, "rolls-royce/spectre#1");
}

TEST(Kb, IngestNeverTouchesPriorRecords) {
  auto kb = table_one_kb();
  const std::string before = serialize_kb(kb);
  kb.ingest(canonicalize_label("Zeekr", "Mix"), Description("new"), ts("2025-01-01T00:00:00Z"));
  const std::string after = serialize_kb(kb);
  EXPECT_EQ(after.substr(0, before.size()), before);
}

TEST(Kb, AppendRejectsDuplicateId) {
  auto kb = table_one_kb();
  DescriptionRecord r = kb.records()[0];
  EXPECT_THROW(kb.append(r), Error);
}

TEST(KbFile, RoundTripFieldByField) {
  auto kb = table_one_kb();
  kb.ingest(canonicalize_label("Kia", "EV9"), Description("Second\n\"quoted\" ünïcode"),
            ts("2024-12-31T23:59:59Z"));
  testing::TempDir dir;
  save_kb(kb, dir / "x.kb.jsonl");
  const auto back = load_kb(dir / "x.kb.jsonl");
  ASSERT_EQ(back.size(), kb.size());
  for (std::size_t i = 0; i < kb.size(); ++i) {
    const auto& a = kb.records()[i];
    const auto& b = back.records()[i];
    EXPECT_EQ(a.record_id, b.record_id);
    EXPECT_EQ(a.label.canonical_id(), b.label.canonical_id());
    EXPECT_EQ(a.label.make(), b.label.make());
    EXPECT_EQ(a.label.model(), b.label.model());
    EXPECT_EQ(a.description.text(), b.description.text());
    EXPECT_EQ(a.description.source(), b.description.source());
    EXPECT_EQ(a.created_at, b.created_at);
  }
  EXPECT_EQ(back.label_set().size(), 10u);
  // ids continue after reload
  auto grown = back;
  EXPECT_EQ(grown.ingest(canonicalize_label("Kia", "EV9"), Description("third")), "kia/ev9#3");
}

TEST(KbFile, EmptyRoundTrip) {
  const auto back = parse_kb(serialize_kb(KnowledgeBase{}));
  EXPECT_TRUE(back.empty());
}

TEST(KbFile, MissingDescriptionNamesRecord) {
  const std::string text =
      "{\"format\":\"vmmr-kb\",\"version\":1}\n"
      "{\"record_id\":\"kia/ev9#1\",\"make\":\"Kia\",\"model\":\"EV9\",\"description\":\"x\","
      "\"created_at\":\"2024-01-01T00:00:00Z\",\"source\":\"fixture\"}\n"
      "{\"record_id\":\"kia/ev9#2\",\"make\":\"Kia\",\"model\":\"EV9\","
      "\"created_at\":\"2024-01-01T00:00:00Z\",\"source\":\"fixture\"}\n";
  try {
    parse_kb(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("record 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("description"), std::string::npos) << msg;
  }
}

TEST(KbFile, RejectsBadHeadersAndTimestamps) {
  const std::string rec =
      "{\"record_id\":\"kia/ev9#1\",\"make\":\"Kia\",\"model\":\"EV9\",\"description\":\"x\","
      "\"created_at\":\"yesterday\",\"source\":\"fixture\"}\n";
  for (const std::string& text :
       {std::string(""), std::string("{\"format\":\"vmmr-kb\",\"version\":2}\n"),
        std::string("{\"format\":\"other\",\"version\":1}\n"), std::string("not json\n"),
        "{\"format\":\"vmmr-kb\",\"version\":1}\n" + rec}) {
    try {
      parse_kb(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchemaError) << text;
    }
  }
}

TEST(KbIndex, SingleRecordVectorEqualsEmbedText) {
  KnowledgeBase kb;
  kb.ingest(canonicalize_label("Kia", "EV9"), Description("vertical LED cubes"));
  const auto index = build_index(kb, mock64());
  ASSERT_EQ(index.size(), 1u);
  EXPECT_EQ(index.entries()[0].vector, embed_text(mock64(), "vertical LED cubes"));
  EXPECT_EQ(index.entries()[0].record_id, "kia/ev9#1");
}

TEST(KbIndex, IdenticalDescriptionsTieByRecordOrder) {
  KnowledgeBase kb;
  kb.ingest(canonicalize_label("B", "Two"), Description("same words here"));
  kb.ingest(canonicalize_label("A", "One"), Description("same words here"));
  const auto index = build_index(kb, mock64());
  EXPECT_EQ(index.entries()[0].vector, index.entries()[1].vector);
  const auto hits = index.search(embed_text(mock64(), "same words"), 2);
  EXPECT_EQ(hits[0].record_id, "b/two#1");
  EXPECT_EQ(hits[1].record_id, "a/one#1");
}

TEST(KbIndex, SelfRetrievalOfEveryRecord) {
  const auto kb = table_one_kb();
  const auto index = build_index(kb, mock64());
  for (const auto& r : kb.records()) {
    const auto hits = index.search(embed_text(mock64(), r.description.text()), 1);
    EXPECT_EQ(hits[0].record_id, r.record_id);
    EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
  }
}

TEST(KbIndex, EmbedWithLabelUsesJsonText) {
  KnowledgeBase kb;
  kb.ingest(canonicalize_label("Kia", "EV9"), Description("cubes"));
  const auto& r = kb.records()[0];
  EXPECT_EQ(embedding_text(r, {}), "cubes");
  EXPECT_EQ(embedding_text(r, {.embed_with_label = true}),
            R"({"make":"Kia","model":"EV9","description":"cubes"})");
  const auto leaky = build_index(kb, mock64(), {.embed_with_label = true});
  EXPECT_EQ(leaky.entries()[0].vector, embed_text(mock64(), embedding_text(r, {.embed_with_label = true})));
}

TEST(KbIndex, BackendFailureYieldsNoIndex) {
  KnowledgeBase kb;
  kb.ingest(canonicalize_label("Kia", "EV9"), Description("cubes"));
  EmbeddingBackendConfig remote;
  remote.kind = EmbeddingBackendKind::kRemote;
  remote.endpoint_url = "http://127.0.0.1:1";
  remote.model_name = "m";
  remote.timeout_ms = 300;
  try {
    build_index(kb, remote);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnreachable);
  }
}

}  // namespace
}  // namespace vmmr
