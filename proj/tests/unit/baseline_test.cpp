#include <gtest/gtest.h>

#include "support.hpp"
#include "vmmr/baseline.hpp"
#include "vmmr/error.hpp"

namespace vmmr {
namespace {

LabelSet labels_n(std::size_t n) {
  LabelSet set;
  for (std::size_t i = 0; i < n; ++i) set.add(canonicalize_label("Make" + std::to_string(i), "M"));
  return set;
}

PairedEmbeddingSet random_set(testing::Rng& rng, const LabelSet& labels, std::size_t images,
                              std::size_t dim) {
  PairedEmbeddingSet set(dim);
  for (const auto& l : labels) {
    set.add_label(l.canonical_id(), default_label_prompt(l), EmbeddingVector::normalized(rng.vector(dim)));
  }
  for (std::size_t i = 0; i < images; ++i) {
    set.add_image("img" + std::to_string(i), EmbeddingVector::normalized(rng.vector(dim)));
  }
  return set;
}

// Brute-force argmax from raw dot products; first maximum wins.
std::string oracle(const PairedEmbeddingSet& set, const LabelSet& labels, const std::string& qid) {
  const auto& img = set.find_image(qid)->vector;
  std::string best;
  double best_score = -2.0;
  for (const auto& l : labels) {
    const auto& v = set.find_label(l.canonical_id())->vector;
    double dot = 0;
    for (std::size_t d = 0; d < v.dim(); ++d) dot += img[d] * v[d];
    if (dot > best_score) {
      best_score = dot;
      best = l.canonical_id();
    }
  }
  return best;
}

TEST(Baseline, SelfMatch) {
  const auto labels = labels_n(3);
  PairedEmbeddingSet set(3);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> v(3, 0.0);
    v[i] = 1.0;
    set.add_label(labels[i].canonical_id(), "p", EmbeddingVector(v));
  }
  set.add_image("q", EmbeddingVector({0.0, 1.0, 0.0}));
  const auto p = baseline_classify(set, labels, "q");
  EXPECT_EQ(p.label->canonical_id(), labels[1].canonical_id());
  EXPECT_EQ(p.match_rule, MatchRule::kArgmax);
  EXPECT_EQ(p.query_id, "q");
}

TEST(Baseline, TieGoesToEarlierLabel) {
  const auto labels = labels_n(3);
  PairedEmbeddingSet set(2);
  set.add_label(labels[0].canonical_id(), "p", EmbeddingVector({0.0, 1.0}));
  set.add_label(labels[1].canonical_id(), "p", EmbeddingVector({1.0, 0.0}));
  set.add_label(labels[2].canonical_id(), "p", EmbeddingVector({1.0, 0.0}));
  set.add_image("q", EmbeddingVector({1.0, 0.0}));
  EXPECT_EQ(baseline_classify(set, labels, "q").label->canonical_id(), labels[1].canonical_id());
}

TEST(Baseline, MatchesOracle) {
  testing::Rng rng(21);
  const auto labels = labels_n(10);
  const auto set = random_set(rng, labels, 100, 16);
  const BaselineClassifier clf(set, labels);
  for (const auto& img : set.images()) {
    EXPECT_EQ(clf.classify(img.query_id).label->canonical_id(), oracle(set, labels, img.query_id));
  }
}

TEST(Baseline, Errors) {
  testing::Rng rng(22);
  const auto labels = labels_n(3);
  auto set = random_set(rng, labels_n(2), 1, 4);
  try {
    BaselineClassifier clf(set, labels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLabelEmbedding);
  }
  const BaselineClassifier clf(set, labels_n(2));
  try {
    clf.classify("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownQueryId);
  }
  EXPECT_THROW(set.add_image("img0", EmbeddingVector::normalized({1, 0, 0, 0})), Error);
  EXPECT_THROW(set.add_label("x/y", "bad\tprompt", EmbeddingVector::normalized({1, 0, 0, 0})), Error);
  try {
    set.add_image("wide", EmbeddingVector::normalized({1, 0, 0, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("wide"), std::string::npos);
  }
}

TEST(Baseline, NormalizesStoredVectors) {
  PairedEmbeddingSet set(2);
  set.add_image("q", EmbeddingVector({3.0, 4.0}));
  EXPECT_TRUE(set.find_image("q")->vector.is_normalized());
}

TEST(Baseline, DefaultLabelPrompt) {
  EXPECT_EQ(default_label_prompt(canonicalize_label("Kia", "EV9")), "a photo of a Kia EV9");
}

TEST(PairedFile, RoundTripPreservesDecisions) {
  testing::Rng rng(23);
  const auto labels = labels_n(10);
  const auto set = random_set(rng, labels, 100, 512);
  testing::TempDir dir;
  save_paired_embeddings(set, dir / "p.ragpair");
  const auto back = load_paired_embeddings(dir / "p.ragpair");
  EXPECT_EQ(back.dim(), 512u);
  EXPECT_EQ(back.images().size(), 100u);
  EXPECT_EQ(back.labels().size(), 10u);
  EXPECT_EQ(back.labels()[3].prompt_text, set.labels()[3].prompt_text);
  const auto from_file = labels_from_paired(back);
  ASSERT_EQ(from_file.size(), 10u);
  EXPECT_EQ(from_file[0].canonical_id(), labels[0].canonical_id());
  for (const auto& img : set.images()) {
    EXPECT_EQ(baseline_classify(set, labels, img.query_id).label->canonical_id(),
              baseline_classify(back, labels, img.query_id).label->canonical_id());
  }
}

TEST(PairedFile, MixedDimsNameTheKey) {
  const std::string text =
      "RAGPAIR 1 3\n"
      "L\tkia/ev9\ta photo of a Kia EV9\t1,0,0\n"
      "I\tq7\t1,0\n";
  try {
    parse_paired_embeddings(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("q7"), std::string::npos);
  }
}

TEST(PairedFile, SchemaErrors) {
  for (const std::string& text : {std::string(""), std::string("RAGPAIR 2 3\n"),
                                  std::string("RAGPAIR 1 2\nX\tq\t1,0\n"),
                                  std::string("RAGPAIR 1 2\nI\tq\t1,zz\n"),
                                  std::string("RAGPAIR 1 2\nL\tkia/ev9\t1,0\n")}) {
    try {
      parse_paired_embeddings(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchemaError) << text;
    }
  }
}

TEST(Baseline, ScaleInvariance) {
  testing::Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto labels = labels_n(2 + rng.below(10));
    const std::size_t dim = 2 + rng.below(20);
    std::vector<std::vector<double>> raw_labels;
    for (std::size_t i = 0; i < labels.size(); ++i) raw_labels.push_back(rng.vector(dim));
    const auto raw_image = rng.vector(dim);

    auto build = [&](std::size_t scaled, double factor) {
      PairedEmbeddingSet set(dim);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        auto v = raw_labels[i];
        if (i == scaled) for (auto& x : v) x *= factor;
        set.add_label(labels[i].canonical_id(), "p", EmbeddingVector(v));
      }
      auto img = raw_image;
      if (scaled == labels.size()) for (auto& x : img) x *= factor;
      set.add_image("q", EmbeddingVector(img));
      return set;
    };
    const auto reference = baseline_classify(build(0, 1.0), labels, "q").label->canonical_id();
    const std::size_t which = rng.below(labels.size() + 1);
    const double factor = 0.01 + rng.unit() * 100.0;
    EXPECT_EQ(baseline_classify(build(which, factor), labels, "q").label->canonical_id(), reference);
  }
}

}  // namespace
}  // namespace vmmr
