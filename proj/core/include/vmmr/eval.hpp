#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/pipeline.hpp"
#include "vmmr/prediction.hpp"
#include "vmmr/runlog.hpp"

namespace vmmr {

/// Rows are true labels, columns are predicted labels plus a trailing
/// "abstain" column.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(LabelSet labels);

  const LabelSet& labels() const noexcept { return labels_; }
  std::size_t classes() const noexcept { return labels_.size(); }
  std::size_t columns() const noexcept { return labels_.size() + 1; }
  std::size_t abstain_column() const noexcept { return labels_.size(); }

  std::size_t at(std::size_t row, std::size_t col) const { return counts_[row * columns() + col]; }
  void increment(std::size_t row, std::size_t col) { ++counts_[row * columns() + col]; }

  std::size_t row_sum(std::size_t row) const;
  // Excludes nothing: counts every row's entry in this column.
  std::size_t column_sum(std::size_t col) const;
  std::size_t trace() const;
  std::size_t total() const;

 private:
  LabelSet labels_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  double accuracy = 0;  // equals recall in the single-label setting
  double recall = 0;
  double precision = 0;  // 0 when the class is never predicted
  std::size_t support = 0;
  std::size_t predicted = 0;
  std::size_t true_positives = 0;
};

/// Where the true label's first record sat among each query's hits.
struct RankDistribution {
  std::vector<std::size_t> by_rank;  // by_rank[r - 1] = queries first matched at rank r
  std::size_t miss = 0;

  std::size_t total() const noexcept;
};

struct EvalReport {
  std::string method;
  std::size_t k = 0;
  std::size_t n_queries = 0;
  std::size_t abstentions = 0;
  double accuracy = 0;          // micro: trace / n
  double macro_recall = 0;      // unweighted mean over active classes
  double macro_precision = 0;   // unweighted mean over active classes
  std::vector<ClassMetrics> per_class;  // parallel to confusion.labels()
  ConfusionMatrix confusion{LabelSet{}};
  RankDistribution ranks;

  const ClassMetrics* find_class(std::string_view canonical_id) const;
};

inline constexpr std::string_view kRagMethodName = "RAG-based LLM";
inline constexpr std::string_view kBaselineMethodName = "CLIP-style baseline";

/// Confusion matrix and metrics for a prediction list.
///
/// `labels` fixes the class order; any true or predicted label missing from
/// it is appended. A class is active when it has support or was predicted;
/// macro means run over active classes and are computed in exact rational
/// arithmetic. Throws kEmptyPredictionList or kMissingTruth.
EvalReport compute_report(std::span<const Prediction> predictions, const TruthMap& truths,
                          std::size_t k, const LabelSet& labels = {},
                          std::string method = std::string(kRagMethodName));

struct SweepRow {
  std::size_t k = 0;            // requested
  std::size_t effective_k = 0;  // clamped to the index size
  EvalReport report;
  std::vector<BatchEntry> entries;
};

/// Runs the pipeline once per k (ascending, de-duplicated). Each query is
/// described and embedded exactly once for the whole sweep; retrieval,
/// prompting, reasoning and parsing re-run per k.
std::vector<SweepRow> sweep_k(Recognizer& recognizer, const KnowledgeBase& kb,
                              const VectorIndex& index, std::span<const QueryInput> inputs,
                              const TruthMap& truths, std::span<const std::size_t> k_values,
                              const LabelSet& labels = {});

}  // namespace vmmr
