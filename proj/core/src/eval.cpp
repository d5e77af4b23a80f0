#include "vmmr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>
#include <spdlog/spdlog.h>

#include "parallel.hpp"
#include "vmmr/error.hpp"

namespace vmmr {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Correctly rounded when numerator and denominator are below 2^53, which
// covers every ratio of query counts.
double to_double(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  const BigInt limit = BigInt(1) << 53;
  if (boost::multiprecision::abs(num) < limit && den < limit) {
    return num.convert_to<double>() / den.convert_to<double>();
  }
  return static_cast<double>(num.convert_to<long double>() / den.convert_to<long double>());
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(LabelSet labels)
    : labels_(std::move(labels)), counts_(labels_.size() * (labels_.size() + 1), 0) {}

std::size_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < columns(); ++c) s += at(row, c);
  return s;
}

std::size_t ConfusionMatrix::column_sum(std::size_t col) const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < classes(); ++r) s += at(r, col);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes(); ++i) s += at(i, i);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::size_t RankDistribution::total() const noexcept {
  std::size_t s = miss;
  for (auto c : by_rank) s += c;
  return s;
}

const ClassMetrics* EvalReport::find_class(std::string_view canonical_id) const {
  auto pos = confusion.labels().position(canonical_id);
  return pos ? &per_class[*pos] : nullptr;
}

EvalReport compute_report(std::span<const Prediction> predictions, const TruthMap& truths,
                          std::size_t k, const LabelSet& labels, std::string method) {
  if (predictions.empty()) throw Error(ErrorCode::kEmptyPredictionList, "nothing to evaluate");

  LabelSet universe = labels;
  for (const auto& p : predictions) {
    auto it = truths.find(p.query_id);
    if (it == truths.end()) {
      throw Error(ErrorCode::kMissingTruth, "no true label for query '" + p.query_id + "'");
    }
    universe.insert_if_absent(it->second);
  }
  for (const auto& p : predictions) {
    if (p.label) universe.insert_if_absent(*p.label);
  }

  EvalReport report;
  report.method = std::move(method);
  report.k = k;
  report.n_queries = predictions.size();
  report.confusion = ConfusionMatrix(universe);
  auto& cm = report.confusion;

  std::size_t max_rank = k;
  for (const auto& p : predictions) {
    for (const auto& h : p.hits) max_rank = std::max(max_rank, h.rank);
  }
  report.ranks.by_rank.assign(max_rank, 0);

  for (const auto& p : predictions) {
    const VehicleLabel& truth = truths.find(p.query_id)->second;
    const std::size_t row = *universe.position(truth.canonical_id());
    const std::size_t col = p.label ? *universe.position(p.label->canonical_id())
                                    : cm.abstain_column();
    cm.increment(row, col);
    if (!p.label) ++report.abstentions;

    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < p.hits.size() && i < p.hit_labels.size(); ++i) {
      if (p.hit_labels[i] == truth) {
        first = p.hits[i].rank;
        break;
      }
    }
    if (first && *first >= 1) {
      ++report.ranks.by_rank[*first - 1];
    } else {
      ++report.ranks.miss;
    }
  }

  Rational recall_sum = 0, precision_sum = 0;
  std::size_t active = 0;
  report.per_class.resize(cm.classes());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    ClassMetrics& m = report.per_class[c];
    m.true_positives = cm.at(c, c);
    m.support = cm.row_sum(c);
    m.predicted = cm.column_sum(c);
    m.recall = ratio(m.true_positives, m.support);
    m.precision = ratio(m.true_positives, m.predicted);
    m.accuracy = m.recall;
    if (m.support == 0 && m.predicted == 0) continue;
    ++active;
    if (m.support > 0) recall_sum += Rational(m.true_positives, m.support);
    if (m.predicted > 0) precision_sum += Rational(m.true_positives, m.predicted);
  }
  report.accuracy = to_double(Rational(cm.trace(), report.n_queries));
  if (active > 0) {
    report.macro_recall = to_double(recall_sum / active);
    report.macro_precision = to_double(precision_sum / active);
  }
  return report;
}

std::vector<SweepRow> sweep_k(Recognizer& recognizer, const KnowledgeBase& kb,
                              const VectorIndex& index, std::span<const QueryInput> inputs,
                              const TruthMap& truths, std::span<const std::size_t> k_values,
                              const LabelSet& labels) {
  if (k_values.empty()) throw Error(ErrorCode::kInvalidInput, "no k values given");
  if (inputs.empty()) throw Error(ErrorCode::kBatchEmpty, "no queries given");
  std::set<std::size_t> ks;
  for (auto k : k_values) {
    if (k == 0) throw Error(ErrorCode::kInvalidInput, "k values must be at least 1");
    ks.insert(k);
  }

  // Stage 1 runs once per query for the whole sweep.
  std::vector<std::optional<DescribedQuery>> described(inputs.size());
  std::vector<std::optional<QueryFailure>> failures(inputs.size());
  const std::size_t workers = recognizer.config().max_parallel_queries;
  detail::parallel_for(inputs.size(), workers, [&](std::size_t i) {
    try {
      described[i] = recognizer.describe(inputs[i]);
    } catch (const StageError& e) {
      failures[i] = QueryFailure{e.stage(), e.code(), e.what()};
    } catch (const std::exception& e) {
      failures[i] = QueryFailure{"internal", ErrorCode::kInvalidInput, e.what()};
    }
  });

  std::vector<SweepRow> rows;
  for (const std::size_t k : ks) {
    SweepRow row;
    row.k = k;
    row.effective_k = std::min(k, index.size());
    if (k > index.size()) {
      spdlog::warn("k={} exceeds knowledge base size {}; clamped", k, index.size());
    }
    row.entries.resize(inputs.size());
    detail::parallel_for(inputs.size(), workers, [&](std::size_t i) {
      BatchEntry& slot = row.entries[i];
      slot.query_id = inputs[i].id;
      if (!described[i]) {
        slot.failure = failures[i];
        return;
      }
      try {
        slot.prediction = recognizer.reason_over(*described[i], kb, index, std::max<std::size_t>(1, row.effective_k));
      } catch (const StageError& e) {
        slot.failure = QueryFailure{e.stage(), e.code(), e.what()};
      } catch (const std::exception& e) {
        slot.failure = QueryFailure{"internal", ErrorCode::kInvalidInput, e.what()};
      }
    });
    const auto preds = predictions_for_eval(row.entries);
    row.report = compute_report(preds, truths, row.effective_k, labels);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vmmr
