#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmmr/clients.hpp"
#include "vmmr/domain.hpp"
#include "vmmr/embed.hpp"
#include "vmmr/error.hpp"
#include "vmmr/index.hpp"
#include "vmmr/kb.hpp"
#include "vmmr/prediction.hpp"
#include "vmmr/prompt.hpp"

namespace vmmr {

struct PipelineConfig {
  std::size_t k = 5;
  EmbeddingBackendConfig embed_backend;
  ChatBackendConfig describer;
  ChatBackendConfig reasoner;
  PromptTemplate describer_template = default_describer_template();
  PromptTemplate reasoner_template = default_reasoner_template();
  PromptOptions prompt_options;
  bool determinism_mode = false;
  std::size_t max_parallel_queries = 2;
  // Shared cap on concurrent describer + reasoner requests.
  std::size_t max_in_flight = kDefaultMaxInFlight;

  // Throws Error(kInvalidConfig).
  void validate() const;
};

/// An Error raised inside one pipeline stage ("describe", "embed",
/// "retrieve", "prompt", "reason", "parse").
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Output of stages 1 and the query embedding; reusable across k values.
struct DescribedQuery {
  std::string query_id;
  Description description;
  EmbeddingVector embedding;
  double describe_ms = 0;
  double embed_ms = 0;
};

struct QueryFailure {
  std::string stage;
  ErrorCode code;
  std::string message;
};

// One slot of a batch result: a prediction or the failure that replaced it.
struct BatchEntry {
  std::string query_id;
  std::optional<Prediction> prediction;
  std::optional<QueryFailure> failure;

  bool ok() const noexcept { return prediction.has_value(); }
};

/// describe -> embed -> retrieve -> prompt -> reason -> parse.
///
/// Holds the backends built from a PipelineConfig. kb and index are only
/// read, so one Recognizer can serve concurrent queries.
class Recognizer {
 public:
  explicit Recognizer(PipelineConfig config);
  // Injects backends directly (tests, instrumentation).
  Recognizer(PipelineConfig config, std::unique_ptr<Embedder> embedder,
             std::unique_ptr<Describer> describer, std::unique_ptr<Reasoner> reasoner);

  // Stages 1 and 2a. Throws StageError.
  DescribedQuery describe(const QueryInput& input);
  // Stages 2b-3 at the given k. Throws StageError.
  Prediction reason_over(const DescribedQuery& query, const KnowledgeBase& kb,
                         const VectorIndex& index, std::size_t k);

  Prediction recognize(const KnowledgeBase& kb, const VectorIndex& index,
                       const QueryInput& input);
  // Output order equals input order. Throws Error(kBatchEmpty) only;
  // per-query failures become failure entries.
  std::vector<BatchEntry> recognize_batch(const KnowledgeBase& kb, const VectorIndex& index,
                                          std::span<const QueryInput> inputs);

  const PipelineConfig& config() const noexcept { return config_; }
  Embedder& embedder() noexcept { return *embedder_; }
  Describer& describer() noexcept { return *describer_; }
  Reasoner& reasoner() noexcept { return *reasoner_; }

 private:
  PipelineConfig config_;
  std::shared_ptr<RequestLimiter> limiter_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<Describer> describer_;
  std::unique_ptr<Reasoner> reasoner_;
};

Prediction recognize(const PipelineConfig& config, const KnowledgeBase& kb,
                     const VectorIndex& index, const QueryInput& input);
std::vector<BatchEntry> recognize_batch(const PipelineConfig& config, const KnowledgeBase& kb,
                                        const VectorIndex& index,
                                        std::span<const QueryInput> inputs);

// Failed entries become abstaining predictions without hits.
std::vector<Prediction> predictions_for_eval(std::span<const BatchEntry> entries);

}  // namespace vmmr
