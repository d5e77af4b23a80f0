#include "vmmr/pipeline.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "parallel.hpp"
#include "vmmr/parse.hpp"

namespace vmmr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

PipelineConfig prepared(PipelineConfig config) {
  if (config.determinism_mode) {
    for (auto* chat : {&config.describer, &config.reasoner}) {
      if (chat->temperature != 0.0) {
        spdlog::info("determinism mode: forcing temperature 0 (was {})", chat->temperature);
        chat->temperature = 0.0;
      }
    }
  }
  config.validate();
  return config;
}

}  // namespace

void PipelineConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::kInvalidConfig, "k must be at least 1");
  if (max_parallel_queries == 0) {
    throw Error(ErrorCode::kInvalidConfig, "max_parallel_queries must be at least 1");
  }
  embed_backend.validate();
  describer.validate(determinism_mode);
  reasoner.validate(determinism_mode);
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

Recognizer::Recognizer(PipelineConfig config) : config_(prepared(std::move(config))) {
  limiter_ = std::make_shared<RequestLimiter>(config_.max_in_flight);
  embedder_ = make_embedder(config_.embed_backend, limiter_);
  describer_ = make_describer(config_.describer, limiter_);
  reasoner_ = make_reasoner(config_.reasoner, limiter_);
}

Recognizer::Recognizer(PipelineConfig config, std::unique_ptr<Embedder> embedder,
                       std::unique_ptr<Describer> describer, std::unique_ptr<Reasoner> reasoner)
    : config_(std::move(config)),
      embedder_(std::move(embedder)),
      describer_(std::move(describer)),
      reasoner_(std::move(reasoner)) {
  if (config_.k == 0) throw Error(ErrorCode::kInvalidConfig, "k must be at least 1");
}

DescribedQuery Recognizer::describe(const QueryInput& input) {
  auto t0 = Clock::now();
  Description description = in_stage("describe", [&] {
    return describer_->describe(input, config_.describer_template);
  });
  const double describe_ms = ms_since(t0);

  t0 = Clock::now();
  EmbeddingVector embedding = in_stage("embed", [&] { return embedder_->embed(description.text()); });
  return {input.id, std::move(description), std::move(embedding), describe_ms, ms_since(t0)};
}

Prediction Recognizer::reason_over(const DescribedQuery& query, const KnowledgeBase& kb,
                                   const VectorIndex& index, std::size_t k) {
  auto t0 = Clock::now();
  auto hits = in_stage("retrieve", [&] { return index.search(query.embedding, k); });
  const double retrieve_ms = ms_since(t0);

  std::vector<VehicleLabel> hit_labels;
  const std::string prompt = in_stage("prompt", [&] {
    for (const auto& hit : hits) {
      const auto* record = kb.find(hit.record_id);
      if (!record) throw Error(ErrorCode::kUnresolvedRecordId, hit.record_id);
      hit_labels.push_back(record->label);
    }
    return build_prompt(query.description, hits, kb, config_.reasoner_template,
                        config_.prompt_options);
  });

  t0 = Clock::now();
  std::string raw = in_stage("reason", [&] { return reasoner_->reason(prompt); });
  const double reason_ms = ms_since(t0);

  Prediction p = in_stage("parse", [&] { return parse_prediction(raw, hit_labels, kb.label_set()); });
  p.query_id = query.query_id;
  p.hits = std::move(hits);
  p.hit_labels = std::move(hit_labels);
  p.description_used = query.description;
  p.prompt_hash = prompt_hash(prompt);
  p.latency = {query.describe_ms, query.embed_ms, retrieve_ms, reason_ms};
  return p;
}

Prediction Recognizer::recognize(const KnowledgeBase& kb, const VectorIndex& index,
                                 const QueryInput& input) {
  return reason_over(describe(input), kb, index, config_.k);
}

std::vector<BatchEntry> Recognizer::recognize_batch(const KnowledgeBase& kb,
                                                    const VectorIndex& index,
                                                    std::span<const QueryInput> inputs) {
  if (inputs.empty()) throw Error(ErrorCode::kBatchEmpty, "no queries given");
  std::vector<BatchEntry> out(inputs.size());
  detail::parallel_for(inputs.size(), config_.max_parallel_queries, [&](std::size_t i) {
    BatchEntry& slot = out[i];
    slot.query_id = inputs[i].id;
    try {
      slot.prediction = recognize(kb, index, inputs[i]);
    } catch (const StageError& e) {
      slot.failure = QueryFailure{e.stage(), e.code(), e.what()};
    } catch (const std::exception& e) {
      slot.failure = QueryFailure{"internal", ErrorCode::kInvalidInput, e.what()};
    }
    if (slot.failure) spdlog::warn("query '{}' failed: {}", slot.query_id, slot.failure->message);
  });
  return out;
}

Prediction recognize(const PipelineConfig& config, const KnowledgeBase& kb,
                     const VectorIndex& index, const QueryInput& input) {
  return Recognizer(config).recognize(kb, index, input);
}

std::vector<BatchEntry> recognize_batch(const PipelineConfig& config, const KnowledgeBase& kb,
                                        const VectorIndex& index,
                                        std::span<const QueryInput> inputs) {
  return Recognizer(config).recognize_batch(kb, index, inputs);
}

std::vector<Prediction> predictions_for_eval(std::span<const BatchEntry> entries) {
  std::vector<Prediction> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.prediction) {
      out.push_back(*e.prediction);
    } else {
      Prediction p;
      p.query_id = e.query_id;
      p.match_rule = MatchRule::kAbstain;
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace vmmr
