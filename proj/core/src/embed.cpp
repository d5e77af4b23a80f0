#include "vmmr/embed.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "http.hpp"
#include "json.hpp"
#include "vmmr/error.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

using nlohmann::json;

void EmbeddingBackendConfig::validate() const {
  if (dim == 0) throw Error(ErrorCode::kInvalidConfig, "embedding dim must be positive");
  if (timeout_ms <= 0) throw Error(ErrorCode::kInvalidConfig, "timeout_ms must be positive");
  if (kind == EmbeddingBackendKind::kRemote) {
    if (endpoint_url.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "remote embedder needs endpoint_url");
    }
    if (model_name.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "remote embedder needs model_name");
    }
  }
}

Embedder::Embedder(EmbeddingBackendConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string_view Embedder::prepare(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::kInvalidInput, "cannot embed blank text");
  if (config_.max_embed_chars > 0 && text.size() > config_.max_embed_chars) {
    spdlog::warn("embedding input of {} bytes truncated to {}", text.size(),
                 config_.max_embed_chars);
    return utf8_prefix(text, config_.max_embed_chars);
  }
  return text;
}

EmbeddingVector Embedder::finish(std::vector<double> raw) const {
  if (raw.size() != config_.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "backend returned " + std::to_string(raw.size()) +
                                                   " values, expected " +
                                                   std::to_string(config_.dim));
  }
  return EmbeddingVector::normalized(std::move(raw));
}

EmbeddingVector Embedder::embed(std::string_view text) {
  const std::string_view prepared[] = {prepare(text)};
  auto raw = embed_raw(prepared);
  if (raw.size() != 1) throw Error(ErrorCode::kBackendProtocolError, "expected one embedding");
  ++calls_;
  return finish(std::move(raw.front()));
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::size_t chunk = config_.batch_size == 0 ? 1 : config_.batch_size;
  for (std::size_t start = 0; start < texts.size(); start += chunk) {
    const std::size_t end = std::min(texts.size(), start + chunk);
    std::vector<std::string_view> prepared;
    prepared.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) prepared.push_back(prepare(texts[i]));
    auto raw = embed_raw(prepared);
    if (raw.size() != prepared.size()) {
      throw Error(ErrorCode::kBackendProtocolError,
                  "expected " + std::to_string(prepared.size()) + " embeddings, got " +
                      std::to_string(raw.size()));
    }
    for (auto& values : raw) out.push_back(finish(std::move(values)));
    calls_ += prepared.size();
  }
  return out;
}

std::vector<double> feature_hash(std::string_view text, std::size_t dim) {
  std::vector<double> acc(dim, 0.0);
  if (dim == 0) return acc;
  auto is_alnum = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  };
  const std::string lowered = to_lower_ascii(text);
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && !is_alnum(lowered[i])) ++i;
    const std::size_t start = i;
    while (i < lowered.size() && is_alnum(lowered[i])) ++i;
    if (i == start) break;
    const std::uint64_t h = fnv1a64(std::string_view(lowered).substr(start, i - start));
    const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    acc[h % dim] += sign;
  }
  return acc;
}

MockEmbedder::MockEmbedder(EmbeddingBackendConfig config) : Embedder(std::move(config)) {}

std::vector<std::vector<double>> MockEmbedder::embed_raw(
    std::span<const std::string_view> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (auto text : texts) {
    auto acc = feature_hash(text, dim());
    bool all_zero = true;
    for (double v : acc) all_zero = all_zero && v == 0.0;
    if (all_zero) acc[0] = 1.0;  // e_0 for token-free or cancelling input
    out.push_back(std::move(acc));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(EmbeddingBackendConfig config,
                               std::shared_ptr<RequestLimiter> limiter)
    : Embedder(std::move(config)), limiter_(std::move(limiter)) {
  if (!limiter_) limiter_ = std::make_shared<RequestLimiter>(this->config().max_in_flight);
}

std::vector<std::vector<double>> RemoteEmbedder::embed_raw(
    std::span<const std::string_view> texts) {
  json input = json::array();
  for (auto text : texts) input.push_back(std::string(text));
  const json body = {{"model", config().model_name}, {"input", std::move(input)}};

  http::PostRequest req;
  req.endpoint_url = config().endpoint_url;
  req.path = "/v1/embeddings";
  req.body = body.dump();
  req.api_key_env_var = config().api_key_env_var;
  req.timeout_ms = config().timeout_ms;
  const std::string response = http::post_json(req, limiter_.get());

  try {
    const json parsed = json::parse(response);
    const json& data = parsed.at("data");
    if (!data.is_array() || data.size() != texts.size()) {
      throw Error(ErrorCode::kBackendProtocolError, "embedding response has wrong item count");
    }
    std::vector<std::vector<double>> out(texts.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const json& item = data[i];
      std::size_t slot = i;
      if (item.contains("index")) slot = item.at("index").get<std::size_t>();
      if (slot >= out.size() || !out[slot].empty()) {
        throw Error(ErrorCode::kBackendProtocolError, "embedding response has bad index");
      }
      out[slot] = item.at("embedding").get<std::vector<double>>();
      if (out[slot].empty()) {
        throw Error(ErrorCode::kBackendProtocolError, "embedding response has empty vector");
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendProtocolError,
                std::string("malformed embedding response: ") + e.what());
  }
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingBackendConfig& config,
                                        std::shared_ptr<RequestLimiter> limiter) {
  if (config.kind == EmbeddingBackendKind::kMock) return std::make_unique<MockEmbedder>(config);
  return std::make_unique<RemoteEmbedder>(config, std::move(limiter));
}

EmbeddingVector embed_text(const EmbeddingBackendConfig& config, std::string_view text) {
  return make_embedder(config)->embed(text);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine_similarity: " + std::to_string(a.size()) +
                                                   " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::kZeroVector, "cosine_similarity");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(a.values(), b.values());
}

}  // namespace vmmr
