#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/limiter.hpp"

namespace vmmr {

enum class EmbeddingBackendKind { kRemote, kMock };

struct EmbeddingBackendConfig {
  EmbeddingBackendKind kind = EmbeddingBackendKind::kMock;
  std::string endpoint_url;     // remote only
  std::string model_name;       // remote only
  std::string api_key_env_var;  // remote only; optional
  std::size_t dim = 64;
  int timeout_ms = 30000;
  std::size_t max_in_flight = kDefaultMaxInFlight;
  // Inputs longer than this many bytes are truncated (0 disables).
  std::size_t max_embed_chars = 512;
  // Texts per remote request when embedding many records.
  std::size_t batch_size = 32;

  // Throws Error(kInvalidConfig).
  void validate() const;
};

/// Base for embedding backends. Enforces the contract shared by every
/// backend: non-empty input, truncation, dimension check, unit norm.
class Embedder {
 public:
  explicit Embedder(EmbeddingBackendConfig config);
  virtual ~Embedder() = default;
  Embedder(const Embedder&) = delete;
  Embedder& operator=(const Embedder&) = delete;

  EmbeddingVector embed(std::string_view text);
  // Output order matches input order.
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);

  std::size_t dim() const noexcept { return config_.dim; }
  const EmbeddingBackendConfig& config() const noexcept { return config_; }
  // Number of texts embedded so far.
  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  virtual std::vector<std::vector<double>> embed_raw(std::span<const std::string_view> texts) = 0;

 private:
  std::string_view prepare(std::string_view text) const;
  EmbeddingVector finish(std::vector<double> raw) const;

  EmbeddingBackendConfig config_;
  std::atomic<std::size_t> calls_{0};
};

// Feature hashing over lowercase alphanumeric tokens: FNV-1a 64 picks the
// bucket (hash mod dim) and the sign (+1 when bit 63 is clear). Returns the
// un-normalized accumulator.
std::vector<double> feature_hash(std::string_view text, std::size_t dim);

class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(EmbeddingBackendConfig config);

 protected:
  std::vector<std::vector<double>> embed_raw(std::span<const std::string_view> texts) override;
};

/// OpenAI-compatible `POST {endpoint}/v1/embeddings` client.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(EmbeddingBackendConfig config, std::shared_ptr<RequestLimiter> limiter);

 protected:
  std::vector<std::vector<double>> embed_raw(std::span<const std::string_view> texts) override;

 private:
  std::shared_ptr<RequestLimiter> limiter_;
};

std::unique_ptr<Embedder> make_embedder(const EmbeddingBackendConfig& config,
                                        std::shared_ptr<RequestLimiter> limiter = nullptr);

EmbeddingVector embed_text(const EmbeddingBackendConfig& config, std::string_view text);

// dot(a,b) / (|a| |b|). Throws kDimensionMismatch or kZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace vmmr
