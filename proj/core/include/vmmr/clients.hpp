#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "vmmr/domain.hpp"
#include "vmmr/limiter.hpp"
#include "vmmr/prompt.hpp"

namespace vmmr {

enum class ChatBackendKind { kRemote, kFixture };

struct ChatBackendConfig {
  ChatBackendKind kind = ChatBackendKind::kFixture;
  std::string endpoint_url;     // remote
  std::string model_name;       // remote
  std::string api_key_env_var;  // remote, optional
  int timeout_ms = 60000;       // remote
  std::filesystem::path fixture_dir;
  double temperature = 0.0;
  int max_output_tokens = 512;

  // Throws Error(kInvalidConfig). With determinism on, temperature must be 0.
  void validate(bool determinism_mode = false) const;
};

/// Stage 1 backend: image to description. A query that already carries a
/// description never reaches a describer.
class Describer {
 public:
  virtual ~Describer() = default;

  // Validates the input, calls the backend, and retries once if the backend
  // returns blank text. Throws kInvalidInput, kEmptyDescription,
  // kMissingFixture, or a backend error.
  Description describe(const QueryInput& input, const PromptTemplate& tmpl);

  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  virtual std::string do_describe(const QueryInput& input, const PromptTemplate& tmpl) = 0;
  virtual DescriptionSource source() const noexcept = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Reads `{fixture_dir}/descriptions/{query_id}.txt` verbatim.
class FixtureDescriber final : public Describer {
 public:
  explicit FixtureDescriber(std::filesystem::path fixture_dir);

 protected:
  std::string do_describe(const QueryInput& input, const PromptTemplate& tmpl) override;
  DescriptionSource source() const noexcept override { return DescriptionSource::kFixture; }

 private:
  std::filesystem::path dir_;
};

/// Chat-completions vision request: template text plus the image as a
/// base64 data URL content part.
class RemoteDescriber final : public Describer {
 public:
  RemoteDescriber(ChatBackendConfig config, std::shared_ptr<RequestLimiter> limiter);

 protected:
  std::string do_describe(const QueryInput& input, const PromptTemplate& tmpl) override;
  DescriptionSource source() const noexcept override { return DescriptionSource::kGenerated; }

 private:
  ChatBackendConfig config_;
  std::shared_ptr<RequestLimiter> limiter_;
};

/// Stage 3 backend: prompt to raw completion text.
class Reasoner {
 public:
  virtual ~Reasoner() = default;

  // Throws kInvalidInput for a blank prompt, kMissingFixture, or a backend error.
  std::string reason(std::string_view prompt);

  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  virtual std::string do_reason(std::string_view prompt) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Recorded responses keyed by prompt hash:
/// `{fixture_dir}/responses/{prompt_hash}.txt`.
class FixtureReasoner final : public Reasoner {
 public:
  explicit FixtureReasoner(std::filesystem::path fixture_dir);

  static std::filesystem::path response_path(const std::filesystem::path& fixture_dir,
                                             std::string_view prompt);

 protected:
  std::string do_reason(std::string_view prompt) override;

 private:
  std::filesystem::path dir_;
};

class RemoteReasoner final : public Reasoner {
 public:
  RemoteReasoner(ChatBackendConfig config, std::shared_ptr<RequestLimiter> limiter);

  // Repeated prompts at temperature 0 whose answers differed.
  std::size_t nondeterminism_warnings() const noexcept { return mismatches_.load(); }

 protected:
  std::string do_reason(std::string_view prompt) override;

 private:
  ChatBackendConfig config_;
  std::shared_ptr<RequestLimiter> limiter_;
  std::mutex seen_mu_;
  std::unordered_map<std::string, std::string> seen_;
  std::atomic<std::size_t> mismatches_{0};
};

std::unique_ptr<Describer> make_describer(const ChatBackendConfig& config,
                                          std::shared_ptr<RequestLimiter> limiter = nullptr);
std::unique_ptr<Reasoner> make_reasoner(const ChatBackendConfig& config,
                                        std::shared_ptr<RequestLimiter> limiter = nullptr);

Description describe_image(const ChatBackendConfig& backend, const QueryInput& input,
                           const PromptTemplate& tmpl);
std::string reason(const ChatBackendConfig& backend, std::string_view prompt);

}  // namespace vmmr
