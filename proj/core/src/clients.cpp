#include "vmmr/clients.hpp"

#include <fstream>
#include <iterator>
#include <vector>

#include <spdlog/spdlog.h>

#include "http.hpp"
#include "json.hpp"
#include "vmmr/error.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

using nlohmann::json;

void ChatBackendConfig::validate(bool determinism_mode) const {
  if (kind == ChatBackendKind::kRemote) {
    if (endpoint_url.empty()) throw Error(ErrorCode::kInvalidConfig, "remote chat needs endpoint_url");
    if (model_name.empty()) throw Error(ErrorCode::kInvalidConfig, "remote chat needs model_name");
    if (timeout_ms <= 0) throw Error(ErrorCode::kInvalidConfig, "timeout_ms must be positive");
  } else if (fixture_dir.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "fixture backend needs fixture_dir");
  }
  if (temperature < 0.0) throw Error(ErrorCode::kInvalidConfig, "temperature must be >= 0");
  if (determinism_mode && temperature != 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "determinism mode requires temperature 0");
  }
  if (max_output_tokens <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "max_output_tokens must be positive");
  }
}

namespace {

std::string chat_complete(const ChatBackendConfig& config, json messages,
                          RequestLimiter* limiter) {
  const json body = {{"model", config.model_name},
                     {"temperature", config.temperature},
                     {"max_tokens", config.max_output_tokens},
                     {"messages", std::move(messages)}};
  http::PostRequest req;
  req.endpoint_url = config.endpoint_url;
  req.path = "/v1/chat/completions";
  req.body = body.dump();
  req.api_key_env_var = config.api_key_env_var;
  req.timeout_ms = config.timeout_ms;
  const std::string response = http::post_json(req, limiter);

  try {
    const json parsed = json::parse(response);
    const json& content = parsed.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_null()) return {};
    // some servers return content as a list of typed parts
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
    }
    return text;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendProtocolError,
                std::string("malformed chat response: ") + e.what());
  }
}

std::string guess_mime(const std::filesystem::path& path) {
  const std::string ext = to_lower_ascii(path.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

std::string image_data_url(const ImagePayload& image) {
  if (!image.path.empty()) {
    std::ifstream in(image.path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kInvalidInput, "cannot read image " + image.path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                           std::istreambuf_iterator<char>());
    const std::string mime = image.mime_type.empty() ? guess_mime(image.path) : image.mime_type;
    return "data:" + mime + ";base64," + base64_encode(bytes);
  }
  if (image.base64.empty()) throw Error(ErrorCode::kInvalidInput, "image payload is empty");
  if (image.base64.rfind("data:", 0) == 0) return image.base64;
  return "data:" + (image.mime_type.empty() ? std::string("image/jpeg") : image.mime_type) +
         ";base64," + image.base64;
}

std::string read_fixture(const std::filesystem::path& path, const std::string& what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kMissingFixture, what + " (" + path.string() + ")");
  }
  return read_text_file(path);
}

}  // namespace

Description Describer::describe(const QueryInput& input, const PromptTemplate& tmpl) {
  validate_query(input);
  if (const auto* given = std::get_if<Description>(&input.payload)) return *given;

  for (int attempt = 0; attempt < 2; ++attempt) {
    ++calls_;
    std::string text = do_describe(input, tmpl);
    if (!trim(text).empty()) return Description(std::move(text), source());
    spdlog::warn("describer returned blank text for '{}' (attempt {})", input.id, attempt + 1);
  }
  throw Error(ErrorCode::kEmptyDescription, "describer returned blank text for '" + input.id + "'");
}

FixtureDescriber::FixtureDescriber(std::filesystem::path fixture_dir)
    : dir_(std::move(fixture_dir)) {}

std::string FixtureDescriber::do_describe(const QueryInput& input, const PromptTemplate&) {
  return read_fixture(dir_ / "descriptions" / (input.id + ".txt"),
                      "no description fixture for query '" + input.id + "'");
}

RemoteDescriber::RemoteDescriber(ChatBackendConfig config, std::shared_ptr<RequestLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  config_.validate();
  if (!limiter_) limiter_ = std::make_shared<RequestLimiter>(kDefaultMaxInFlight);
}

std::string RemoteDescriber::do_describe(const QueryInput& input, const PromptTemplate& tmpl) {
  const auto* image = std::get_if<ImagePayload>(&input.payload);
  if (!image) throw Error(ErrorCode::kInvalidInput, "query '" + input.id + "' has no image");
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", render_template(tmpl, {})}});
  content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_data_url(*image)}}}});
  json messages = json::array({{{"role", "user"}, {"content", std::move(content)}}});
  return chat_complete(config_, std::move(messages), limiter_.get());
}

std::string Reasoner::reason(std::string_view prompt) {
  if (trim(prompt).empty()) throw Error(ErrorCode::kInvalidInput, "prompt is blank");
  ++calls_;
  return do_reason(prompt);
}

FixtureReasoner::FixtureReasoner(std::filesystem::path fixture_dir) : dir_(std::move(fixture_dir)) {}

std::filesystem::path FixtureReasoner::response_path(const std::filesystem::path& fixture_dir,
                                                     std::string_view prompt) {
  return fixture_dir / "responses" / (prompt_hash(prompt) + ".txt");
}

std::string FixtureReasoner::do_reason(std::string_view prompt) {
  return read_fixture(response_path(dir_, prompt),
                      "no recorded response for prompt hash " + prompt_hash(prompt));
}

RemoteReasoner::RemoteReasoner(ChatBackendConfig config, std::shared_ptr<RequestLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  config_.validate();
  if (!limiter_) limiter_ = std::make_shared<RequestLimiter>(kDefaultMaxInFlight);
}

std::string RemoteReasoner::do_reason(std::string_view prompt) {
  json messages = json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  std::string answer = chat_complete(config_, std::move(messages), limiter_.get());

  if (config_.temperature == 0.0) {
    const std::string key = prompt_hash(prompt);
    std::lock_guard lock(seen_mu_);
    auto [it, inserted] = seen_.emplace(key, answer);
    if (!inserted && it->second != answer) {
      ++mismatches_;
      spdlog::warn("nondeterministic reasoner: prompt {} answered differently at temperature 0",
                   key);
    }
  }
  return answer;
}

std::unique_ptr<Describer> make_describer(const ChatBackendConfig& config,
                                          std::shared_ptr<RequestLimiter> limiter) {
  if (config.kind == ChatBackendKind::kFixture) {
    config.validate();
    return std::make_unique<FixtureDescriber>(config.fixture_dir);
  }
  return std::make_unique<RemoteDescriber>(config, std::move(limiter));
}

std::unique_ptr<Reasoner> make_reasoner(const ChatBackendConfig& config,
                                        std::shared_ptr<RequestLimiter> limiter) {
  if (config.kind == ChatBackendKind::kFixture) {
    config.validate();
    return std::make_unique<FixtureReasoner>(config.fixture_dir);
  }
  return std::make_unique<RemoteReasoner>(config, std::move(limiter));
}

Description describe_image(const ChatBackendConfig& backend, const QueryInput& input,
                           const PromptTemplate& tmpl) {
  return make_describer(backend)->describe(input, tmpl);
}

std::string reason(const ChatBackendConfig& backend, std::string_view prompt) {
  return make_reasoner(backend)->reason(prompt);
}

}  // namespace vmmr
