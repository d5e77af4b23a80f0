#include "app_config.hpp"

#include <algorithm>

#include "json.hpp"

#include "vmmr/util.hpp"

namespace vmmr::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); }

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      bad("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad("'" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& out,
               const std::filesystem::path& base, const std::string& where) {
  std::string text;
  if (!obj.contains(key)) return;
  read(obj, key, text, where);
  std::filesystem::path p(text);
  out = p.is_relative() && !text.empty() ? base / p : p;
}

EmbeddingBackendConfig parse_embed(const json& j, const std::filesystem::path& base) {
  const std::string where = "embed_backend";
  if (!j.is_object()) bad(where + " must be an object");
  reject_unknown(j,
                 {"kind", "endpoint_url", "model_name", "api_key_env_var", "dim", "timeout_ms",
                  "max_embed_chars", "batch_size"},
                 where);
  EmbeddingBackendConfig c;
  std::string kind = "mock";
  read(j, "kind", kind, where);
  if (kind == "mock") {
    c.kind = EmbeddingBackendKind::kMock;
  } else if (kind == "remote") {
    c.kind = EmbeddingBackendKind::kRemote;
  } else {
    bad("embed_backend.kind must be 'mock' or 'remote', got '" + kind + "'");
  }
  read(j, "endpoint_url", c.endpoint_url, where);
  read(j, "model_name", c.model_name, where);
  read(j, "api_key_env_var", c.api_key_env_var, where);
  read(j, "dim", c.dim, where);
  read(j, "timeout_ms", c.timeout_ms, where);
  read(j, "max_embed_chars", c.max_embed_chars, where);
  read(j, "batch_size", c.batch_size, where);
  (void)base;
  return c;
}

ChatBackendConfig parse_chat(const json& j, const std::filesystem::path& base,
                             const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  reject_unknown(j,
                 {"kind", "endpoint_url", "model_name", "api_key_env_var", "timeout_ms",
                  "fixture_dir", "temperature", "max_output_tokens"},
                 where);
  ChatBackendConfig c;
  std::string kind = "fixture";
  read(j, "kind", kind, where);
  if (kind == "fixture") {
    c.kind = ChatBackendKind::kFixture;
  } else if (kind == "remote") {
    c.kind = ChatBackendKind::kRemote;
  } else {
    bad(where + ".kind must be 'fixture' or 'remote', got '" + kind + "'");
  }
  read(j, "endpoint_url", c.endpoint_url, where);
  read(j, "model_name", c.model_name, where);
  read(j, "api_key_env_var", c.api_key_env_var, where);
  read(j, "timeout_ms", c.timeout_ms, where);
  read_path(j, "fixture_dir", c.fixture_dir, base, where);
  read(j, "temperature", c.temperature, where);
  read(j, "max_output_tokens", c.max_output_tokens, where);
  return c;
}

}  // namespace

void AppConfig::validate() const {
  if (default_k == 0) bad("default_k must be at least 1");
  if (max_in_flight == 0) bad("max_in_flight must be at least 1");
  pipeline(default_k).validate();
}

PipelineConfig AppConfig::pipeline(std::size_t k) const {
  PipelineConfig p;
  p.k = k;
  p.embed_backend = embed_backend;
  p.describer = describer;
  p.reasoner = reasoner;
  for (auto* chat : {&p.describer, &p.reasoner}) {
    if (chat->kind == ChatBackendKind::kFixture && chat->fixture_dir.empty()) {
      chat->fixture_dir = fixtures_dir;
    }
  }
  if (describer_template) {
    p.describer_template = {describer_template->filename().string(),
                            read_text_file(*describer_template)};
  }
  if (reasoner_template) {
    p.reasoner_template = {reasoner_template->filename().string(),
                           read_text_file(*reasoner_template)};
  }
  p.prompt_options.labels_only_context = labels_only_context;
  p.determinism_mode = determinism_mode;
  p.max_parallel_queries = max_parallel_queries;
  p.max_in_flight = max_in_flight;
  return p;
}

AppConfig parse_app_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config must be a JSON object");
  const std::string where = "config";
  reject_unknown(j,
                 {"embed_backend", "describer", "reasoner", "kb_path", "index_path",
                  "fixtures_dir", "report_dir", "default_k", "determinism_mode", "templates",
                  "max_parallel_queries", "max_in_flight", "labels_only_context",
                  "embed_with_label", "max_embed_chars"},
                 where);

  AppConfig c;
  if (auto it = j.find("embed_backend"); it != j.end()) c.embed_backend = parse_embed(*it, base_dir);
  if (auto it = j.find("describer"); it != j.end()) {
    c.describer = parse_chat(*it, base_dir, "describer");
  }
  if (auto it = j.find("reasoner"); it != j.end()) c.reasoner = parse_chat(*it, base_dir, "reasoner");
  read_path(j, "kb_path", c.kb_path, base_dir, where);
  read_path(j, "index_path", c.index_path, base_dir, where);
  read_path(j, "fixtures_dir", c.fixtures_dir, base_dir, where);
  read_path(j, "report_dir", c.report_dir, base_dir, where);
  read(j, "default_k", c.default_k, where);
  read(j, "determinism_mode", c.determinism_mode, where);
  read(j, "max_parallel_queries", c.max_parallel_queries, where);
  read(j, "max_in_flight", c.max_in_flight, where);
  read(j, "labels_only_context", c.labels_only_context, where);
  read(j, "embed_with_label", c.embed_with_label, where);
  read(j, "max_embed_chars", c.embed_backend.max_embed_chars, where);
  if (auto it = j.find("templates"); it != j.end()) {
    if (!it->is_object()) bad("templates must be an object");
    reject_unknown(*it, {"describer", "reasoner"}, "templates");
    std::filesystem::path p;
    if (it->contains("describer")) {
      read_path(*it, "describer", p, base_dir, "templates");
      c.describer_template = p;
    }
    if (it->contains("reasoner")) {
      read_path(*it, "reasoner", p, base_dir, "templates");
      c.reasoner_template = p;
    }
  }
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  return parse_app_config(read_text_file(path), path.parent_path());
}

}  // namespace vmmr::cli
