#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "vmmr/pipeline.hpp"

namespace vmmr::cli {

/// Everything a subcommand needs, loaded from a JSON config file and then
/// overridden by command-line flags.
struct AppConfig {
  EmbeddingBackendConfig embed_backend;
  ChatBackendConfig describer;
  ChatBackendConfig reasoner;
  std::filesystem::path kb_path = "vmmr.kb.jsonl";
  std::filesystem::path index_path = "vmmr.ragidx";
  std::filesystem::path fixtures_dir;
  std::filesystem::path report_dir = "reports";
  std::size_t default_k = 5;
  bool determinism_mode = false;
  std::optional<std::filesystem::path> describer_template;
  std::optional<std::filesystem::path> reasoner_template;
  std::size_t max_parallel_queries = 2;
  std::size_t max_in_flight = kDefaultMaxInFlight;
  bool labels_only_context = false;
  bool embed_with_label = false;

  // Throws Error(kInvalidConfig).
  void validate() const;

  // Fixture chat backends fall back to fixtures_dir when they name none.
  PipelineConfig pipeline(std::size_t k) const;
};

// Relative paths in the file resolve against base_dir. Unknown keys are
// rejected. Throws Error(kInvalidConfig) or Error(kIoError).
AppConfig parse_app_config(std::string_view json_text, const std::filesystem::path& base_dir);
AppConfig load_app_config(const std::filesystem::path& path);

}  // namespace vmmr::cli
