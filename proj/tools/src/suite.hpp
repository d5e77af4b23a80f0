#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vmmr::cli {

/// Writes the offline evaluation suite into dir: 10 labels with one
/// reference description each, 100 queries with placeholder images and
/// recorded descriptions, true labels, a prebuilt knowledge base and index
/// (mock embedder, dim 64), recorded reasoner responses for k = 1..10 under
/// the default templates, a paired-embeddings file for the baseline, a
/// config.json, and an `extra/` label for zero-shot update checks.
///
/// Output is a pure function of the code: re-running reproduces every byte.
void generate_suite(const std::filesystem::path& dir);

// The scripted reasoner behind the recorded responses. Picks the candidate
// whose description shares the most words with the query description, with
// occasional hash-driven slips and abstentions.
std::string simulated_reasoner_reply(std::string_view prompt);

}  // namespace vmmr::cli
