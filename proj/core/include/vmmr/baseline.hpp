#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/prediction.hpp"

namespace vmmr {

/// Precomputed image and label-text embeddings for the similarity baseline.
/// Insertion order is preserved for both kinds; label order defines the
/// argmax tie-break.
class PairedEmbeddingSet {
 public:
  struct LabelEntry {
    std::string canonical_id;
    std::string prompt_text;
    EmbeddingVector vector;
  };
  struct ImageEntry {
    std::string query_id;
    EmbeddingVector vector;
  };

  explicit PairedEmbeddingSet(std::size_t dim);

  // Vectors are normalized on insertion (a warning is logged when the input
  // deviates from unit norm by more than 1e-6). Throws kDimensionMismatch,
  // kSchemaError on duplicate keys, kZeroVector.
  void add_image(std::string query_id, EmbeddingVector vector);
  void add_label(std::string canonical_id, std::string prompt_text, EmbeddingVector vector);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<ImageEntry>& images() const noexcept { return images_; }
  const std::vector<LabelEntry>& labels() const noexcept { return labels_; }
  const ImageEntry* find_image(std::string_view query_id) const;
  const LabelEntry* find_label(std::string_view canonical_id) const;

 private:
  std::size_t dim_;
  std::vector<ImageEntry> images_;
  std::vector<LabelEntry> labels_;
  std::unordered_map<std::string, std::size_t> image_pos_;
  std::unordered_map<std::string, std::size_t> label_pos_;
};

// "a photo of a {make} {model}"
std::string default_label_prompt(const VehicleLabel& label);

// Header `RAGPAIR 1 <dim>`, then `I<TAB>query_id<TAB>v1,...` and
// `L<TAB>canonical_id<TAB>prompt_text<TAB>v1,...` lines.
std::string serialize_paired_embeddings(const PairedEmbeddingSet& set);
// Throws kSchemaError or kDimensionMismatch (naming the offending key).
PairedEmbeddingSet parse_paired_embeddings(std::string_view content);
void save_paired_embeddings(const PairedEmbeddingSet& set, const std::filesystem::path& path);
PairedEmbeddingSet load_paired_embeddings(const std::filesystem::path& path);

// Label set implied by the file's label lines ("make/model" split on the
// first '/'), in file order.
LabelSet labels_from_paired(const PairedEmbeddingSet& set);

/// Zero-shot argmax over label-text similarity. Throws
/// kMissingLabelEmbedding at construction if any label lacks a vector.
class BaselineClassifier {
 public:
  BaselineClassifier(const PairedEmbeddingSet& set, LabelSet labels);

  // Throws kUnknownQueryId.
  Prediction classify(std::string_view query_id) const;

  const LabelSet& labels() const noexcept { return labels_; }

 private:
  const PairedEmbeddingSet& set_;
  LabelSet labels_;
  std::vector<const EmbeddingVector*> label_vectors_;  // parallel to labels_
};

Prediction baseline_classify(const PairedEmbeddingSet& set, const LabelSet& labels,
                             std::string_view query_id);

}  // namespace vmmr
