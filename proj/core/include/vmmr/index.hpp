#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vmmr/domain.hpp"

namespace vmmr {

struct RetrievalHit {
  std::string record_id;
  double score = 0.0;  // cosine similarity
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

/// Exact (flat) cosine top-k index over unit-norm vectors.
///
/// Ordering contract: hits are sorted by score descending, ties resolved by
/// insertion order. search() is const and safe for concurrent readers.
class VectorIndex {
 public:
  struct Entry {
    std::string record_id;
    EmbeddingVector vector;
  };

  // Throws Error(kInvalidInput) for dim == 0.
  explicit VectorIndex(std::size_t dim);

  // Throws kDimensionMismatch, kDuplicateRecordId, or kInvalidInput for a
  // vector that is not unit-norm or an id containing tab/newline.
  void add(std::string record_id, EmbeddingVector vector);

  // Returns min(k, size()) hits. Empty index yields an empty list.
  // Throws kDimensionMismatch, kZeroVector, or kInvalidInput for k == 0.
  std::vector<RetrievalHit> search(const EmbeddingVector& query, std::size_t k) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool contains(std::string_view record_id) const;

 private:
  std::size_t dim_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> ids_;
};

// Text form: `RAGIDX 1 <dim> <count>` then `record_id<TAB>v1,...,vdim` per
// entry, values as shortest round-trip decimals.
std::string serialize_index(const VectorIndex& index);
// Throws Error(kCorruptIndexFile).
VectorIndex parse_index(std::string_view content);

void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

}  // namespace vmmr
