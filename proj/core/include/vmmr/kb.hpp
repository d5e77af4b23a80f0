#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vmmr/domain.hpp"
#include "vmmr/embed.hpp"
#include "vmmr/index.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

struct DescriptionRecord {
  std::string record_id;
  VehicleLabel label;
  Description description;
  Timestamp created_at;

  friend bool operator==(const DescriptionRecord&, const DescriptionRecord&) = default;
};

/// The textual knowledge base: labeled description records in insertion
/// order. Several records may share a label. Records are never modified
/// once added.
class KnowledgeBase {
 public:
  // Appends a record with id `<canonical_id>#<n>`, n being the next free
  // per-label sequence number. Returns the new id.
  std::string ingest(const VehicleLabel& label, Description description,
                     Timestamp created_at = now_utc());

  // Appends a fully-formed record. Throws kDuplicateRecordId.
  void append(DescriptionRecord record);

  const std::vector<DescriptionRecord>& records() const noexcept { return records_; }
  const LabelSet& label_set() const noexcept { return labels_; }
  const DescriptionRecord* find(std::string_view record_id) const;
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

 private:
  std::vector<DescriptionRecord> records_;
  LabelSet labels_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::unordered_map<std::string, std::size_t> label_counts_;
};

// Record-per-line file (.kb.jsonl). First line is the header object
// {"format":"vmmr-kb","version":1}.
std::string serialize_kb(const KnowledgeBase& kb);
// Throws Error(kSchemaError) naming the offending record.
KnowledgeBase parse_kb(std::string_view content);
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_kb(const std::filesystem::path& path);

struct IndexBuildOptions {
  // Embed {"make","model","description"} JSON instead of the bare
  // description. Leaks label tokens into retrieval; ablation only.
  bool embed_with_label = false;
};

std::string embedding_text(const DescriptionRecord& record, const IndexBuildOptions& options);

// One entry per record, in record order. All-or-nothing: any backend error
// propagates and no index is returned.
VectorIndex build_index(const KnowledgeBase& kb, Embedder& embedder,
                        const IndexBuildOptions& options = {});
VectorIndex build_index(const KnowledgeBase& kb, const EmbeddingBackendConfig& backend,
                        const IndexBuildOptions& options = {});

}  // namespace vmmr
