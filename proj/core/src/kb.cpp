#include "vmmr/kb.hpp"

#include "json.hpp"
#include "vmmr/error.hpp"

namespace vmmr {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormat = "vmmr-kb";
constexpr int kVersion = 1;

}  // namespace

std::string KnowledgeBase::ingest(const VehicleLabel& label, Description description,
                                  Timestamp created_at) {
  std::size_t seq = label_counts_[label.canonical_id()] + 1;
  std::string id = label.canonical_id() + "#" + std::to_string(seq);
  while (ids_.count(id) != 0) id = label.canonical_id() + "#" + std::to_string(++seq);
  append({id, label, std::move(description), created_at});
  return id;
}

void KnowledgeBase::append(DescriptionRecord record) {
  if (ids_.count(record.record_id) != 0) {
    throw Error(ErrorCode::kDuplicateRecordId, record.record_id);
  }
  ids_.emplace(record.record_id, records_.size());
  ++label_counts_[record.label.canonical_id()];
  labels_.insert_if_absent(record.label);
  records_.push_back(std::move(record));
}

const DescriptionRecord* KnowledgeBase::find(std::string_view record_id) const {
  auto it = ids_.find(std::string(record_id));
  return it == ids_.end() ? nullptr : &records_[it->second];
}

std::string serialize_kb(const KnowledgeBase& kb) {
  std::string out = ordered_json{{"format", kFormat}, {"version", kVersion}}.dump();
  out += '\n';
  for (const auto& r : kb.records()) {
    ordered_json line = {
        {"record_id", r.record_id},
        {"make", r.label.make()},
        {"model", r.label.model()},
        {"description", r.description.text()},
        {"created_at", format_rfc3339(r.created_at)},
        {"source", to_string(r.description.source())},
    };
    out += line.dump();
    out += '\n';
  }
  return out;
}

KnowledgeBase parse_kb(std::string_view content) {
  auto lines = split(content, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kSchemaError, "missing kb header");

  ordered_json header;
  try {
    header = ordered_json::parse(lines.front());
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("bad kb header: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kFormat) {
    throw Error(ErrorCode::kSchemaError, "not a vmmr knowledge base file");
  }
  if (!header.contains("version") || !header["version"].is_number_integer() ||
      header["version"].get<int>() != kVersion) {
    throw Error(ErrorCode::kSchemaError, "unsupported kb version");
  }

  KnowledgeBase kb;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t record_no = i;  // 1-based record number
    const std::string where = "record " + std::to_string(record_no);
    ordered_json obj;
    try {
      obj = ordered_json::parse(lines[i]);
    } catch (const ordered_json::exception& e) {
      throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorCode::kSchemaError, where + ": not an object");
    auto field = [&](const char* name) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end()) {
        throw Error(ErrorCode::kSchemaError, where + ": missing field '" + name + "'");
      }
      if (!it->is_string()) {
        throw Error(ErrorCode::kSchemaError, where + ": field '" + name + "' must be a string");
      }
      return it->get<std::string>();
    };
    const std::string record_id = field("record_id");
    const std::string make = field("make");
    const std::string model = field("model");
    std::string description = field("description");
    const std::string created = field("created_at");
    auto ts = parse_rfc3339(created);
    if (!ts) throw Error(ErrorCode::kSchemaError, where + ": bad created_at '" + created + "'");

    DescriptionSource source = DescriptionSource::kGenerated;
    if (auto it = obj.find("source"); it != obj.end()) {
      if (*it == "fixture") {
        source = DescriptionSource::kFixture;
      } else if (*it != "generated") {
        throw Error(ErrorCode::kSchemaError, where + ": unknown source");
      }
    }
    try {
      kb.append({record_id, canonicalize_label(make, model),
                 Description(std::move(description), source), *ts});
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
    }
  }
  return kb;
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_kb(kb));
}

KnowledgeBase load_kb(const std::filesystem::path& path) { return parse_kb(read_text_file(path)); }

std::string embedding_text(const DescriptionRecord& record, const IndexBuildOptions& options) {
  if (!options.embed_with_label) return record.description.text();
  return ordered_json{{"make", record.label.make()},
                      {"model", record.label.model()},
                      {"description", record.description.text()}}
      .dump();
}

VectorIndex build_index(const KnowledgeBase& kb, Embedder& embedder,
                        const IndexBuildOptions& options) {
  std::vector<std::string> texts;
  texts.reserve(kb.size());
  for (const auto& r : kb.records()) texts.push_back(embedding_text(r, options));
  auto vectors = embedder.embed_batch(texts);

  VectorIndex index(embedder.dim());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    index.add(kb.records()[i].record_id, std::move(vectors[i]));
  }
  return index;
}

VectorIndex build_index(const KnowledgeBase& kb, const EmbeddingBackendConfig& backend,
                        const IndexBuildOptions& options) {
  auto embedder = make_embedder(backend);
  return build_index(kb, *embedder, options);
}

}  // namespace vmmr
