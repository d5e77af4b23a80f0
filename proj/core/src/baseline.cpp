#include "vmmr/baseline.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "vmmr/embed.hpp"
#include "vmmr/error.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

namespace {

constexpr std::string_view kMagic = "RAGPAIR";

EmbeddingVector unit(EmbeddingVector v, std::string_view key) {
  if (v.is_normalized()) return v;
  spdlog::warn("paired embedding '{}' has norm {}; normalizing", key, v.norm());
  return EmbeddingVector::normalized(std::vector<double>(v.values().begin(), v.values().end()));
}

std::string join_values(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

PairedEmbeddingSet::PairedEmbeddingSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kSchemaError, "paired embedding dim must be positive");
}

void PairedEmbeddingSet::add_image(std::string query_id, EmbeddingVector vector) {
  if (vector.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "image '" + query_id + "' has dim " +
                                                   std::to_string(vector.dim()) + ", expected " +
                                                   std::to_string(dim_));
  }
  if (image_pos_.count(query_id)) throw Error(ErrorCode::kSchemaError, "duplicate image " + query_id);
  auto v = unit(std::move(vector), query_id);
  image_pos_.emplace(query_id, images_.size());
  images_.push_back({std::move(query_id), std::move(v)});
}

void PairedEmbeddingSet::add_label(std::string canonical_id, std::string prompt_text,
                                   EmbeddingVector vector) {
  if (vector.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "label '" + canonical_id + "' has dim " +
                                                   std::to_string(vector.dim()) + ", expected " +
                                                   std::to_string(dim_));
  }
  if (label_pos_.count(canonical_id)) {
    throw Error(ErrorCode::kSchemaError, "duplicate label " + canonical_id);
  }
  if (prompt_text.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kSchemaError, "prompt text of label '" + canonical_id +
                                             "' contains a tab or line break");
  }
  auto v = unit(std::move(vector), canonical_id);
  label_pos_.emplace(canonical_id, labels_.size());
  labels_.push_back({std::move(canonical_id), std::move(prompt_text), std::move(v)});
}

const PairedEmbeddingSet::ImageEntry* PairedEmbeddingSet::find_image(
    std::string_view query_id) const {
  auto it = image_pos_.find(std::string(query_id));
  return it == image_pos_.end() ? nullptr : &images_[it->second];
}

const PairedEmbeddingSet::LabelEntry* PairedEmbeddingSet::find_label(
    std::string_view canonical_id) const {
  auto it = label_pos_.find(std::string(canonical_id));
  return it == label_pos_.end() ? nullptr : &labels_[it->second];
}

std::string default_label_prompt(const VehicleLabel& label) {
  return "a photo of a " + label.make() + " " + label.model();
}

std::string serialize_paired_embeddings(const PairedEmbeddingSet& set) {
  std::string out = std::string(kMagic) + " 1 " + std::to_string(set.dim()) + "\n";
  for (const auto& l : set.labels()) {
    out += "L\t" + l.canonical_id + "\t" + l.prompt_text + "\t" + join_values(l.vector.values()) +
           "\n";
  }
  for (const auto& i : set.images()) {
    out += "I\t" + i.query_id + "\t" + join_values(i.vector.values()) + "\n";
  }
  return out;
}

PairedEmbeddingSet parse_paired_embeddings(std::string_view content) {
  auto lines = split(content, '\n');
  if (lines.empty()) throw Error(ErrorCode::kSchemaError, "empty paired embedding file");
  const auto header = split(lines.front(), ' ');
  if (header.size() != 3 || header[0] != kMagic || header[1] != "1") {
    throw Error(ErrorCode::kSchemaError, "bad paired embedding header");
  }
  const auto dim = parse_uint(header[2]);
  if (!dim || *dim == 0) throw Error(ErrorCode::kSchemaError, "bad paired embedding dim");

  PairedEmbeddingSet set(static_cast<std::size_t>(*dim));
  for (std::size_t n = 1; n < lines.size(); ++n) {
    auto line = lines[n];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(n + 1);
    const auto fields = split(line, '\t');
    auto parse_vec = [&](std::string_view text, const std::string& key) {
      std::vector<double> values;
      for (auto f : split(text, ',')) {
        auto v = parse_double(trim(f));
        if (!v) throw Error(ErrorCode::kSchemaError, where + ": bad number in '" + key + "'");
        values.push_back(*v);
      }
      if (values.size() != *dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "'" + key + "' has dim " + std::to_string(values.size()) + ", expected " +
                        std::to_string(*dim));
      }
      return EmbeddingVector(std::move(values));
    };
    if (fields[0] == "I" && fields.size() == 3) {
      const std::string key(fields[1]);
      set.add_image(key, parse_vec(fields[2], key));
    } else if (fields[0] == "L" && fields.size() == 4) {
      const std::string key(fields[1]);
      set.add_label(key, std::string(fields[2]), parse_vec(fields[3], key));
    } else {
      throw Error(ErrorCode::kSchemaError, where + ": expected an I or L record");
    }
  }
  return set;
}

void save_paired_embeddings(const PairedEmbeddingSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_paired_embeddings(set));
}

PairedEmbeddingSet load_paired_embeddings(const std::filesystem::path& path) {
  return parse_paired_embeddings(read_text_file(path));
}

LabelSet labels_from_paired(const PairedEmbeddingSet& set) {
  LabelSet labels;
  for (const auto& l : set.labels()) {
    const auto slash = l.canonical_id.find('/');
    if (slash == std::string::npos) {
      throw Error(ErrorCode::kSchemaError, "label key is not make/model: " + l.canonical_id);
    }
    labels.add(canonicalize_label(l.canonical_id.substr(0, slash), l.canonical_id.substr(slash + 1)));
  }
  return labels;
}

BaselineClassifier::BaselineClassifier(const PairedEmbeddingSet& set, LabelSet labels)
    : set_(set), labels_(std::move(labels)) {
  for (const auto& label : labels_) {
    const auto* entry = set_.find_label(label.canonical_id());
    if (!entry) throw Error(ErrorCode::kMissingLabelEmbedding, label.canonical_id());
    label_vectors_.push_back(&entry->vector);
  }
}

Prediction BaselineClassifier::classify(std::string_view query_id) const {
  const auto* image = set_.find_image(query_id);
  if (!image) throw Error(ErrorCode::kUnknownQueryId, std::string(query_id));

  Prediction p;
  p.query_id = std::string(query_id);
  p.match_rule = MatchRule::kArgmax;
  std::size_t best = 0;
  double best_score = -2.0;
  for (std::size_t i = 0; i < label_vectors_.size(); ++i) {
    const double s = cosine_similarity(image->vector, *label_vectors_[i]);
    if (s > best_score) {  // strict: earlier label keeps ties
      best_score = s;
      best = i;
    }
  }
  if (label_vectors_.empty()) {
    p.match_rule = MatchRule::kAbstain;
  } else {
    p.label = labels_[best];
  }
  return p;
}

Prediction baseline_classify(const PairedEmbeddingSet& set, const LabelSet& labels,
                             std::string_view query_id) {
  return BaselineClassifier(set, labels).classify(query_id);
}

}  // namespace vmmr
