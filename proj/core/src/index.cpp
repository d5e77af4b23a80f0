#include "vmmr/index.hpp"

#include <algorithm>
#include <numeric>

#include "vmmr/embed.hpp"
#include "vmmr/error.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

namespace {

constexpr std::string_view kMagic = "RAGIDX";
constexpr std::uint64_t kVersion = 1;

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptIndexFile, what);
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidInput, "index dim must be positive");
}

void VectorIndex::add(std::string record_id, EmbeddingVector vector) {
  if (vector.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "record '" + record_id + "' has dim " + std::to_string(vector.dim()) +
                    ", index dim is " + std::to_string(dim_));
  }
  if (record_id.empty() || record_id.find_first_of("\t\r\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidInput, "record id must be non-empty without tabs/newlines");
  }
  if (!vector.is_normalized()) {
    throw Error(ErrorCode::kInvalidInput, "record '" + record_id + "' vector is not unit-norm");
  }
  if (ids_.count(record_id) != 0) {
    throw Error(ErrorCode::kDuplicateRecordId, record_id);
  }
  ids_.emplace(record_id, entries_.size());
  entries_.push_back({std::move(record_id), std::move(vector)});
}

bool VectorIndex::contains(std::string_view record_id) const {
  return ids_.count(std::string(record_id)) != 0;
}

std::vector<RetrievalHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidInput, "k must be at least 1");
  if (query.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                                   ", index dim " + std::to_string(dim_));
  }
  if (entries_.empty()) return {};

  std::vector<double> scores(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    scores[i] = cosine_similarity(query, entries_[i].vector);
  }
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = std::min(k, order.size());
  // (score desc, position asc) is a strict total order, so the prefix is unique.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });

  std::vector<RetrievalHit> hits;
  hits.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    hits.push_back({entries_[order[r]].record_id, scores[order[r]], r + 1});
  }
  return hits;
}

std::string serialize_index(const VectorIndex& index) {
  std::string out;
  out += kMagic;
  out += ' ' + std::to_string(kVersion) + ' ' + std::to_string(index.dim()) + ' ' +
         std::to_string(index.size()) + '\n';
  for (const auto& entry : index.entries()) {
    out += entry.record_id;
    out += '\t';
    const auto values = entry.vector.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out += ',';
      out += format_double(values[i]);
    }
    out += '\n';
  }
  return out;
}

VectorIndex parse_index(std::string_view content) {
  const auto header_end = content.find('\n');
  if (header_end == std::string_view::npos) corrupt("missing header line");
  const auto header = split(content.substr(0, header_end), ' ');
  if (header.size() != 4 || header[0] != kMagic) corrupt("bad magic");
  const auto version = parse_uint(header[1]);
  if (!version || *version != kVersion) corrupt("unsupported version");
  const auto dim = parse_uint(header[2]);
  if (!dim || *dim == 0) corrupt("bad dim");
  const auto count = parse_uint(header[3]);
  if (!count) corrupt("bad entry count");

  VectorIndex index(static_cast<std::size_t>(*dim));
  std::string_view body = content.substr(header_end + 1);
  std::size_t seen = 0;
  while (!body.empty()) {
    const auto eol = body.find('\n');
    if (eol == std::string_view::npos) corrupt("truncated entry " + std::to_string(seen + 1));
    const std::string_view line = body.substr(0, eol);
    body.remove_prefix(eol + 1);

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      corrupt("entry " + std::to_string(seen + 1) + ": missing record id");
    }
    const auto fields = split(line.substr(tab + 1), ',');
    if (fields.size() != *dim) {
      corrupt("entry " + std::to_string(seen + 1) + ": expected " + std::to_string(*dim) +
              " values, found " + std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(fields.size());
    for (auto f : fields) {
      auto v = parse_double(f);
      if (!v) corrupt("entry " + std::to_string(seen + 1) + ": bad number '" + std::string(f) + "'");
      values.push_back(*v);
    }
    try {
      index.add(std::string(line.substr(0, tab)), EmbeddingVector(std::move(values)));
    } catch (const Error& e) {
      corrupt("entry " + std::to_string(seen + 1) + ": " + e.what());
    }
    ++seen;
  }
  if (seen != *count) {
    corrupt("header declares " + std::to_string(*count) + " entries, found " +
            std::to_string(seen));
  }
  return index;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_index(index));
}

VectorIndex load_index(const std::filesystem::path& path) {
  return parse_index(read_text_file(path));
}

}  // namespace vmmr
