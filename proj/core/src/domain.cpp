#include <cmath>

#include "vmmr/domain.hpp"
#include "vmmr/error.hpp"
#include "vmmr/util.hpp"

namespace vmmr {

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Trims and collapses internal whitespace runs to a single space.
std::string tidy(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(text)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::string canonical_part(std::string_view text) {
  std::string out = to_lower_ascii(tidy(text));
  for (auto& c : out) {
    if (c == ' ') c = '-';
  }
  return out;
}

std::string VehicleLabel::display() const { return make_ + " " + model_; }

VehicleLabel canonicalize_label(std::string_view make, std::string_view model) {
  if (trim(make).empty()) throw Error(ErrorCode::kEmptyLabelPart, "make is blank");
  if (trim(model).empty()) throw Error(ErrorCode::kEmptyLabelPart, "model is blank");
  std::string id = canonical_part(make) + "/" + canonical_part(model);
  return VehicleLabel(tidy(make), tidy(model), std::move(id));
}

LabelSet::LabelSet(std::vector<VehicleLabel> labels) {
  for (auto& label : labels) add(std::move(label));
}

void LabelSet::add(VehicleLabel label) {
  if (contains(label.canonical_id())) {
    throw Error(ErrorCode::kDuplicateLabel, "label already present: " + label.canonical_id());
  }
  positions_.emplace(label.canonical_id(), labels_.size());
  labels_.push_back(std::move(label));
}

bool LabelSet::insert_if_absent(const VehicleLabel& label) {
  if (contains(label.canonical_id())) return false;
  positions_.emplace(label.canonical_id(), labels_.size());
  labels_.push_back(label);
  return true;
}

bool LabelSet::contains(std::string_view canonical_id) const {
  return positions_.find(std::string(canonical_id)) != positions_.end();
}

const VehicleLabel* LabelSet::find(std::string_view canonical_id) const {
  auto it = positions_.find(std::string(canonical_id));
  return it == positions_.end() ? nullptr : &labels_[it->second];
}

std::optional<std::size_t> LabelSet::position(std::string_view canonical_id) const {
  auto it = positions_.find(std::string(canonical_id));
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

LabelSet parse_label_set(std::string_view content) {
  LabelSet set;
  std::size_t line_no = 0;
  for (auto line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw Error(ErrorCode::kSchemaError,
                  "label file line " + std::to_string(line_no) + ": expected make<TAB>model");
    }
    try {
      set.add(canonicalize_label(fields[0], fields[1]));
    } catch (const Error& e) {
      throw Error(e.code(), "label file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (set.empty()) throw Error(ErrorCode::kSchemaError, "label file contains no labels");
  return set;
}

LabelSet load_label_set(const std::filesystem::path& path) {
  return parse_label_set(read_text_file(path));
}

std::string_view to_string(DescriptionSource source) noexcept {
  return source == DescriptionSource::kGenerated ? "generated" : "fixture";
}

Description::Description(std::string text, DescriptionSource source)
    : text_(std::move(text)), source_(source) {
  if (trim(text_).empty()) throw Error(ErrorCode::kEmptyDescription, "description is blank");
}

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  if (!(sum > 0.0)) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(sum);
  for (double& v : values) v *= inv;
  return EmbeddingVector(std::move(values));
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

bool EmbeddingVector::is_normalized(double tolerance) const noexcept {
  return std::abs(norm() - 1.0) <= tolerance;
}

void validate_query(const QueryInput& input) {
  if (trim(input.id).empty()) throw Error(ErrorCode::kInvalidInput, "query id is blank");
  if (std::holds_alternative<std::monostate>(input.payload)) {
    throw Error(ErrorCode::kInvalidInput, "query '" + input.id + "' has no payload");
  }
}

}  // namespace vmmr
