#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace vmmr {

// Lowercases ASCII, trims, and collapses internal whitespace runs into a
// single '-'. Non-ASCII bytes pass through unchanged.
std::string canonical_part(std::string_view text);

/// A closed-set class identity: one make plus one model.
///
/// Equality is defined on canonical_id only, so "Rolls Royce"/"Spectre" and
/// "rolls  royce"/"SPECTRE" are the same label.
class VehicleLabel {
 public:
  const std::string& make() const noexcept { return make_; }
  const std::string& model() const noexcept { return model_; }
  const std::string& canonical_id() const noexcept { return canonical_id_; }

  // "<make> <model>" as written at construction (trimmed).
  std::string display() const;

  friend bool operator==(const VehicleLabel& a, const VehicleLabel& b) noexcept {
    return a.canonical_id_ == b.canonical_id_;
  }

 private:
  friend VehicleLabel canonicalize_label(std::string_view, std::string_view);
  VehicleLabel(std::string make, std::string model, std::string canonical_id)
      : make_(std::move(make)),
        model_(std::move(model)),
        canonical_id_(std::move(canonical_id)) {}

  std::string make_;
  std::string model_;
  std::string canonical_id_;
};

// Throws Error(kEmptyLabelPart) if either part is blank.
VehicleLabel canonicalize_label(std::string_view make, std::string_view model);

/// Ordered, duplicate-free collection of labels. Iteration order is
/// insertion order.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<VehicleLabel> labels);

  // Throws Error(kDuplicateLabel) if the canonical_id is already present.
  void add(VehicleLabel label);
  // Returns false (and leaves the set unchanged) on a duplicate.
  bool insert_if_absent(const VehicleLabel& label);

  bool contains(std::string_view canonical_id) const;
  const VehicleLabel* find(std::string_view canonical_id) const;
  std::optional<std::size_t> position(std::string_view canonical_id) const;

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<VehicleLabel>& labels() const noexcept { return labels_; }
  auto begin() const noexcept { return labels_.begin(); }
  auto end() const noexcept { return labels_.end(); }
  const VehicleLabel& operator[](std::size_t i) const { return labels_[i]; }

 private:
  std::vector<VehicleLabel> labels_;
  std::unordered_map<std::string, std::size_t> positions_;
};

// Parses the label set file format: one `make<TAB>model` per line, '#'
// comments and blank lines ignored. Requires at least one label.
LabelSet parse_label_set(std::string_view content);
LabelSet load_label_set(const std::filesystem::path& path);

enum class DescriptionSource { kGenerated, kFixture };

std::string_view to_string(DescriptionSource source) noexcept;

/// Natural-language description of a vehicle's exterior. Text is never blank.
class Description {
 public:
  // Throws Error(kEmptyDescription) if the text is blank after trimming.
  explicit Description(std::string text,
                       DescriptionSource source = DescriptionSource::kFixture);

  const std::string& text() const noexcept { return text_; }
  DescriptionSource source() const noexcept { return source_; }

  friend bool operator==(const Description&, const Description&) = default;

 private:
  std::string text_;
  DescriptionSource source_;
};

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  // Stores values as given; use normalized() for the unit-norm form.
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

  // Throws Error(kZeroVector) for an all-zero (or empty) input.
  static EmbeddingVector normalized(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const noexcept;
  bool is_normalized(double tolerance = 1e-6) const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

struct ImagePayload {
  std::filesystem::path path;  // read lazily by remote describers
  std::string base64;          // inline content, used when path is empty
  std::string mime_type;       // optional; guessed from the path otherwise
};

struct QueryInput {
  std::string id;
  std::variant<std::monostate, ImagePayload, Description> payload;
  std::optional<VehicleLabel> true_label;

  bool has_image() const noexcept { return std::holds_alternative<ImagePayload>(payload); }
  bool has_description() const noexcept {
    return std::holds_alternative<Description>(payload);
  }
};

// Throws Error(kInvalidInput) when the id is blank or no payload is set.
void validate_query(const QueryInput& input);

}  // namespace vmmr
