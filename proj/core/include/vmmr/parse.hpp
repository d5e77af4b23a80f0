#pragma once

#include <span>
#include <string_view>

#include "vmmr/domain.hpp"
#include "vmmr/prediction.hpp"

namespace vmmr {

/// Maps free-form reasoner output onto the closed label set.
///
/// The text after the last `ANSWER:` line is searched first, then the whole
/// output. Within each scope the first rule that fires wins:
///   1. canonical: a label's make and model appear together (case and
///      whitespace-insensitive, at token boundaries); earliest mention wins;
///   2. unique-candidate: exactly one candidate's model name is a substring;
///   3. unique-global: exactly one label-set model name is a substring;
///   4. abstain.
/// The result is always a member of full_label_set (or of the candidates
/// when the label set is empty).
Prediction parse_prediction(std::string_view raw, std::span<const VehicleLabel> candidates,
                            const LabelSet& full_label_set);

}  // namespace vmmr
