#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vmmr {

enum class ErrorCode {
  // validation / user errors
  kEmptyLabelPart,
  kDuplicateLabel,
  kEmptyDescription,
  kInvalidInput,
  kInvalidConfig,
  kDimensionMismatch,
  kZeroVector,
  kDuplicateRecordId,
  kUnresolvedRecordId,
  kTemplateRenderError,
  kUnknownQueryId,
  kMissingLabelEmbedding,
  kMissingFixture,
  kMissingTruth,
  kEmptyPredictionList,
  kBatchEmpty,
  kEmptyKnowledgeBase,
  // persistence
  kIoError,
  kCorruptIndexFile,
  kSchemaError,
  // backend / transport
  kBackendUnreachable,
  kBackendProtocolError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// True for failures of a remote backend or its transport.
bool is_backend_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vmmr
