#include "vmmr/error.hpp"

namespace vmmr {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kEmptyLabelPart: return "EmptyLabelPart";
    case ErrorCode::kDuplicateLabel: return "DuplicateLabel";
    case ErrorCode::kEmptyDescription: return "EmptyDescription";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDuplicateRecordId: return "DuplicateRecordId";
    case ErrorCode::kUnresolvedRecordId: return "UnresolvedRecordId";
    case ErrorCode::kTemplateRenderError: return "TemplateRenderError";
    case ErrorCode::kUnknownQueryId: return "UnknownQueryId";
    case ErrorCode::kMissingLabelEmbedding: return "MissingLabelEmbedding";
    case ErrorCode::kMissingFixture: return "MissingFixture";
    case ErrorCode::kMissingTruth: return "MissingTruth";
    case ErrorCode::kEmptyPredictionList: return "EmptyPredictionList";
    case ErrorCode::kBatchEmpty: return "BatchEmpty";
    case ErrorCode::kEmptyKnowledgeBase: return "EmptyKnowledgeBase";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kCorruptIndexFile: return "CorruptIndexFile";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kBackendUnreachable: return "BackendUnreachable";
    case ErrorCode::kBackendProtocolError: return "BackendProtocolError";
  }
  return "Unknown";
}

bool is_backend_error(ErrorCode code) noexcept {
  return code == ErrorCode::kBackendUnreachable ||
         code == ErrorCode::kBackendProtocolError;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace vmmr
