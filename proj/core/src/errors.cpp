#include "taaco/errors.hpp"

namespace taaco {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyAction: return "EmptyAction";
    case ErrorCode::EmptyActivity: return "EmptyActivity";
    case ErrorCode::DuplicateComponent: return "DuplicateComponent";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::DanglingExplanation: return "DanglingExplanation";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::MissingConcept: return "MissingConcept";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::StateSpaceMismatch: return "StateSpaceMismatch";
    case ErrorCode::ProviderMismatch: return "ProviderMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::Unparseable: return "Unparseable";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace taaco
