#pragma once

#include <stdexcept>
#include <string>

namespace taaco {

enum class ErrorCode {
  // domain validation
  EmptyAction,
  EmptyActivity,
  DuplicateComponent,
  UnknownLabel,
  UnknownVariable,
  DanglingExplanation,
  // scoring
  ParseFailure,
  TransportError,
  ReplayMiss,
  MissingConcept,
  // embeddings
  MissingEmbedding,
  DimensionMismatch,
  ParseError,
  // numeric core
  ShapeMismatch,
  IndexOutOfRange,
  NonFiniteLoss,
  InvalidArgument,
  // model / checkpoints
  VocabularyMismatch,
  StateSpaceMismatch,
  ProviderMismatch,
  BadMagic,
  VersionUnsupported,
  ManifestMismatch,
  TruncatedFile,
  // data and evaluation
  SchemaError,
  EmptyRecords,
  TooFewSamples,
  Unparseable,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception type carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace taaco
