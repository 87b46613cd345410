#pragma once

#include <stdexcept>
#include <string>

namespace ctalab {

enum class ErrorCode {
  // data ingestion
  EmptyTable,
  RaggedRows,
  UnknownLabel,
  MissingFile,
  EmptyColumn,
  MalformedRecord,
  // generation / selection
  InvalidSpec,
  FractionOutOfRange,
  // prompts
  BudgetTooSmall,
  // model / adapters
  RankTooLarge,
  ShapeMismatch,
  SequenceTooLong,
  EmptyCorpus,
  // training
  EmptyMask,
  NonFiniteLoss,
  // misc
  InvalidArgument,
  IoError,
  FormatError,
  Internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ctalab
