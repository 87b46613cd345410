#include "ctalab/error.hpp"

namespace ctalab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SequenceTooLong: return "SequenceTooLong";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace ctalab
