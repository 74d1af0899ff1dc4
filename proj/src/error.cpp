#include "mhxai/error.hpp"

namespace mhxai {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kUnparsableValue: return "UnparsableValue";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kInvalidAccessTable: return "InvalidAccessTable";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kUnknownDivision: return "UnknownDivision";
    case ErrorCode::kUnknownAtom: return "UnknownAtom";
    case ErrorCode::kInvalidRuleBase: return "InvalidRuleBase";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kNonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::kBadVectorLength: return "BadVectorLength";
    case ErrorCode::kEmptyTestSet: return "EmptyTestSet";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDegenerateKernel: return "DegenerateKernel";
    case ErrorCode::kMissingComponent: return "MissingComponent";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kZeroExpectedCount: return "ZeroExpectedCount";
    case ErrorCode::kTooFewGroups: return "TooFewGroups";
    case ErrorCode::kInconsistentTotals: return "InconsistentTotals";
    case ErrorCode::kDomainError: return "DomainError";
  }
  return "Unknown";
}

}  // namespace mhxai
