#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mhxai {

enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kParseError,
  // data
  kMissingColumn,
  kUnparsableValue,
  kEmptyFile,
  kInvalidAccessTable,
  kClassTooSmall,
  kUnknownDivision,
  // fuzzy
  kUnknownAtom,
  kInvalidRuleBase,
  // ensemble
  kDegenerateLabels,
  kNonFiniteFeature,
  kBadVectorLength,
  kEmptyTestSet,
  kVersionMismatch,
  kCorruptFile,
  // explainers
  kEmptyDataset,
  kDegenerateKernel,
  kMissingComponent,
  // stats
  kLengthMismatch,
  kConstantInput,
  kZeroExpectedCount,
  kTooFewGroups,
  kInconsistentTotals,
  kDomainError,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable code; callers that need to branch (CLI exit codes,
/// HTTP status mapping) switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mhxai
