#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sepnmf {

enum class ErrorCode {
  kNonFinite,
  kBadShape,
  kBadRank,
  kDimensionMismatch,
  kNotSymmetric,
  kNotPsd,
  kDegenerateInput,
  kRankDeficient,
  kRankCollapse,
  kNoConvergence,
  kSingularZ1,
  kSizeMismatch,
  kZeroVector,
  kRankDeficientBasis,
  kDegenerateBasis,
  kMissingShape,
  kIo,
  kParse,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sepnmf
