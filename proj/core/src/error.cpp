#include "sepnmf/error.hpp"

namespace sepnmf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBadShape: return "BadShape";
    case ErrorCode::kBadRank: return "BadRank";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kRankCollapse: return "RankCollapse";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularZ1: return "SingularZ1";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kRankDeficientBasis: return "RankDeficientBasis";
    case ErrorCode::kDegenerateBasis: return "DegenerateBasis";
    case ErrorCode::kMissingShape: return "MissingShape";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace sepnmf
