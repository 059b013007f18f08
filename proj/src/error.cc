#include "niloop/error.h"

namespace niloop {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "Dimension";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNearPole: return "NearPole";
    case ErrorCode::kSingularA: return "SingularA";
    case ErrorCode::kNotAPole: return "NotAPole";
    case ErrorCode::kNotSimple: return "NotSimple";
    case ErrorCode::kDegenerateEigenvectors: return "DegenerateEigenvectors";
    case ErrorCode::kAsymmetricD: return "AsymmetricD";
    case ErrorCode::kNotCertified: return "NotCertified";
    case ErrorCode::kFeedthroughHypothesis: return "FeedthroughHypothesis";
    case ErrorCode::kNonRealSpectrum: return "NonRealSpectrum";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace niloop
