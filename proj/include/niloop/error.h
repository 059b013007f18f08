#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace niloop {

enum class ErrorCode {
  kDimension,
  kNotHermitian,
  kNotPsd,
  kNonFinite,
  kNearPole,
  kSingularA,
  kNotAPole,
  kNotSimple,
  kDegenerateEigenvectors,
  kAsymmetricD,
  kNotCertified,
  kFeedthroughHypothesis,
  kNonRealSpectrum,
  kGenerationFailed,
  kInvalidArgument,
  kParse,
  kNotFound,
};

std::string_view ErrorCodeName(ErrorCode code);

/// All recoverable failures in the library are reported through this type,
/// tagged with a code so callers (the CLI in particular) can map them onto
/// exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace niloop
