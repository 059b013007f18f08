#include "niloop/certify.h"

#include "niloop/error.h"

namespace niloop {

const char* ToString(RouteAnswer answer) {
  switch (answer) {
    case RouteAnswer::kYes: return "yes";
    case RouteAnswer::kNo: return "no";
    case RouteAnswer::kUnknown: return "unknown";
  }
  return "unknown";
}

RouteComparison CompareRoutes(const StateSpace& sys, const FrequencyGrid& grid,
                              const LmiOptions& lmi, double tol,
                              double tol_axis) {
  RouteComparison out;
  out.frequency = FreqNiTest(sys, grid, tol, tol_axis);
  switch (out.frequency.verdict) {
    case FrequencyVerdict::kNI:
    case FrequencyVerdict::kSNI:
      out.frequency_answer = RouteAnswer::kYes;
      break;
    case FrequencyVerdict::kNotNI:
      out.frequency_answer = RouteAnswer::kNo;
      break;
    case FrequencyVerdict::kInconclusive:
      out.frequency_answer = RouteAnswer::kUnknown;
      break;
  }

  try {
    out.positive_real = PositiveRealCheck(sys, grid, tol, tol_axis);
    out.positive_real_answer =
        out.positive_real->pass ? RouteAnswer::kYes : RouteAnswer::kNo;
  } catch (const Error& e) {
    out.positive_real_error = e.what();
    out.positive_real_answer =
        e.code() == ErrorCode::kSingularA ? RouteAnswer::kNo : RouteAnswer::kUnknown;
  }

  try {
    out.lmi = LmiNiCertificate(sys, lmi);
    switch (out.lmi->verdict) {
      case CertVerdict::kCertified: out.lmi_answer = RouteAnswer::kYes; break;
      case CertVerdict::kInfeasible: out.lmi_answer = RouteAnswer::kNo; break;
      case CertVerdict::kMaxIterations: out.lmi_answer = RouteAnswer::kUnknown; break;
    }
  } catch (const Error& e) {
    out.lmi_error = e.what();
    out.lmi_answer = e.code() == ErrorCode::kSingularA ||
                             e.code() == ErrorCode::kAsymmetricD
                         ? RouteAnswer::kNo
                         : RouteAnswer::kUnknown;
  }

  bool yes = false;
  bool no = false;
  for (RouteAnswer a : {out.frequency_answer, out.positive_real_answer, out.lmi_answer}) {
    yes |= a == RouteAnswer::kYes;
    no |= a == RouteAnswer::kNo;
    out.any_unknown |= a == RouteAnswer::kUnknown;
  }
  out.agree = !(yes && no);
  return out;
}

}  // namespace niloop
