#pragma once

#include <optional>
#include <string>

#include "niloop/lmi_certificate.h"

namespace niloop {

/// Outcome of one certification route on the question "is G NI?".
enum class RouteAnswer { kYes, kNo, kUnknown };

const char* ToString(RouteAnswer answer);

struct RouteComparison {
  FrequencyReport frequency;
  std::optional<PositiveRealReport> positive_real;
  std::string positive_real_error;
  std::optional<NICertificate> lmi;
  std::string lmi_error;
  RouteAnswer frequency_answer = RouteAnswer::kUnknown;
  RouteAnswer positive_real_answer = RouteAnswer::kUnknown;
  RouteAnswer lmi_answer = RouteAnswer::kUnknown;
  /// No route says yes while another says no.
  bool agree = true;
  bool any_unknown = false;
};

/// Runs the frequency sweep, the positive-real reduction and the LMI search.
/// A pole at the origin or an asymmetric D counts as a definite no for the
/// routes that refuse such systems.
RouteComparison CompareRoutes(const StateSpace& sys,
                              const FrequencyGrid& grid = {},
                              const LmiOptions& lmi = {},
                              double tol = kDefaultTol,
                              double tol_axis = kDefaultTolAxis);

}  // namespace niloop
