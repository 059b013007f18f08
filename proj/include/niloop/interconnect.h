#pragma once

#include <optional>
#include <string>
#include <vector>

#include "niloop/lmi_certificate.h"

namespace niloop {

/// Positive feedback loop u1 = y2, u2 = y1 between a plant (subscript 1) and
/// a controller (subscript 2).
struct ClosedLoop {
  StateSpace plant;
  StateSpace controller;
  /// Closed-loop state matrix on x = [x1; x2].
  RealMatrix a_cl;
  /// [y1; y2] = output_map * x under the loop constraint.
  RealMatrix output_map;
  std::vector<Complex> eigenvalues;
  /// Eigenvalues of G(0) H(0) and their largest real part; empty / NaN when
  /// either A is singular.
  std::vector<Complex> dc_product_eigs;
  double lambda_max = 0.0;
  bool well_posed = true;
  /// ||D1 D2||_F.
  double dd_product_norm = 0.0;
};

/// Loop matrices without the G(inf)H(inf) = 0 check, for any well-posed pair
/// (I - D1 D2 invertible). Throws kDimension when the port counts differ and
/// kFeedthroughHypothesis when the loop is not well posed.
ClosedLoop AssembleLoop(const StateSpace& plant, const StateSpace& controller,
                        double tol = kDefaultTol);

/// Requires ||D1 D2||_F <= tol, then returns the closed loop
///   [[A1 + B1 D2 C1, B1 C2], [B2 C1, A2 + B2 D1 C2]]
/// (the D2 D1 cross term vanishes for symmetric feedthroughs).
/// Throws kDimension or kFeedthroughHypothesis.
ClosedLoop MakeClosedLoop(const StateSpace& plant, const StateSpace& controller,
                          double tol = kDefaultTol);

struct DcGainResult {
  std::vector<Complex> eigenvalues;
  double lambda_max = 0.0;
  bool holds = false;
};

/// lambda_max(G(0) H(0)) < 1 - tol. Throws kSingularA, and kNonRealSpectrum
/// when some |Im| exceeds tol * max(1, spectral radius).
DcGainResult DcGainCondition(const StateSpace& plant,
                             const StateSpace& controller,
                             double tol = kDefaultTol);

enum class StabilityKind {
  kInternallyStable,
  kUnstable,
  kMarginallyStableOnAxis,
  kHypothesisViolated,
};

const char* ToString(StabilityKind kind);

struct HypothesisCheck {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::kHypothesisViolated;
  std::vector<std::string> violated_hypotheses;
  /// -max Re(eig(A_cl)); NaN without a closed loop.
  double margin = 0.0;
  bool hurwitz = false;
};

struct AnalyzeOptions {
  FrequencyGrid grid;
  LmiOptions lmi;
  double tol = kDefaultTol;
  /// Stable when max Re(eig) < -hurwitz_tol * max(1, ||A_cl||_F).
  double hurwitz_tol = 1e-8;
};

struct Analysis {
  StabilityVerdict verdict;
  std::vector<HypothesisCheck> hypotheses;
  std::optional<ClosedLoop> closed_loop;
  std::optional<DcGainResult> dc_gain;
  std::optional<NICertificate> plant_cert;
  std::optional<SniCertification> controller_cert;
  std::vector<std::string> warnings;
};

/// Checks every hypothesis of the NI/SNI feedback stability result (plant NI,
/// controller SNI, G(inf) H(inf) = 0, H(inf) >= 0, the DC-gain condition) and
/// computes the closed-loop spectrum regardless of their outcome.
Analysis Analyze(const StateSpace& plant, const StateSpace& controller,
                 const AnalyzeOptions& opts = {});

}  // namespace niloop
