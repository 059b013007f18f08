#pragma once

#include <string>
#include <vector>

#include "niloop/frequency.h"
#include "niloop/statespace.h"

namespace niloop {

/// Settings for the alternating-projection search of the NI LMI.
struct LmiOptions {
  double tol = kDefaultTol;
  int max_iterations = 5000;
  /// Infeasible once the distance to the cone has not dropped by 1% over
  /// this many iterations.
  int stagnation_window = 200;
  /// Lower bound Y >= epsilon I; <= 0 selects 1e-6 / ||A||_F.
  double epsilon = 0.0;
};

enum class CertVerdict { kCertified, kInfeasible, kMaxIterations };

const char* ToString(CertVerdict verdict);

/// NI certificate in the sign convention
///   A Y + Y A^T = -L^T L <= 0,   B + A Y C^T = 0,   P = Y^{-1} > 0.
struct NICertificate {
  RealMatrix p;
  RealMatrix y;
  RealMatrix l;
  /// min eig of -(A Y + Y A^T); >= -tol when certified.
  double lyap_residual = 0.0;
  /// ||B + A Y C^T||_F.
  double coupling_residual = 0.0;
  /// ||L^T L + A Y + Y A^T||_F.
  double factor_residual = 0.0;
  /// ||C B + (C B)^T - (L C^T)^T (L C^T)||_F.
  double cb_identity_residual = 0.0;
  bool strict = false;
  /// Minimum over the SNI grid of sigma_min([A - jwI, B; LP, -LC^T]); negative
  /// until SniRankCondition has run.
  double rank_condition_min_sv = -1.0;
  int iterations = 0;
  /// Distance of the final affine iterate from the cone.
  double final_gap = 0.0;
  CertVerdict verdict = CertVerdict::kInfeasible;
  /// Set when {Y : A Y C^T = -B} is empty: an n x m matrix W with
  /// sym(A^T W C) = 0 and <W, B> != 0, i.e. a linear functional that
  /// vanishes on every A Y C^T but not on -B.
  RealMatrix witness;
  std::string detail;
};

struct CertificateResiduals {
  double lyap_residual = 0.0;
  double coupling_residual = 0.0;
  double factor_residual = 0.0;
  double cb_identity_residual = 0.0;
};

/// Recomputes every residual of a certificate from (Y, L) and the system with
/// plain matrix arithmetic, independent of how Y was found.
CertificateResiduals ComputeResiduals(const StateSpace& sys,
                                      const RealMatrix& y, const RealMatrix& l);

/// True when the residuals satisfy the certified-verdict invariants.
bool ResidualsAcceptable(const StateSpace& sys, const RealMatrix& y,
                         const CertificateResiduals& residuals,
                         double tol = kDefaultTol);

/// Searches for Y with Dykstra's alternating projections between the affine
/// set {(Y, Z) : A Y C^T = -B, Z = -(A Y + Y A^T)} and the cone
/// {Y >= eps I, Z >= 0}. Throws kSingularA and kAsymmetricD.
NICertificate LmiNiCertificate(const StateSpace& sys,
                               const LmiOptions& opts = {});

struct RankConditionReport {
  double min_sv = 0.0;
  double omega_at_min = 0.0;
  bool strict = false;
};

/// Minimum over the grid of the full-column-rank margin of
/// [[A - jwI, B], [L P, -L C^T]]. Throws kNotCertified.
RankConditionReport SniRankCondition(const StateSpace& sys,
                                     const NICertificate& cert,
                                     const FrequencyGrid& grid = {},
                                     double tol = kDefaultTol);

struct WZeroReport {
  /// (omega, sigma_min(W(jw))) per grid point.
  std::vector<std::pair<double, double>> samples;
  std::vector<double> flagged_omegas;
  double min_sv = 0.0;
  /// sigma value of W(0), recorded but never flagged.
  double origin_value = 0.0;
  bool pass = false;
};

/// W(s) = L P (sI - A)^{-1} B - L C^T must keep full column rank for w > 0.
/// Throws kNotCertified.
WZeroReport WTransferZeroCheck(const StateSpace& sys, const NICertificate& cert,
                               const FrequencyGrid& grid = {},
                               double tol = kDefaultTol);

struct SniCertification {
  NICertificate cert;
  RankConditionReport rank;
  bool hurwitz = false;
  bool certified = false;
};

/// The authoritative SNI route: LMI certificate, Hurwitz A, and the rank
/// condition on the grid. Sets cert.strict.
SniCertification CertifySni(const StateSpace& sys, const LmiOptions& opts = {},
                            const FrequencyGrid& grid = {});

}  // namespace niloop
