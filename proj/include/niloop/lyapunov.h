#pragma once

#include "niloop/interconnect.h"
#include "niloop/trace.h"

namespace niloop {

/// Block Lyapunov matrix of the loop
///   Q = [[P1 - C1^T D2 C1, -C1^T C2], [-C2^T C1, P2 - C2^T D1 C2]].
struct LyapunovCertificate {
  RealMatrix q;
  double min_eig_q = 0.0;
  /// ||A_cl^T Q + Q A_cl + T1^T T1 + T2^T T2||_F / max(1, ||Q||_F ||A_cl||_F),
  /// NaN until computed from both loop certificates.
  double derivative_identity_residual = 0.0;
  bool dissipation_bound_checked = false;

  RealMatrix p1, p2;
  RealMatrix l1, l2;
};

/// Throws kDimension on shape mismatch and kNotPsd unless P1, P2 are
/// symmetric positive definite.
LyapunovCertificate BlockGram(const RealMatrix& p1, const RealMatrix& p2,
                              const StateSpace& plant,
                              const StateSpace& controller,
                              double tol = kDefaultTol);

/// ytilde_i = T_i x for x = [x1; x2] under the loop constraint, with
///   T1 = L1 P1 [I 0] - L1 C1^T (y2 rows of the output map),
///   T2 = L2 P2 [0 I] - L2 C2^T (y1 rows of the output map).
/// flip_sign replaces the minus by a plus (mutation testing only).
struct DissipationMaps {
  RealMatrix t1;
  RealMatrix t2;
};

DissipationMaps MakeDissipationMaps(const ClosedLoop& cl,
                                    const LyapunovCertificate& cert,
                                    bool flip_sign = false);

/// Block Gram from the two certificates plus the matrix form of the
/// derivative identity. Throws kNotCertified unless both are Certified.
LyapunovCertificate LoopLyapunovCertificate(const ClosedLoop& cl,
                                            const NICertificate& plant_cert,
                                            const NICertificate& controller_cert,
                                            double tol = kDefaultTol);

struct GramDcGainReport {
  bool agree = false;
  /// Either predicate lies within the band around its threshold.
  bool borderline = false;
  bool q_positive = false;
  bool dc_holds = false;
  double min_eig_q = 0.0;
  double lambda_max = 0.0;
};

/// Compares (min eig Q > tol) with (lambda_max(G(0) H(0)) < 1 - tol).
/// Cases where |min eig Q| or |1 - lambda_max| is below band are flagged
/// borderline.
GramDcGainReport GramDcGainEquivalence(const StateSpace& plant,
                               const StateSpace& controller,
                               const RealMatrix& p1, const RealMatrix& p2,
                               double tol = kDefaultTol, double band = 1e-6);

/// Outputs from x under the loop constraint. Throws kDimension.
InterconnectState MakeInterconnectState(const ClosedLoop& cl,
                                        const RealVector& x);

struct ValueReport {
  /// x^T Q x.
  double quadratic = 0.0;
  /// V1 + V2 - 2 y1^T y2; equals the quadratic form only when D1 = D2 = 0.
  double literal = 0.0;
  /// V1 + V2 - 2 y1^T y2 + y1^T D2 y1 + y2^T D1 y2, the form that equals
  /// x^T Q x whenever D1 D2 = 0.
  double corrected = 0.0;
  double residual = 0.0;
  bool consistent = false;
};

/// consistent when |quadratic - corrected| <= 1e-10 max(1, ||x||^2 ||Q||_F).
ValueReport LyapunovValue(const InterconnectState& state,
                          const LyapunovCertificate& cert,
                          const StateSpace& plant,
                          const StateSpace& controller);

struct DerivativeReport {
  double vdot_quadratic = 0.0;
  double vdot_dissipation = 0.0;
  RealVector ytilde1;
  RealVector ytilde2;
  double residual = 0.0;
  /// residual <= 1e-7 max(1, ||x||^2 ||Q||_F ||A_cl||_F).
  bool within_tolerance = false;
};

DerivativeReport LyapunovDerivative(const InterconnectState& state,
                                    const ClosedLoop& cl,
                                    const LyapunovCertificate& cert,
                                    bool flip_sign = false);

struct DissipationReport {
  double v0 = 0.0;
  /// Sum of the exact per-step increments.
  double integral = 0.0;
  /// Trapezoidal rule on the sampled ||ytilde2||^2 (second-order accurate).
  double integral_trapezoid = 0.0;
  /// max_k (running integral - V(0)); the bound holds when <= tol_int.
  double worst_excess = 0.0;
  bool bound_holds = false;
  double worst_increase = 0.0;
  bool monotone = false;
  int steps = 0;
};

/// Throws kInvalidArgument when the trace carries no Lyapunov monitoring.
DissipationReport DissipationIntegralCheck(const SimulationTrace& trace,
                                           double tol_int = 1e-6,
                                           double tol_monotone = 1e-8);

}  // namespace niloop
