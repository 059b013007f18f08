#pragma once

#include <string>
#include <vector>

#include "niloop/matops.h"

namespace niloop {

/// |Re(lambda)| <= tol_axis * max(1, |lambda|) counts as an imaginary-axis
/// eigenvalue.
inline constexpr double kDefaultTolAxis = 1e-7;
/// eval_tf refuses points where sigma_min(sI - A) drops below this.
inline constexpr double kDefaultTolPole = 1e-12;

/// A square (m inputs, m outputs) continuous-time LTI block
///   x' = A x + B u,   y = C x + D u.
/// Immutable after construction; the constructor validates dimensions and
/// finiteness.
class StateSpace {
 public:
  StateSpace(RealMatrix a, RealMatrix b, RealMatrix c, RealMatrix d,
             std::string label = "");

  const RealMatrix& a() const { return a_; }
  const RealMatrix& b() const { return b_; }
  const RealMatrix& c() const { return c_; }
  const RealMatrix& d() const { return d_; }
  const std::string& label() const { return label_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index ports() const { return b_.cols(); }

  /// Same A, B, C, D under a new label.
  StateSpace WithLabel(std::string label) const;

 private:
  RealMatrix a_, b_, c_, d_;
  std::string label_;
};

/// G(s) = C (sI - A)^{-1} B + D. Throws kNearPole (naming the closest
/// eigenvalue of A) when sigma_min(sI - A) < tol_pole.
ComplexMatrix EvalTf(const StateSpace& sys, Complex s,
                     double tol_pole = kDefaultTolPole);

/// Eigenvalues of A, sorted by (real, imag).
std::vector<Complex> Poles(const StateSpace& sys);

struct PoleClassification {
  bool origin_pole = false;
  bool rhp_pole = false;
  /// Distinct imaginary-axis pole frequencies omega0 > 0, ascending, with the
  /// multiplicity of each cluster.
  std::vector<double> axis_frequencies;
  std::vector<int> axis_multiplicity;
  /// max Re over all poles.
  double spectral_abscissa = 0.0;
};

PoleClassification ClassifyPoles(const StateSpace& sys,
                                 double tol_axis = kDefaultTolAxis);

struct MinimalityReport {
  bool minimal = true;
  /// Empty when minimal; otherwise names the eigenvalue and direction.
  std::string diagnosis;
  double controllability_margin = 0.0;
  double observability_margin = 0.0;
};

/// PBH test at every eigenvalue of A.
MinimalityReport IsMinimal(const StateSpace& sys, double tol = kDefaultTol);

/// G(0) = D - C A^{-1} B. Throws kSingularA.
RealMatrix DcGain(const StateSpace& sys, double tol = kDefaultTol);

struct ResidueReport {
  double omega0 = 0.0;
  ComplexMatrix k0;
  bool is_simple = false;
  double hermitian_residual = 0.0;
  /// Smallest eigenvalue of (K0 + K0^*)/2.
  double min_eig = 0.0;
  /// K0 Hermitian and PSD, both within tol * max(1, ||K0||).
  bool accepted = false;
};

/// Residue K0 = lim_{s -> j w0} (s - j w0) s G(s) at a simple imaginary-axis
/// pole, computed from right/left null vectors of (A - j w0 I):
///   K0 = j w0 C v w^* B / (w^* v).
/// Throws kNotAPole, kNotSimple, kDegenerateEigenvectors.
ResidueReport ResidueAtPole(const StateSpace& sys, double omega0,
                            double tol = kDefaultTolAxis);

}  // namespace niloop
