#pragma once

#include <string>
#include <vector>

#include "niloop/statespace.h"

namespace niloop {

enum class GridSpacing { kLogarithmic, kLinear };

/// Sampling of omega in (0, inf). Defaults: 400 log-spaced points over
/// [1e-3, 1e3] rad/s with a 1e-2 exclusion radius around axis poles.
struct FrequencyGrid {
  double omega_min = 1e-3;
  double omega_max = 1e3;
  int points = 400;
  GridSpacing spacing = GridSpacing::kLogarithmic;
  double exclusion_radius = 1e-2;

  /// Throws kInvalidArgument on an invalid grid.
  void Validate() const;
  std::vector<double> Omegas() const;
};

enum class FrequencyVerdict { kNI, kSNI, kNotNI, kInconclusive };

const char* ToString(FrequencyVerdict verdict);

struct FrequencySample {
  double omega = 0.0;
  /// Smallest eigenvalue of j(G(jw) - G(jw)^*); zero when skipped.
  double min_eig = 0.0;
  /// min_eig / max(1, ||G(jw)||_F); the quantity compared against tol.
  double normalized = 0.0;
  bool excluded = false;
  bool ill_conditioned = false;
};

struct FrequencyReport {
  FrequencyGrid grid;
  std::vector<FrequencySample> per_point;
  std::vector<ResidueReport> pole_findings;
  bool origin_pole = false;
  bool rhp_pole = false;
  bool d_symmetric = true;
  bool minimal = true;
  /// Most negative normalized sample and where it occurred.
  double worst_value = 0.0;
  double worst_omega = 0.0;
  int evaluated_points = 0;
  FrequencyVerdict verdict = FrequencyVerdict::kInconclusive;
  /// Human-readable reasons behind a non-NI verdict plus warnings.
  std::vector<std::string> reasons;
};

/// Checks the NI conditions directly: no pole at the origin or in the open
/// right half plane, j(G - G^*) >= -tol on every non-excluded grid point, and
/// every imaginary-axis pole simple with a PSD Hermitian residue.
FrequencyReport FreqNiTest(const StateSpace& sys,
                           const FrequencyGrid& grid = {},
                           double tol = kDefaultTol,
                           double tol_axis = kDefaultTolAxis);

/// Strict variant. A grid can't prove strictness over all of (0, inf), so
/// margins inside the +/- tol band give kInconclusive rather than kSNI.
FrequencyReport FreqSniTest(const StateSpace& sys,
                            const FrequencyGrid& grid = {},
                            double tol = kDefaultTol,
                            double tol_axis = kDefaultTolAxis);

struct PositiveRealReport {
  bool pass = false;
  bool poles_ok = true;
  bool residues_ok = true;
  bool d_symmetric = true;
  /// Most negative eigenvalue of F(jw) + F(jw)^*, normalized by
  /// max(1, ||F(jw)||_F).
  double worst_value = 0.0;
  double worst_omega = 0.0;
  int evaluated_points = 0;
  std::vector<ResidueReport> residues;
  std::vector<std::string> reasons;
};

/// Positive-realness of F(s) = s (G(s) - D) on the grid. Throws kSingularA
/// when A has an eigenvalue at the origin.
PositiveRealReport PositiveRealCheck(const StateSpace& sys,
                                     const FrequencyGrid& grid = {},
                                     double tol = kDefaultTol,
                                     double tol_axis = kDefaultTolAxis);

}  // namespace niloop
