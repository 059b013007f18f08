#include "niloop/frequency.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace {

constexpr Complex kJ(0.0, 1.0);

// Smallest eigenvalue of j(G - G^*).
double NiCurve(const ComplexMatrix& g) {
  const ComplexMatrix n = kJ * (g - g.adjoint());
  return matops::HermitianEigenvalues(n).front();
}

bool NearAxisPole(double omega, const std::vector<double>& axis,
                  double radius) {
  for (double w0 : axis) {
    if (std::abs(omega - w0) <= radius) return true;
  }
  return false;
}

std::string Describe(const char* what, double omega, double value) {
  std::ostringstream os;
  os.precision(6);
  os << what << " at omega = " << omega << " (normalized " << value << ")";
  return os.str();
}

// Runs the residue test at every imaginary-axis pole, appending findings and
// failure reasons. Returns true when every pole is simple with an accepted
// residue.
bool CheckAxisPoles(const StateSpace& sys, const PoleClassification& poles,
                    double tol_axis, std::vector<ResidueReport>* findings,
                    std::vector<std::string>* reasons) {
  bool ok = true;
  for (std::size_t i = 0; i < poles.axis_frequencies.size(); ++i) {
    const double w0 = poles.axis_frequencies[i];
    std::ostringstream where;
    where << "imaginary-axis pole j*" << w0;
    if (poles.axis_multiplicity[i] > 1) {
      ok = false;
      reasons->push_back(where.str() + " is not simple (multiplicity " +
                         std::to_string(poles.axis_multiplicity[i]) + ")");
      continue;
    }
    try {
      ResidueReport r = ResidueAtPole(sys, w0, tol_axis);
      if (!r.accepted) {
        ok = false;
        reasons->push_back(where.str() +
                           " has a residue that is not PSD Hermitian");
      }
      findings->push_back(std::move(r));
    } catch (const Error& e) {
      ok = false;
      reasons->push_back(where.str() + ": " + e.what());
    }
  }
  return ok;
}

// Evaluates `curve` at every non-excluded grid point, normalized by the
// matrix scale returned alongside the value.
struct Sweep {
  std::vector<FrequencySample> samples;
  double worst = 0.0;
  double worst_omega = 0.0;
  int evaluated = 0;
};

Sweep RunSweep(const StateSpace& sys, const FrequencyGrid& grid,
               const std::vector<double>& axis,
               const std::function<ComplexMatrix(const ComplexMatrix&, double)>&
                   transform) {
  Sweep sweep;
  bool first = true;
  for (double w : grid.Omegas()) {
    FrequencySample sample;
    sample.omega = w;
    if (NearAxisPole(w, axis, grid.exclusion_radius)) {
      sample.excluded = true;
      sweep.samples.push_back(sample);
      continue;
    }
    ComplexMatrix g;
    try {
      g = EvalTf(sys, Complex(0.0, w));
    } catch (const Error&) {
      sample.ill_conditioned = true;
      sweep.samples.push_back(sample);
      continue;
    }
    const ComplexMatrix f = transform(g, w);
    sample.min_eig = NiCurve(f);
    sample.normalized = sample.min_eig / matops::Scale(f);
    ++sweep.evaluated;
    if (first || sample.normalized < sweep.worst) {
      sweep.worst = sample.normalized;
      sweep.worst_omega = w;
      first = false;
    }
    sweep.samples.push_back(sample);
  }
  return sweep;
}

ComplexMatrix Identity(const ComplexMatrix& g, double) { return g; }

}  // namespace

void FrequencyGrid::Validate() const {
  std::string problem;
  if (!(omega_min > 0.0)) problem = "omega_min must be positive";
  else if (!(omega_min < omega_max)) problem = "omega_min must be below omega_max";
  else if (points < 2) problem = "grid needs at least 2 points";
  else if (!(exclusion_radius >= 0.0)) problem = "exclusion_radius must be >= 0";
  if (!problem.empty()) throw Error(ErrorCode::kInvalidArgument, problem);
}

std::vector<double> FrequencyGrid::Omegas() const {
  Validate();
  std::vector<double> out(static_cast<std::size_t>(points));
  const double last = static_cast<double>(points - 1);
  for (int k = 0; k < points; ++k) {
    const double frac = static_cast<double>(k) / last;
    if (spacing == GridSpacing::kLogarithmic) {
      const double lo = std::log10(omega_min);
      const double hi = std::log10(omega_max);
      out[k] = std::pow(10.0, lo + frac * (hi - lo));
    } else {
      out[k] = omega_min + frac * (omega_max - omega_min);
    }
  }
  out.front() = omega_min;
  out.back() = omega_max;
  return out;
}

const char* ToString(FrequencyVerdict verdict) {
  switch (verdict) {
    case FrequencyVerdict::kNI: return "NI";
    case FrequencyVerdict::kSNI: return "SNI";
    case FrequencyVerdict::kNotNI: return "NotNI";
    case FrequencyVerdict::kInconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

FrequencyReport FreqNiTest(const StateSpace& sys, const FrequencyGrid& grid,
                           double tol, double tol_axis) {
  FrequencyReport report;
  report.grid = grid;
  const MinimalityReport minimal = IsMinimal(sys);
  report.minimal = minimal.minimal;
  if (!minimal.minimal) {
    report.reasons.push_back("warning: realization is not minimal (" +
                             minimal.diagnosis + ")");
  }
  bool violated = false;
  report.d_symmetric = matops::IsSymmetric(sys.d(), tol);
  if (!report.d_symmetric) {
    violated = true;
    report.reasons.push_back("D is not symmetric, so j(G - G*) -> j(D - D^T) "
                             "is indefinite at high frequency");
  }
  const PoleClassification poles = ClassifyPoles(sys, tol_axis);
  report.origin_pole = poles.origin_pole;
  report.rhp_pole = poles.rhp_pole;
  if (poles.origin_pole) {
    violated = true;
    report.reasons.push_back("pole at the origin");
  }
  if (poles.rhp_pole) {
    violated = true;
    report.reasons.push_back("pole in the open right half plane");
  }
  if (!CheckAxisPoles(sys, poles, tol_axis, &report.pole_findings,
                      &report.reasons)) {
    violated = true;
  }

  const Sweep sweep = RunSweep(sys, grid, poles.axis_frequencies, Identity);
  report.per_point = sweep.samples;
  report.worst_value = sweep.worst;
  report.worst_omega = sweep.worst_omega;
  report.evaluated_points = sweep.evaluated;
  if (sweep.evaluated > 0 && sweep.worst < -tol) {
    violated = true;
    report.reasons.push_back(
        Describe("j(G - G*) has a negative eigenvalue", sweep.worst_omega,
                 sweep.worst));
  }

  if (violated) {
    report.verdict = FrequencyVerdict::kNotNI;
  } else if (sweep.evaluated == 0) {
    report.verdict = FrequencyVerdict::kInconclusive;
    report.reasons.push_back("no grid point could be evaluated");
  } else {
    report.verdict = FrequencyVerdict::kNI;
  }
  return report;
}

FrequencyReport FreqSniTest(const StateSpace& sys, const FrequencyGrid& grid,
                            double tol, double tol_axis) {
  FrequencyReport report;
  report.grid = grid;
  const MinimalityReport minimal = IsMinimal(sys);
  report.minimal = minimal.minimal;
  if (!minimal.minimal) {
    report.reasons.push_back("warning: realization is not minimal (" +
                             minimal.diagnosis + ")");
  }
  bool violated = false;
  report.d_symmetric = matops::IsSymmetric(sys.d(), tol);
  if (!report.d_symmetric) {
    violated = true;
    report.reasons.push_back("D is not symmetric");
  }
  const PoleClassification poles = ClassifyPoles(sys, tol_axis);
  report.origin_pole = poles.origin_pole;
  report.rhp_pole = poles.rhp_pole;
  for (const Complex& p : Poles(sys)) {
    if (p.real() >= -tol_axis * std::max(1.0, std::abs(p))) {
      violated = true;
      std::ostringstream os;
      os << "pole " << p.real() << (p.imag() < 0 ? "-" : "+")
         << std::abs(p.imag()) << "j is not in the open left half plane";
      report.reasons.push_back(os.str());
      break;
    }
  }

  const Sweep sweep = RunSweep(sys, grid, poles.axis_frequencies, Identity);
  report.per_point = sweep.samples;
  report.worst_value = sweep.worst;
  report.worst_omega = sweep.worst_omega;
  report.evaluated_points = sweep.evaluated;
  bool marginal = false;
  if (sweep.evaluated > 0 && sweep.worst < -tol) {
    violated = true;
    report.reasons.push_back(
        Describe("j(G - G*) has a negative eigenvalue", sweep.worst_omega,
                 sweep.worst));
  } else if (sweep.evaluated > 0 && sweep.worst <= tol) {
    marginal = true;
    report.reasons.push_back(Describe(
        "j(G - G*) is only semidefinite within tolerance", sweep.worst_omega,
        sweep.worst));
  }

  if (violated) {
    report.verdict = FrequencyVerdict::kNotNI;
  } else if (marginal || sweep.evaluated == 0) {
    report.verdict = FrequencyVerdict::kInconclusive;
  } else {
    report.verdict = FrequencyVerdict::kSNI;
  }
  return report;
}

PositiveRealReport PositiveRealCheck(const StateSpace& sys,
                                     const FrequencyGrid& grid, double tol,
                                     double tol_axis) {
  if (matops::MinSingularValue(sys.a()) <=
      tol * std::max(1.0, sys.a().norm())) {
    throw Error(ErrorCode::kSingularA,
                "positive-real reduction requires no pole at the origin");
  }
  PositiveRealReport report;
  report.d_symmetric = matops::IsSymmetric(sys.d(), tol);
  if (!report.d_symmetric) report.reasons.push_back("D is not symmetric");

  const PoleClassification poles = ClassifyPoles(sys, tol_axis);
  if (poles.rhp_pole || poles.origin_pole) {
    report.poles_ok = false;
    report.reasons.push_back("F(s) has a pole with Re(s) > 0");
  }
  report.residues_ok = CheckAxisPoles(sys, poles, tol_axis, &report.residues,
                                      &report.reasons);

  const ComplexMatrix d = sys.d().cast<Complex>();
  const Sweep sweep = RunSweep(
      sys, grid, poles.axis_frequencies,
      [&d](const ComplexMatrix& g, double w) -> ComplexMatrix {
        // NiCurve evaluates j(X - X^*); with X = -j F this equals F + F^*.
        return Complex(0.0, -1.0) * (Complex(0.0, w) * (g - d));
      });
  report.worst_value = sweep.worst;
  report.worst_omega = sweep.worst_omega;
  report.evaluated_points = sweep.evaluated;
  const bool curve_ok = sweep.evaluated > 0 && sweep.worst >= -tol;
  if (sweep.evaluated > 0 && !curve_ok) {
    report.reasons.push_back(Describe("F(jw) + F(jw)* has a negative eigenvalue",
                                      sweep.worst_omega, sweep.worst));
  }
  report.pass =
      curve_ok && report.poles_ok && report.residues_ok && report.d_symmetric;
  return report;
}

}  // namespace niloop
