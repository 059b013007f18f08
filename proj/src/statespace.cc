#include "niloop/statespace.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace {

std::string FormatComplex(Complex z) {
  std::ostringstream os;
  os.precision(10);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "j";
  return os.str();
}

bool IsAxisPole(Complex z, double tol_axis) {
  return std::abs(z.real()) <= tol_axis * std::max(1.0, std::abs(z));
}

}  // namespace

StateSpace::StateSpace(RealMatrix a, RealMatrix b, RealMatrix c, RealMatrix d,
                       std::string label)
    : a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      d_(std::move(d)),
      label_(std::move(label)) {
  const Eigen::Index n = a_.rows();
  const Eigen::Index m = b_.cols();
  std::ostringstream os;
  if (n < 1 || a_.cols() != n) {
    os << "A must be square with n >= 1, got " << a_.rows() << "x" << a_.cols();
  } else if (m < 1 || b_.rows() != n) {
    os << "B must be " << n << "xm with m >= 1, got " << b_.rows() << "x"
       << b_.cols();
  } else if (c_.rows() != m || c_.cols() != n) {
    os << "C must be " << m << "x" << n << ", got " << c_.rows() << "x"
       << c_.cols();
  } else if (d_.rows() != m || d_.cols() != m) {
    os << "D must be " << m << "x" << m << ", got " << d_.rows() << "x"
       << d_.cols();
  }
  if (!os.str().empty()) {
    throw Error(ErrorCode::kDimension,
                (label_.empty() ? std::string() : label_ + ": ") + os.str());
  }
  matops::RequireFinite(a_, "A");
  matops::RequireFinite(b_, "B");
  matops::RequireFinite(c_, "C");
  matops::RequireFinite(d_, "D");
}

StateSpace StateSpace::WithLabel(std::string label) const {
  return StateSpace(a_, b_, c_, d_, std::move(label));
}

ComplexMatrix EvalTf(const StateSpace& sys, Complex s, double tol_pole) {
  const ComplexMatrix d = sys.d().cast<Complex>();
  if (sys.b().isZero(0.0) || sys.c().isZero(0.0)) return d;
  const Eigen::Index n = sys.states();
  const ComplexMatrix resolvent_arg =
      s * ComplexMatrix::Identity(n, n) - sys.a().cast<Complex>();
  if (matops::MinSingularValue(resolvent_arg) < tol_pole) {
    Complex nearest = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& p : Poles(sys)) {
      if (std::abs(p - s) < best) {
        best = std::abs(p - s);
        nearest = p;
      }
    }
    throw Error(ErrorCode::kNearPole, "s = " + FormatComplex(s) +
                                          " is within resolvent tolerance of "
                                          "the eigenvalue " +
                                          FormatComplex(nearest));
  }
  const ComplexMatrix x =
      resolvent_arg.partialPivLu().solve(sys.b().cast<Complex>());
  return sys.c().cast<Complex>() * x + d;
}

std::vector<Complex> Poles(const StateSpace& sys) {
  return matops::Eigenvalues(sys.a());
}

PoleClassification ClassifyPoles(const StateSpace& sys, double tol_axis) {
  PoleClassification out;
  const std::vector<Complex> poles = Poles(sys);
  out.spectral_abscissa = matops::SpectralAbscissa(poles);
  const double a_scale = std::max(1.0, sys.a().norm());
  std::vector<double> axis;
  for (const Complex& p : poles) {
    if (std::abs(p) <= tol_axis * a_scale) {
      out.origin_pole = true;
    } else if (IsAxisPole(p, tol_axis)) {
      if (p.imag() > 0) axis.push_back(p.imag());
    } else if (p.real() > 0) {
      out.rhp_pole = true;
    }
  }
  std::sort(axis.begin(), axis.end());
  for (double w : axis) {
    if (!out.axis_frequencies.empty() &&
        w - out.axis_frequencies.back() <=
            tol_axis * std::max(1.0, out.axis_frequencies.back())) {
      ++out.axis_multiplicity.back();
    } else {
      out.axis_frequencies.push_back(w);
      out.axis_multiplicity.push_back(1);
    }
  }
  return out;
}

MinimalityReport IsMinimal(const StateSpace& sys, double tol) {
  MinimalityReport report;
  const Eigen::Index n = sys.states();
  const Eigen::Index m = sys.ports();
  const double threshold = tol * std::max(1.0, sys.a().norm());
  report.controllability_margin = std::numeric_limits<double>::infinity();
  report.observability_margin = std::numeric_limits<double>::infinity();
  const ComplexMatrix a = sys.a().cast<Complex>();
  for (const Complex& lambda : Poles(sys)) {
    const ComplexMatrix shifted = a - lambda * ComplexMatrix::Identity(n, n);
    ComplexMatrix ctrb(n, n + m);
    ctrb << shifted, sys.b().cast<Complex>();
    ComplexMatrix obsv(n + m, n);
    obsv << shifted, sys.c().cast<Complex>();
    const double sc = matops::MinSingularValue(ctrb);
    const double so = matops::MinSingularValue(obsv);
    report.controllability_margin = std::min(report.controllability_margin, sc);
    report.observability_margin = std::min(report.observability_margin, so);
    if (report.minimal && (sc <= threshold || so <= threshold)) {
      report.minimal = false;
      std::ostringstream os;
      os << "eigenvalue " << FormatComplex(lambda) << " is "
         << (sc <= threshold ? "uncontrollable" : "")
         << (sc <= threshold && so <= threshold ? " and " : "")
         << (so <= threshold ? "unobservable" : "");
      report.diagnosis = os.str();
    }
  }
  return report;
}

RealMatrix DcGain(const StateSpace& sys, double tol) {
  if (matops::MinSingularValue(sys.a()) <= tol * std::max(1.0, sys.a().norm())) {
    throw Error(ErrorCode::kSingularA,
                "A is numerically singular; G(s) has a pole at the origin");
  }
  return sys.d() - sys.c() * sys.a().partialPivLu().solve(sys.b());
}

ResidueReport ResidueAtPole(const StateSpace& sys, double omega0, double tol) {
  if (!(omega0 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "omega0 must be positive");
  }
  const Complex pole(0.0, omega0);
  const double radius = tol * std::max(1.0, omega0);
  int matches = 0;
  for (const Complex& p : Poles(sys)) {
    if (std::abs(p - pole) <= radius) ++matches;
  }
  std::ostringstream where;
  where << "j*" << omega0;
  if (matches == 0) {
    throw Error(ErrorCode::kNotAPole, where.str() + " is not an eigenvalue of A");
  }
  if (matches > 1) {
    throw Error(ErrorCode::kNotSimple,
                where.str() + " has algebraic multiplicity " +
                    std::to_string(matches));
  }
  const Eigen::Index n = sys.states();
  const ComplexMatrix shifted =
      sys.a().cast<Complex>() - pole * ComplexMatrix::Identity(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(shifted,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexVector v = svd.matrixV().col(n - 1);
  const ComplexVector w = svd.matrixU().col(n - 1);
  const Complex wv = w.dot(v);  // w^* v
  if (std::abs(wv) < tol) {
    throw Error(ErrorCode::kDegenerateEigenvectors,
                where.str() + ": left and right eigenvectors are orthogonal "
                              "(defective eigenvalue)");
  }
  ResidueReport report;
  report.omega0 = omega0;
  report.is_simple = true;
  report.k0 = pole * (sys.c().cast<Complex>() * v) *
              (w.adjoint() * sys.b().cast<Complex>()) / wv;
  report.hermitian_residual = (report.k0 - report.k0.adjoint()).norm();
  const ComplexMatrix herm = 0.5 * (report.k0 + report.k0.adjoint());
  report.min_eig = matops::HermitianEigenvalues(herm).front();
  const double scale = matops::Scale(report.k0);
  report.accepted = report.hermitian_residual <= tol * scale &&
                    report.min_eig >= -tol * scale;
  return report;
}

}  // namespace niloop
