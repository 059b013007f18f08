#include "niloop/matops.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace matops {
namespace {

std::string Shape(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

// Pade coefficients b_0..b_m for the [m/m] approximant of exp.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0,
                                          420.0,   30.0,    1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0,
                                          277200.0,   25200.0,   1512.0,
                                          56.0,       1.0};
constexpr std::array<double, 10> kPade9 = {
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

// 1-norm bounds below which each degree meets unit roundoff (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
void PadeLowDegree(const RealMatrix& a, const std::array<double, N>& b,
                   RealMatrix* u, RealMatrix* v) {
  const Eigen::Index n = a.rows();
  const RealMatrix ident = RealMatrix::Identity(n, n);
  const RealMatrix a2 = a * a;
  RealMatrix power = ident;
  RealMatrix odd = RealMatrix::Zero(n, n);
  RealMatrix even = RealMatrix::Zero(n, n);
  for (std::size_t k = 0; k + 1 < N; k += 2) {
    even += b[k] * power;
    odd += b[k + 1] * power;
    power = power * a2;
  }
  *u = a * odd;
  *v = even;
}

void Pade13(const RealMatrix& a, RealMatrix* u, RealMatrix* v) {
  const auto& b = kPade13;
  const Eigen::Index n = a.rows();
  const RealMatrix ident = RealMatrix::Identity(n, n);
  const RealMatrix a2 = a * a;
  const RealMatrix a4 = a2 * a2;
  const RealMatrix a6 = a4 * a2;
  const RealMatrix inner_u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                             b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
  *u = a * inner_u;
  *v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
       b[2] * a2 + b[0] * ident;
}

double OneNorm(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

double Scale(const RealMatrix& m) { return std::max(1.0, m.norm()); }
double Scale(const ComplexMatrix& m) { return std::max(1.0, m.norm()); }

void RequireFinite(const RealMatrix& m, const char* name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFinite,
                std::string(name) + " has non-finite entries");
  }
}

void RequireSquare(const RealMatrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimension, std::string(name) + " must be square, got " +
                                           Shape(m.rows(), m.cols()));
  }
}

double SymmetryResidual(const RealMatrix& m) {
  RequireSquare(m, "matrix");
  return (m - m.transpose()).norm();
}

bool IsSymmetric(const RealMatrix& m, double tol) {
  return m.rows() == m.cols() && SymmetryResidual(m) <= tol * Scale(m);
}

std::vector<double> HermitianEigenvalues(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimension,
                "hermitian eigenvalues need a square matrix, got " +
                    Shape(m.rows(), m.cols()));
  }
  const double skew = (m - m.adjoint()).norm();
  if (skew > tol * Scale(m)) {
    std::ostringstream os;
    os << "||M - M*||_F = " << skew << " exceeds " << tol << " * scale";
    throw Error(ErrorCode::kNotHermitian, os.str());
  }
  std::vector<double> out;
  if (m.rows() == 0) return out;
  const ComplexMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm,
                                                      Eigen::EigenvaluesOnly);
  const RealVector& ev = solver.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  return out;
}

double MinEigSym(const RealMatrix& m) {
  RequireSquare(m, "matrix");
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  const RealMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

bool IsPsd(const RealMatrix& m, double tol) {
  return MinEigSym(m) >= -tol * Scale(m);
}

RealMatrix PsdFactor(const RealMatrix& m, double tol) {
  RequireSquare(m, "matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return RealMatrix(0, 0);
  const RealMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
  const RealVector& ev = solver.eigenvalues();
  const RealMatrix& vecs = solver.eigenvectors();
  if (ev(0) < -tol * Scale(m)) {
    std::ostringstream os;
    os << "min eigenvalue " << ev(0) << " below -" << tol << " * scale";
    throw Error(ErrorCode::kNotPsd, os.str());
  }
  const double top = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
  const double cutoff =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (ev(i) > cutoff) kept.push_back(i);
  }
  RealMatrix l(static_cast<Eigen::Index>(kept.size()), n);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Eigen::Index i = kept[r];
    l.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(ev(i)) * vecs.col(i).transpose();
  }
  return l;
}

RealMatrix MatrixExponential(const RealMatrix& m, double t) {
  RequireSquare(m, "matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return RealMatrix(0, 0);
  RealMatrix a = m * t;
  const double norm = OneNorm(a);
  RealMatrix u, v;
  int squarings = 0;
  if (norm <= kTheta3) {
    PadeLowDegree(a, kPade3, &u, &v);
  } else if (norm <= kTheta5) {
    PadeLowDegree(a, kPade5, &u, &v);
  } else if (norm <= kTheta7) {
    PadeLowDegree(a, kPade7, &u, &v);
  } else if (norm <= kTheta9) {
    PadeLowDegree(a, kPade9, &u, &v);
  } else {
    if (norm > kTheta13) {
      squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
      a /= std::ldexp(1.0, squarings);
    }
    Pade13(a, &u, &v);
  }
  RealMatrix result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

double MinSingularValue(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const RealVector& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

double MinSingularValue(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const RealVector& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

double ColumnRankMargin(const ComplexMatrix& m) {
  if (m.rows() < m.cols()) return 0.0;
  return MinSingularValue(m);
}

int NumericalRank(const ComplexMatrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const RealVector& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv(0));
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

std::vector<Complex> Eigenvalues(const RealMatrix& m) {
  RequireSquare(m, "matrix");
  std::vector<Complex> out;
  if (m.rows() == 0) return out;
  Eigen::EigenSolver<RealMatrix> solver(m, false);
  const ComplexVector& ev = solver.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

double SpectralAbscissa(const std::vector<Complex>& eigenvalues) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Complex& z : eigenvalues) best = std::max(best, z.real());
  return best;
}

}  // namespace matops
}  // namespace niloop
