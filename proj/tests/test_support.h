// Hand-rolled generators and independent numerical oracles shared by the
// test binaries. Nothing here calls into the library's numerics.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "niloop/statespace.h"

namespace niloop::testing {

/// splitmix64 stream with Marsaglia polar normals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  int Int(int lo, int hi) {
    return lo + static_cast<int>(Next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double Normal() {
    for (;;) {
      const double u = 2.0 * Uniform() - 1.0;
      const double v = 2.0 * Uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
  Eigen::MatrixXd Matrix(Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = Normal();
    return m;
  }
  Eigen::VectorXd Vector(Eigen::Index n) { return Matrix(n, 1).col(0); }
  Eigen::MatrixXcd ComplexMatrix(Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXcd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = {Normal(), Normal()};
    return m;
  }
  /// Symmetric PSD with the given rank.
  Eigen::MatrixXd Psd(Eigen::Index n, Eigen::Index rank) {
    const Eigen::MatrixXd f = Matrix(n, rank);
    return f * f.transpose();
  }
  /// Well-conditioned invertible matrix (I + small random part).
  Eigen::MatrixXd Invertible(Eigen::Index n) {
    return Eigen::MatrixXd::Identity(n, n) + 0.3 * Matrix(n, n) / std::sqrt(double(n));
  }

 private:
  std::uint64_t state_;
};

/// e^{M t} by scaling and squaring around a plain Taylor series evaluated in
/// long double.
inline Eigen::MatrixXd TaylorExp(const Eigen::MatrixXd& m, double t) {
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LMat a = (m * t).cast<long double>();
  int squarings = 0;
  long double norm = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) norm = std::max(norm, a.row(i).cwiseAbs().sum());
  while (norm > 0.25L) {
    a /= 2.0L;
    norm /= 2.0L;
    ++squarings;
  }
  const Eigen::Index n = a.rows();
  LMat sum = LMat::Identity(n, n);
  LMat term = LMat::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<long double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum.cast<double>();
}

/// Rank by Gaussian elimination with complete pivoting; pivots below
/// tol * (largest initial entry) count as zero.
inline int EliminationRank(Eigen::MatrixXcd m, double tol) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const double ref = std::max(1e-300, m.cwiseAbs().maxCoeff());
  int rank = 0;
  for (Eigen::Index k = 0; k < std::min(rows, cols); ++k) {
    Eigen::Index pi = k, pj = k;
    double best = -1.0;
    for (Eigen::Index i = k; i < rows; ++i)
      for (Eigen::Index j = k; j < cols; ++j)
        if (std::abs(m(i, j)) > best) {
          best = std::abs(m(i, j));
          pi = i;
          pj = j;
        }
    if (best <= tol * ref) break;
    m.row(k).swap(m.row(pi));
    m.col(k).swap(m.col(pj));
    for (Eigen::Index i = k + 1; i < rows; ++i) {
      const std::complex<double> f = m(i, k) / m(k, k);
      m.row(i) -= f * m.row(k);
    }
    ++rank;
  }
  return rank;
}

/// Roots of the monic polynomial with coefficients c[0] + c[1] s + ... + s^n
/// by Durand-Kerner iteration.
inline std::vector<std::complex<double>> PolynomialRoots(const std::vector<double>& c) {
  using LC = std::complex<long double>;
  const std::size_t n = c.size();
  std::vector<LC> z(n);
  const LC seed(0.4L, 0.9L);
  LC p = 1;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = p;
    p *= seed;
  }
  const auto eval = [&c, n](LC s) {
    LC v = 1;
    for (std::size_t i = n; i-- > 0;) v = v * s + static_cast<long double>(c[i]);
    return v;
  };
  for (int iter = 0; iter < 2000; ++iter) {
    long double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      LC den = 1;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const LC step = eval(z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-30L) break;
  }
  std::vector<std::complex<double>> out;
  for (const LC& r : z) out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  return out;
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double JacobiMinEig(Eigen::MatrixXd a) {
  a = 0.5 * (a + a.transpose()).eval();
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  return a.diagonal().minCoeff();
}

/// Transfer matrix by a direct dense solve (no library call).
inline Eigen::MatrixXcd DirectTf(const StateSpace& sys, std::complex<double> s) {
  const Eigen::Index n = sys.states();
  const Eigen::MatrixXcd resolvent =
      s * Eigen::MatrixXcd::Identity(n, n) - sys.a().cast<std::complex<double>>();
  return sys.c().cast<std::complex<double>>() *
             resolvent.fullPivLu().solve(sys.b().cast<std::complex<double>>()) +
         sys.d().cast<std::complex<double>>();
}

/// Richardson-extrapolated limit of (s - j w0) s G(s) along s = j w0 + eps.
inline Eigen::MatrixXcd RichardsonResidue(const StateSpace& sys, double w0,
                                          double eps1 = 1e-4, double eps2 = 1e-5) {
  const std::complex<double> jw(0.0, w0);
  const auto f = [&](double eps) {
    const std::complex<double> s = jw + eps;
    return Eigen::MatrixXcd((s - jw) * s * DirectTf(sys, s));
  };
  const double r = eps1 / eps2;
  return (r * f(eps2) - f(eps1)) / (r - 1.0);
}

/// (A^T, C^T, B^T, D^T) realizes G(s)^T.
inline StateSpace Transposed(const StateSpace& sys) {
  return StateSpace(sys.a().transpose(), sys.c().transpose(), sys.b().transpose(),
                    sys.d().transpose(), sys.label());
}

inline StateSpace Siso(double a, double b, double c, double d = 0.0) {
  return StateSpace(Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, b),
                    Eigen::MatrixXd::Constant(1, 1, c), Eigen::MatrixXd::Constant(1, 1, d));
}

/// 1/(s^2 + 1), optionally with output matrix C = c.
inline StateSpace Oscillator(double c0 = 1.0, double c1 = 0.0) {
  Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2);
  a << 0, 1, -1, 0;
  b << 0, 1;
  c << c0, c1;
  return StateSpace(a, b, c, Eigen::MatrixXd::Zero(1, 1));
}

}  // namespace niloop::testing
