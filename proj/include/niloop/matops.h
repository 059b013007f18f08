#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace niloop {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Relative tolerance used by every verdict unless the caller overrides it.
inline constexpr double kDefaultTol = 1e-8;

namespace matops {

/// max(1, ||M||_F); the scale factor behind every relative tolerance.
double Scale(const RealMatrix& m);
double Scale(const ComplexMatrix& m);

void RequireFinite(const RealMatrix& m, const char* name);
void RequireSquare(const RealMatrix& m, const char* name);

/// ||M - M^T||_F.
double SymmetryResidual(const RealMatrix& m);
bool IsSymmetric(const RealMatrix& m, double tol = kDefaultTol);

/// Eigenvalues of the Hermitian part (M + M^*)/2, ascending. Throws
/// kNotHermitian when ||M - M^*||_F > tol * max(1, ||M||_F).
std::vector<double> HermitianEigenvalues(const ComplexMatrix& m,
                                         double tol = kDefaultTol);

/// Smallest eigenvalue of (M + M^T)/2.
double MinEigSym(const RealMatrix& m);

/// PSD test on the symmetric part with relative tolerance.
bool IsPsd(const RealMatrix& m, double tol = kDefaultTol);

/// Returns L with L^T L = M. Eigenvalues of M in [-tol*scale, 0) are clamped
/// to zero; the row count of L equals the numerical rank of M (eigenvalues
/// above n * eps * ||M||_2 are kept). Throws kNotPsd below -tol*scale.
RealMatrix PsdFactor(const RealMatrix& m, double tol = kDefaultTol);

/// e^{M t}, scaling and squaring with a degree 3..13 Pade approximant.
RealMatrix MatrixExponential(const RealMatrix& m, double t = 1.0);

/// The min(rows, cols)-th singular value; zero for empty matrices.
double MinSingularValue(const ComplexMatrix& m);
double MinSingularValue(const RealMatrix& m);

/// Smallest singular value read as a full-column-rank margin: zero whenever
/// the matrix has fewer rows than columns.
double ColumnRankMargin(const ComplexMatrix& m);

/// Number of singular values above tol * max(1, sigma_max).
int NumericalRank(const ComplexMatrix& m, double tol = kDefaultTol);

/// Eigenvalues of a real square matrix sorted by (real, imag).
std::vector<Complex> Eigenvalues(const RealMatrix& m);

/// max Re(lambda); -infinity for an empty list.
double SpectralAbscissa(const std::vector<Complex>& eigenvalues);

}  // namespace matops
}  // namespace niloop
