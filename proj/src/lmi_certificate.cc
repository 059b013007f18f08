#include "niloop/lmi_certificate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Isometric half-vectorization of symmetric matrices: diagonal entries as-is,
// off-diagonal pairs scaled by sqrt(2), so that |svec(S)| = ||S||_F.
class SymmetricBasis {
 public:
  explicit SymmetricBasis(Eigen::Index n) : n_(n) {
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p; q < n; ++q) pairs_.emplace_back(p, q);
    }
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(pairs_.size()); }

  RealMatrix Element(Eigen::Index k) const {
    RealMatrix e = RealMatrix::Zero(n_, n_);
    const auto [p, q] = pairs_[static_cast<std::size_t>(k)];
    if (p == q) {
      e(p, p) = 1.0;
    } else {
      e(p, q) = kInvSqrt2;
      e(q, p) = kInvSqrt2;
    }
    return e;
  }

  RealVector Svec(const RealMatrix& s) const {
    RealVector v(size());
    for (Eigen::Index k = 0; k < size(); ++k) {
      const auto [p, q] = pairs_[static_cast<std::size_t>(k)];
      v(k) = p == q ? s(p, p) : (s(p, q) + s(q, p)) * kInvSqrt2;
    }
    return v;
  }

  RealMatrix Smat(const RealVector& v) const {
    RealMatrix s(n_, n_);
    for (Eigen::Index k = 0; k < size(); ++k) {
      const auto [p, q] = pairs_[static_cast<std::size_t>(k)];
      if (p == q) {
        s(p, p) = v(k);
      } else {
        s(p, q) = v(k) * kInvSqrt2;
        s(q, p) = s(p, q);
      }
    }
    return s;
  }

 private:
  Eigen::Index n_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_;
};

RealMatrix Sym(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

// Projection onto {S : S >= floor I}.
RealMatrix ClampBelow(const RealMatrix& s, double floor) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(Sym(s));
  const RealVector ev = solver.eigenvalues().cwiseMax(floor);
  const RealMatrix& q = solver.eigenvectors();
  return q * ev.asDiagonal() * q.transpose();
}

RealMatrix LyapunovOperator(const RealMatrix& a, const RealMatrix& y) {
  return a * y + y * a.transpose();
}

double LyapScale(const RealMatrix& lyap) { return std::max(1.0, lyap.norm()); }

void FillFromY(const StateSpace& sys, const RealMatrix& y, double tol,
               bool certified, NICertificate* cert) {
  cert->y = Sym(y);
  const RealMatrix z = -LyapunovOperator(sys.a(), cert->y);
  if (certified) {
    cert->p = Sym(cert->y.llt().solve(
        RealMatrix::Identity(sys.states(), sys.states())));
    cert->l = matops::PsdFactor(Sym(z), tol);
  } else {
    cert->p = RealMatrix();
    cert->l = RealMatrix(0, sys.states());
  }
  const CertificateResiduals r = ComputeResiduals(sys, cert->y, cert->l);
  cert->lyap_residual = r.lyap_residual;
  cert->coupling_residual = r.coupling_residual;
  cert->factor_residual = r.factor_residual;
  cert->cb_identity_residual = r.cb_identity_residual;
}


struct BarrierResult {
  bool found = false;
  bool infeasible = false;
  RealMatrix y;
  double margin = 0.0;
  double margin_bound = 0.0;
  int newton_steps = 0;
};

// Maximizes lambda subject to Y(t) - (eps + lambda) I >= 0 and
// Z(t) - lambda I >= 0, with Y(t) = y0 + sum t_i dir_y[i] and likewise Z,
// by a damped-Newton log-barrier path. Stops as soon as lambda clears
// -tol/2 * scale (feasible) or the duality bound proves lambda* < -tol * scale.
BarrierResult BarrierPolish(const RealMatrix& y0, const RealMatrix& z0,
                            const std::vector<RealMatrix>& dir_y,
                            const std::vector<RealMatrix>& dir_z,
                            double epsilon, RealVector t, double tol) {
  const Eigen::Index n = y0.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(dir_y.size());
  const RealMatrix ident = RealMatrix::Identity(n, n);
  auto assemble = [&](const RealVector& tv, RealMatrix* y, RealMatrix* z) {
    *y = y0;
    *z = z0;
    for (Eigen::Index i = 0; i < k; ++i) {
      *y += tv(i) * dir_y[static_cast<std::size_t>(i)];
      *z += tv(i) * dir_z[static_cast<std::size_t>(i)];
    }
  };
  RealMatrix y, z;
  assemble(t, &y, &z);
  const double scale = LyapScale(z);
  double lambda = std::min(matops::MinEigSym(y) - epsilon, matops::MinEigSym(z));
  lambda -= std::max(1.0, std::abs(lambda));

  BarrierResult result;
  const double feasible_level = -0.5 * tol * scale;
  const double cones = static_cast<double>(2 * n);

  // Barrier objective; +inf outside the cone.
  auto objective = [&](const RealVector& tv, double lam, double tau) {
    RealMatrix yy, zz;
    assemble(tv, &yy, &zz);
    Eigen::LLT<RealMatrix> ly(Sym(yy) - (epsilon + lam) * ident);
    Eigen::LLT<RealMatrix> lz(Sym(zz) - lam * ident);
    if (ly.info() != Eigen::Success || lz.info() != Eigen::Success) {
      return std::numeric_limits<double>::infinity();
    }
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      logdet += 2.0 * std::log(ly.matrixLLT()(i, i));
      logdet += 2.0 * std::log(lz.matrixLLT()(i, i));
    }
    return -tau * lam - logdet;
  };

  double tau = cones / std::max(1.0, std::abs(lambda));
  for (int outer = 0; outer < 80; ++outer) {
    for (int inner = 0; inner < 100; ++inner) {
      assemble(t, &y, &z);
      Eigen::LLT<RealMatrix> ly(Sym(y) - (epsilon + lambda) * ident);
      Eigen::LLT<RealMatrix> lz(Sym(z) - lambda * ident);
      if (ly.info() != Eigen::Success || lz.info() != Eigen::Success) break;
      // Whitened directions G = L^{-1} F L^{-T}; the last one is lambda's.
      std::vector<RealMatrix> gy(static_cast<std::size_t>(k + 1));
      std::vector<RealMatrix> gz(static_cast<std::size_t>(k + 1));
      auto whiten = [](const Eigen::LLT<RealMatrix>& llt, const RealMatrix& f) {
        const RealMatrix half = llt.matrixL().solve(f);
        return RealMatrix(llt.matrixL().solve(half.transpose()));
      };
      for (Eigen::Index i = 0; i < k; ++i) {
        gy[static_cast<std::size_t>(i)] = whiten(ly, dir_y[static_cast<std::size_t>(i)]);
        gz[static_cast<std::size_t>(i)] = whiten(lz, dir_z[static_cast<std::size_t>(i)]);
      }
      gy[static_cast<std::size_t>(k)] = whiten(ly, -ident);
      gz[static_cast<std::size_t>(k)] = whiten(lz, -ident);
      RealVector grad(k + 1);
      RealMatrix hess(k + 1, k + 1);
      for (Eigen::Index i = 0; i <= k; ++i) {
        const auto si = static_cast<std::size_t>(i);
        grad(i) = -(gy[si].trace() + gz[si].trace());
        for (Eigen::Index j = 0; j <= i; ++j) {
          const auto sj = static_cast<std::size_t>(j);
          hess(i, j) = (gy[si].cwiseProduct(gy[sj])).sum() +
                       (gz[si].cwiseProduct(gz[sj])).sum();
          hess(j, i) = hess(i, j);
        }
      }
      grad(k) -= tau;
      const RealVector step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      ++result.newton_steps;
      if (!(decrement > 1e-12)) break;
      const double f0 = objective(t, lambda, tau);
      double alpha = 1.0;
      bool moved = false;
      while (alpha > 1e-14) {
        const RealVector t_new = t + alpha * step.head(k);
        const double l_new = lambda + alpha * step(k);
        if (objective(t_new, l_new, tau) <= f0 - 0.25 * alpha * decrement) {
          t = t_new;
          lambda = l_new;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved || lambda >= feasible_level) break;
      if (decrement < 1e-10) break;
    }
    result.margin = lambda;
    result.margin_bound = lambda + cones / tau;
    if (lambda >= feasible_level) {
      assemble(t, &y, &z);
      result.found = true;
      result.y = Sym(y);
      return result;
    }
    if (result.margin_bound < -tol * scale) {
      result.infeasible = true;
      break;
    }
    tau *= 10.0;
  }
  assemble(t, &y, &z);
  result.y = Sym(y);
  return result;
}
}  // namespace

const char* ToString(CertVerdict verdict) {
  switch (verdict) {
    case CertVerdict::kCertified: return "Certified";
    case CertVerdict::kInfeasible: return "Infeasible";
    case CertVerdict::kMaxIterations: return "MaxIterations";
  }
  return "Infeasible";
}

CertificateResiduals ComputeResiduals(const StateSpace& sys,
                                      const RealMatrix& y,
                                      const RealMatrix& l) {
  const RealMatrix& a = sys.a();
  const RealMatrix& b = sys.b();
  const RealMatrix& c = sys.c();
  CertificateResiduals r;
  const RealMatrix lyap = LyapunovOperator(a, y);
  r.lyap_residual = matops::MinEigSym(-lyap);
  r.coupling_residual = (b + a * y * c.transpose()).norm();
  const RealMatrix ltl =
      l.rows() == 0 ? RealMatrix::Zero(a.rows(), a.rows()) : RealMatrix(l.transpose() * l);
  r.factor_residual = (ltl + lyap).norm();
  const RealMatrix cb = c * b;
  const RealMatrix lct =
      l.rows() == 0 ? RealMatrix::Zero(0, c.rows()) : RealMatrix(l * c.transpose());
  const RealMatrix gram =
      lct.rows() == 0 ? RealMatrix::Zero(c.rows(), c.rows()) : RealMatrix(lct.transpose() * lct);
  r.cb_identity_residual = (cb + cb.transpose() - gram).norm();
  return r;
}

bool ResidualsAcceptable(const StateSpace& sys, const RealMatrix& y,
                         const CertificateResiduals& r, double tol) {
  if (y.rows() != sys.states() || y.cols() != sys.states()) return false;
  if (!(matops::MinEigSym(y) > 0.0)) return false;
  const double lyap_scale = LyapScale(LyapunovOperator(sys.a(), y));
  const double rank_slack =
      std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, sys.states())));
  return r.lyap_residual >= -tol * lyap_scale &&
         r.coupling_residual <= tol * matops::Scale(sys.b()) &&
         r.factor_residual <= tol * lyap_scale * rank_slack;
}

NICertificate LmiNiCertificate(const StateSpace& sys, const LmiOptions& opts) {
  const RealMatrix& a = sys.a();
  const RealMatrix& b = sys.b();
  const RealMatrix& c = sys.c();
  const Eigen::Index n = sys.states();
  const Eigen::Index m = sys.ports();
  const double tol = opts.tol;
  if (matops::MinSingularValue(a) <= tol * std::max(1.0, a.norm())) {
    throw Error(ErrorCode::kSingularA, "det(A) is numerically zero");
  }
  if (!matops::IsSymmetric(sys.d(), tol)) {
    throw Error(ErrorCode::kAsymmetricD, "D must equal D^T");
  }
  const double epsilon =
      opts.epsilon > 0.0 ? opts.epsilon : 1e-6 / std::max(a.norm(), 1e-300);

  const SymmetricBasis basis(n);
  const Eigen::Index dim = basis.size();
  // coupling: A Y C^T = -B as (n m) x dim; lyap: svec(A E + E A^T).
  RealMatrix coupling(n * m, dim);
  RealMatrix lyap(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const RealMatrix e = basis.Element(k);
    const RealMatrix aec = a * e * c.transpose();
    coupling.col(k) = Eigen::Map<const RealVector>(aec.data(), n * m);
    lyap.col(k) = basis.Svec(LyapunovOperator(a, e));
  }
  const RealVector rhs = -Eigen::Map<const RealVector>(b.data(), n * m);

  Eigen::BDCSVD<RealMatrix> svd(coupling,
                                Eigen::ComputeThinU | Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double sv_cut = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > sv_cut) ++rank;
  const RealMatrix& v = svd.matrixV();
  RealVector y_part = RealVector::Zero(dim);
  if (rank > 0) {
    const RealVector ut_rhs = svd.matrixU().leftCols(rank).transpose() * rhs;
    y_part = v.leftCols(rank) *
             ut_rhs.cwiseQuotient(sv.head(rank));
  }

  NICertificate cert;
  const RealVector affine_miss = rhs - coupling * y_part;
  if (affine_miss.norm() > tol * matops::Scale(b)) {
    cert.verdict = CertVerdict::kInfeasible;
    cert.witness = Eigen::Map<const RealMatrix>(affine_miss.data(), n, m) /
                   affine_miss.norm();
    std::ostringstream os;
    os << "no symmetric Y satisfies A Y C^T = -B (least-squares miss "
       << affine_miss.norm() << ")";
    cert.detail = os.str();
    FillFromY(sys, basis.Smat(y_part), tol, false, &cert);
    return cert;
  }

  const RealMatrix null_basis = v.rightCols(dim - rank);
  const Eigen::Index free_dims = null_basis.cols();

  auto cone_check = [&](const RealMatrix& y, double* gap) {
    const RealMatrix z = -LyapunovOperator(a, y);
    const RealMatrix y_proj = ClampBelow(y, epsilon);
    const RealMatrix z_proj = ClampBelow(z, 0.0);
    *gap = std::sqrt((y_proj - y).squaredNorm() + (z_proj - z).squaredNorm());
    return matops::MinEigSym(y) > 0.5 * epsilon &&
           matops::MinEigSym(z) >= -tol * LyapScale(z);
  };

  if (free_dims == 0) {
    const RealMatrix y = basis.Smat(y_part);
    double gap = 0.0;
    const bool ok = cone_check(y, &gap);
    cert.iterations = 0;
    cert.final_gap = gap;
    cert.verdict = ok ? CertVerdict::kCertified : CertVerdict::kInfeasible;
    cert.detail = ok ? "unique affine solution lies in the cone"
                     : "unique affine solution violates Y > 0 or A Y + Y A^T <= 0";
    FillFromY(sys, y, tol, ok, &cert);
    return cert;
  }

  // Least-squares map for the affine projection in (y, z) coordinates:
  // y = y_part + N t, z = -lyap y, minimizing |y - y0|^2 + |z - z0|^2.
  RealMatrix stacked(2 * dim, free_dims);
  stacked << null_basis, lyap * null_basis;
  const RealMatrix normal = stacked.transpose() * stacked;
  const RealMatrix solve_map = normal.llt().solve(stacked.transpose());
  const RealVector lyap_part = lyap * y_part;

  auto project_affine = [&](const RealVector& y0, const RealVector& z0) {
    RealVector target(2 * dim);
    target << y0 - y_part, -z0 - lyap_part;
    return RealVector(y_part + null_basis * (solve_map * target));
  };

  RealVector x_y = basis.Svec(RealMatrix::Identity(n, n));
  RealVector x_z = RealVector::Zero(dim);
  RealVector q_y = RealVector::Zero(dim);
  RealVector q_z = RealVector::Zero(dim);
  double best_gap = std::numeric_limits<double>::infinity();
  double window_ref = best_gap;
  RealVector a_y = y_part;
  bool stagnated = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    a_y = project_affine(x_y, x_z);
    const RealVector a_z = -(lyap * a_y);
    const RealMatrix y_aff = basis.Smat(a_y);
    double gap = 0.0;
    const bool ok = cone_check(y_aff, &gap);
    cert.iterations = it;
    cert.final_gap = gap;
    if (ok) {
      cert.verdict = CertVerdict::kCertified;
      cert.detail = "affine iterate entered the cone";
      FillFromY(sys, y_aff, tol, true, &cert);
      return cert;
    }
    best_gap = std::min(best_gap, gap);
    if (it % opts.stagnation_window == 0) {
      if (best_gap > 0.99 * window_ref) {
        stagnated = true;
        break;
      }
      window_ref = best_gap;
    }
    const RealMatrix shifted_y = basis.Smat(a_y + q_y);
    const RealMatrix shifted_z = basis.Smat(a_z + q_z);
    const RealVector next_y = basis.Svec(ClampBelow(shifted_y, epsilon));
    const RealVector next_z = basis.Svec(ClampBelow(shifted_z, 0.0));
    q_y = a_y + q_y - next_y;
    q_z = a_z + q_z - next_z;
    x_y = next_y;
    x_z = next_z;
  }

  // Projections converge sublinearly when the feasible set only touches the
  // cone (singular A Y + Y A^T). Finish from the last affine iterate with a
  // log-barrier maximization of the common cone margin over the same
  // parametrization Y = Y_part + N t.
  std::vector<RealMatrix> dir_y, dir_z;
  for (Eigen::Index i = 0; i < free_dims; ++i) {
    dir_y.push_back(basis.Smat(null_basis.col(i)));
    dir_z.push_back(-LyapunovOperator(a, dir_y.back()));
  }
  const RealMatrix y0 = basis.Smat(y_part);
  const RealVector t0 = null_basis.transpose() * (a_y - y_part);
  const BarrierResult polish =
      BarrierPolish(y0, -LyapunovOperator(a, y0), dir_y, dir_z, epsilon, t0,
                    tol);
  cert.iterations += polish.newton_steps;
  double gap = 0.0;
  if (polish.found && cone_check(polish.y, &gap)) {
    cert.final_gap = gap;
    cert.verdict = CertVerdict::kCertified;
    cert.detail = "certified after barrier polish of the projection iterate";
    FillFromY(sys, polish.y, tol, true, &cert);
    return cert;
  }
  std::ostringstream os;
  if (polish.infeasible) {
    cert.verdict = CertVerdict::kInfeasible;
    os << "cone margin bounded above by " << polish.margin_bound
       << (stagnated ? " (projection gap stagnated at " : " (projection gap ")
       << best_gap << ")";
  } else {
    cert.verdict = CertVerdict::kMaxIterations;
    os << "undecided: projection gap " << best_gap << ", barrier margin "
       << polish.margin;
  }
  cert.detail = os.str();
  FillFromY(sys, polish.y.size() > 0 ? polish.y : basis.Smat(a_y), tol, false,
            &cert);
  return cert;
}

RankConditionReport SniRankCondition(const StateSpace& sys,
                                     const NICertificate& cert,
                                     const FrequencyGrid& grid, double tol) {
  if (cert.verdict != CertVerdict::kCertified) {
    throw Error(ErrorCode::kNotCertified, "rank condition needs a certificate");
  }
  const Eigen::Index n = sys.states();
  const Eigen::Index m = sys.ports();
  const Eigen::Index r = cert.l.rows();
  ComplexMatrix pencil = ComplexMatrix::Zero(n + r, n + m);
  pencil.topLeftCorner(n, n) = sys.a().cast<Complex>();
  pencil.topRightCorner(n, m) = sys.b().cast<Complex>();
  if (r > 0) {
    pencil.bottomLeftCorner(r, n) = (cert.l * cert.p).cast<Complex>();
    pencil.bottomRightCorner(r, m) = (-cert.l * sys.c().transpose()).cast<Complex>();
  }
  const double scale = matops::Scale(pencil);
  RankConditionReport report;
  report.min_sv = std::numeric_limits<double>::infinity();
  for (double w : grid.Omegas()) {
    ComplexMatrix at = pencil;
    at.topLeftCorner(n, n).diagonal().array() -= Complex(0.0, w);
    const double sv = matops::ColumnRankMargin(at);
    if (sv < report.min_sv) {
      report.min_sv = sv;
      report.omega_at_min = w;
    }
  }
  report.strict = report.min_sv > tol * scale;
  return report;
}

WZeroReport WTransferZeroCheck(const StateSpace& sys, const NICertificate& cert,
                               const FrequencyGrid& grid, double tol) {
  if (cert.verdict != CertVerdict::kCertified) {
    throw Error(ErrorCode::kNotCertified, "W(s) needs a certificate");
  }
  const Eigen::Index n = sys.states();
  const Eigen::Index r = cert.l.rows();
  const ComplexMatrix lp = (cert.l * cert.p).cast<Complex>();
  const ComplexMatrix lct = (cert.l * sys.c().transpose()).cast<Complex>();
  const ComplexMatrix a = sys.a().cast<Complex>();
  const ComplexMatrix b = sys.b().cast<Complex>();
  auto w_at = [&](Complex s) {
    const ComplexMatrix shifted = s * ComplexMatrix::Identity(n, n) - a;
    return ComplexMatrix(lp * shifted.partialPivLu().solve(b) - lct);
  };
  WZeroReport report;
  report.min_sv = std::numeric_limits<double>::infinity();
  if (r == 0) {
    report.origin_value = 0.0;
  } else {
    report.origin_value = matops::ColumnRankMargin(w_at(Complex(0.0, 0.0)));
  }
  for (double w : grid.Omegas()) {
    double sv = 0.0;
    double scale = 1.0;
    if (r > 0) {
      const ComplexMatrix shifted =
          Complex(0.0, w) * ComplexMatrix::Identity(n, n) - a;
      if (matops::MinSingularValue(shifted) < kDefaultTolPole) continue;
      const ComplexMatrix wm = w_at(Complex(0.0, w));
      sv = matops::ColumnRankMargin(wm);
      scale = matops::Scale(wm);
    }
    report.samples.emplace_back(w, sv);
    report.min_sv = std::min(report.min_sv, sv);
    if (sv < tol * scale) report.flagged_omegas.push_back(w);
  }
  report.pass = report.flagged_omegas.empty();
  return report;
}

SniCertification CertifySni(const StateSpace& sys, const LmiOptions& opts,
                            const FrequencyGrid& grid) {
  SniCertification out;
  out.cert = LmiNiCertificate(sys, opts);
  out.hurwitz = true;
  for (const Complex& p : Poles(sys)) {
    if (p.real() >= -kDefaultTolAxis * std::max(1.0, std::abs(p))) {
      out.hurwitz = false;
    }
  }
  if (out.cert.verdict == CertVerdict::kCertified) {
    out.rank = SniRankCondition(sys, out.cert, grid, opts.tol);
    out.cert.rank_condition_min_sv = out.rank.min_sv;
    out.cert.strict = out.rank.strict && out.hurwitz;
  }
  out.certified =
      out.cert.verdict == CertVerdict::kCertified && out.cert.strict;
  return out;
}

}  // namespace niloop
