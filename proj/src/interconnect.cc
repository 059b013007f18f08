#include "niloop/interconnect.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace {

void RequireMatchingPorts(const StateSpace& plant, const StateSpace& controller) {
  if (plant.ports() != controller.ports()) {
    std::ostringstream os;
    os << "plant has " << plant.ports() << " ports but controller has "
       << controller.ports();
    throw Error(ErrorCode::kDimension, os.str());
  }
}

// Real eigenvalues of G0 H0 through the similar symmetric matrix
// S^{1/2} G0 S^{1/2} when one factor is symmetric PSD and the other is
// symmetric. Returns false when that structure is absent.
bool SymmetricProductEigenvalues(const RealMatrix& g0, const RealMatrix& h0,
                                 double tol, std::vector<Complex>* out) {
  if (!matops::IsSymmetric(g0, tol) || !matops::IsSymmetric(h0, tol)) {
    return false;
  }
  const RealMatrix gs = 0.5 * (g0 + g0.transpose());
  const RealMatrix hs = 0.5 * (h0 + h0.transpose());
  const RealMatrix* psd = nullptr;
  const RealMatrix* other = nullptr;
  if (matops::MinEigSym(hs) >= 0.0) {
    psd = &hs;
    other = &gs;
  } else if (matops::MinEigSym(gs) >= 0.0) {
    psd = &gs;
    other = &hs;
  } else {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(*psd);
  const RealMatrix root = es.eigenvectors() *
                          es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es.eigenvectors().transpose();
  const RealMatrix similar = root * *other * root;
  Eigen::SelfAdjointEigenSolver<RealMatrix> sym(0.5 * (similar + similar.transpose()),
                                                Eigen::EigenvaluesOnly);
  out->clear();
  for (Eigen::Index i = 0; i < sym.eigenvalues().size(); ++i) {
    out->emplace_back(sym.eigenvalues()(i), 0.0);
  }
  return true;
}

}  // namespace

const char* ToString(StabilityKind kind) {
  switch (kind) {
    case StabilityKind::kInternallyStable: return "InternallyStable";
    case StabilityKind::kUnstable: return "Unstable";
    case StabilityKind::kMarginallyStableOnAxis: return "MarginallyStableOnAxis";
    case StabilityKind::kHypothesisViolated: return "HypothesisViolated";
  }
  return "HypothesisViolated";
}

ClosedLoop AssembleLoop(const StateSpace& plant, const StateSpace& controller,
                        double tol) {
  RequireMatchingPorts(plant, controller);
  const Eigen::Index m = plant.ports();
  const Eigen::Index n1 = plant.states();
  const Eigen::Index n2 = controller.states();
  const RealMatrix ident = RealMatrix::Identity(m, m);

  // y1 = C1 x1 + D1 y2, y2 = C2 x2 + D2 y1.
  RealMatrix loop(2 * m, 2 * m);
  loop << ident, -plant.d(), -controller.d(), ident;
  if (matops::MinSingularValue(loop) <= tol) {
    throw Error(ErrorCode::kFeedthroughHypothesis,
                "I - D1 D2 is singular; the loop is not well posed");
  }
  RealMatrix outputs = RealMatrix::Zero(2 * m, n1 + n2);
  outputs.topLeftCorner(m, n1) = plant.c();
  outputs.bottomRightCorner(m, n2) = controller.c();
  const RealMatrix output_map = loop.partialPivLu().solve(outputs);

  RealMatrix a_cl = RealMatrix::Zero(n1 + n2, n1 + n2);
  a_cl.topLeftCorner(n1, n1) = plant.a();
  a_cl.bottomRightCorner(n2, n2) = controller.a();
  // u1 = y2 and u2 = y1.
  a_cl.topRows(n1) += plant.b() * output_map.bottomRows(m);
  a_cl.bottomRows(n2) += controller.b() * output_map.topRows(m);

  ClosedLoop cl{plant, controller, a_cl, output_map, {}, {}, 0.0, true,
                (plant.d() * controller.d()).norm()};
  cl.eigenvalues = matops::Eigenvalues(a_cl);
  cl.lambda_max = std::numeric_limits<double>::quiet_NaN();
  try {
    const DcGainResult dc = DcGainCondition(plant, controller, tol);
    cl.dc_product_eigs = dc.eigenvalues;
    cl.lambda_max = dc.lambda_max;
  } catch (const Error&) {
  }
  return cl;
}

ClosedLoop MakeClosedLoop(const StateSpace& plant, const StateSpace& controller,
                          double tol) {
  RequireMatchingPorts(plant, controller);
  const double dd = (plant.d() * controller.d()).norm();
  if (dd > tol) {
    std::ostringstream os;
    os << "G(inf) H(inf) = D1 D2 must vanish, ||D1 D2||_F = " << dd;
    throw Error(ErrorCode::kFeedthroughHypothesis, os.str());
  }
  return AssembleLoop(plant, controller, tol);
}

DcGainResult DcGainCondition(const StateSpace& plant,
                             const StateSpace& controller, double tol) {
  RequireMatchingPorts(plant, controller);
  const RealMatrix g0 = DcGain(plant, tol);
  const RealMatrix h0 = DcGain(controller, tol);
  const RealMatrix product = g0 * h0;
  DcGainResult out;
  const std::vector<Complex> general = matops::Eigenvalues(product);
  double radius = 0.0;
  double worst_imag = 0.0;
  for (const Complex& z : general) {
    radius = std::max(radius, std::abs(z));
    worst_imag = std::max(worst_imag, std::abs(z.imag()));
  }
  if (!SymmetricProductEigenvalues(g0, h0, tol, &out.eigenvalues)) {
    if (worst_imag > tol * std::max(1.0, radius)) {
      std::ostringstream os;
      os << "G(0) H(0) has an eigenvalue with imaginary part " << worst_imag;
      throw Error(ErrorCode::kNonRealSpectrum, os.str());
    }
    out.eigenvalues = general;
  }
  out.lambda_max = -std::numeric_limits<double>::infinity();
  for (const Complex& z : out.eigenvalues) {
    out.lambda_max = std::max(out.lambda_max, z.real());
  }
  out.holds = out.lambda_max < 1.0 - tol;
  return out;
}

Analysis Analyze(const StateSpace& plant, const StateSpace& controller,
                 const AnalyzeOptions& opts) {
  RequireMatchingPorts(plant, controller);
  const double tol = opts.tol;
  Analysis out;
  out.warnings.push_back(
      "LMI certificates use A Y + Y A^T = -L^T L with Y = P^{-1}; the "
      "'+L^T L' reading contradicts A P^{-1} + P^{-1} A^T <= 0");
  out.warnings.push_back("the loop hypothesis N(inf) >= 0 is read as H(inf) = D2 >= 0");

  for (const auto* sys : {&plant, &controller}) {
    const MinimalityReport minimal = IsMinimal(*sys);
    if (!minimal.minimal) {
      out.warnings.push_back((sys == &plant ? "plant" : "controller") +
                             std::string(" realization is not minimal: ") +
                             minimal.diagnosis);
    }
  }

  HypothesisCheck plant_ni{"PlantNI", false, ""};
  try {
    NICertificate cert = LmiNiCertificate(plant, opts.lmi);
    plant_ni.holds = cert.verdict == CertVerdict::kCertified;
    plant_ni.detail = std::string(ToString(cert.verdict)) + ": " + cert.detail;
    out.plant_cert = std::move(cert);
  } catch (const Error& e) {
    plant_ni.detail = e.what();
  }
  out.hypotheses.push_back(plant_ni);

  HypothesisCheck controller_sni{"ControllerSNI", false, ""};
  try {
    SniCertification sni = CertifySni(controller, opts.lmi, opts.grid);
    controller_sni.holds = sni.certified;
    std::ostringstream os;
    os << ToString(sni.cert.verdict) << ", hurwitz " << (sni.hurwitz ? "yes" : "no");
    if (sni.cert.verdict == CertVerdict::kCertified) {
      os << ", rank margin " << sni.rank.min_sv;
    }
    controller_sni.detail = os.str();
    out.controller_cert = std::move(sni);
  } catch (const Error& e) {
    controller_sni.detail = e.what();
  }
  out.hypotheses.push_back(controller_sni);

  const double dd = (plant.d() * controller.d()).norm();
  std::ostringstream dd_detail;
  dd_detail << "||D1 D2||_F = " << dd;
  out.hypotheses.push_back({"FeedthroughProduct", dd <= tol, dd_detail.str()});

  const double d2_min = matops::MinEigSym(controller.d());
  std::ostringstream d2_detail;
  d2_detail << "min eig(D2) = " << d2_min;
  out.hypotheses.push_back({"ControllerFeedthroughPSD",
                            matops::IsPsd(controller.d(), tol), d2_detail.str()});

  HypothesisCheck dc{"DCGain", false, ""};
  try {
    DcGainResult result = DcGainCondition(plant, controller, tol);
    dc.holds = result.holds;
    std::ostringstream os;
    os.precision(17);
    os << "lambda_max(G(0) H(0)) = " << result.lambda_max;
    dc.detail = os.str();
    out.dc_gain = std::move(result);
  } catch (const Error& e) {
    dc.detail = e.what();
  }
  out.hypotheses.push_back(dc);

  try {
    out.closed_loop = AssembleLoop(plant, controller, tol);
  } catch (const Error& e) {
    out.warnings.push_back(std::string("no closed loop: ") + e.what());
  }

  for (const HypothesisCheck& h : out.hypotheses) {
    if (!h.holds) out.verdict.violated_hypotheses.push_back(h.name);
  }
  const bool hypotheses_hold = out.verdict.violated_hypotheses.empty();
  if (!out.closed_loop) {
    out.verdict.margin = std::numeric_limits<double>::quiet_NaN();
    out.verdict.kind = StabilityKind::kHypothesisViolated;
    return out;
  }
  const ClosedLoop& cl = *out.closed_loop;
  const double abscissa = matops::SpectralAbscissa(cl.eigenvalues);
  const double band = opts.hurwitz_tol * matops::Scale(cl.a_cl);
  out.verdict.margin = -abscissa;
  out.verdict.hurwitz = abscissa < -band;
  if (!hypotheses_hold) {
    out.verdict.kind = StabilityKind::kHypothesisViolated;
  } else if (out.verdict.hurwitz) {
    out.verdict.kind = StabilityKind::kInternallyStable;
  } else if (abscissa <= band) {
    out.verdict.kind = StabilityKind::kMarginallyStableOnAxis;
  } else {
    out.verdict.kind = StabilityKind::kUnstable;
  }
  return out;
}

}  // namespace niloop
