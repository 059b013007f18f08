#include "niloop/lyapunov.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace {

void RequirePd(const RealMatrix& p, Eigen::Index n, const char* name,
               double tol) {
  if (p.rows() != n || p.cols() != n) {
    std::ostringstream os;
    os << name << " is " << p.rows() << "x" << p.cols() << ", expected " << n
       << "x" << n;
    throw Error(ErrorCode::kDimension, os.str());
  }
  matops::RequireFinite(p, name);
  if (!matops::IsSymmetric(p, tol)) {
    throw Error(ErrorCode::kNotPsd, std::string(name) + " is not symmetric");
  }
  if (matops::MinEigSym(p) <= 0.0) {
    throw Error(ErrorCode::kNotPsd, std::string(name) + " is not positive definite");
  }
}

}  // namespace

RealVector InterconnectState::Stacked() const {
  RealVector x(x1.size() + x2.size());
  x << x1, x2;
  return x;
}

const char* ToString(SimMethod method) {
  return method == SimMethod::kRk4 ? "rk4" : "expm_exact";
}

LyapunovCertificate BlockGram(const RealMatrix& p1, const RealMatrix& p2,
                              const StateSpace& plant,
                              const StateSpace& controller, double tol) {
  if (plant.ports() != controller.ports()) {
    throw Error(ErrorCode::kDimension, "plant and controller port counts differ");
  }
  RequirePd(p1, plant.states(), "P1", tol);
  RequirePd(p2, controller.states(), "P2", tol);
  const Eigen::Index n1 = plant.states();
  const Eigen::Index n2 = controller.states();
  const RealMatrix& c1 = plant.c();
  const RealMatrix& c2 = controller.c();

  LyapunovCertificate cert;
  cert.p1 = 0.5 * (p1 + p1.transpose());
  cert.p2 = 0.5 * (p2 + p2.transpose());
  cert.q.resize(n1 + n2, n1 + n2);
  cert.q.topLeftCorner(n1, n1) = cert.p1 - c1.transpose() * controller.d() * c1;
  cert.q.topRightCorner(n1, n2) = -c1.transpose() * c2;
  cert.q.bottomLeftCorner(n2, n1) = -c2.transpose() * c1;
  cert.q.bottomRightCorner(n2, n2) = cert.p2 - c2.transpose() * plant.d() * c2;
  cert.q = 0.5 * (cert.q + cert.q.transpose());
  cert.min_eig_q = matops::MinEigSym(cert.q);
  cert.derivative_identity_residual = std::numeric_limits<double>::quiet_NaN();
  return cert;
}

DissipationMaps MakeDissipationMaps(const ClosedLoop& cl,
                                    const LyapunovCertificate& cert,
                                    bool flip_sign) {
  const Eigen::Index n1 = cl.plant.states();
  const Eigen::Index n2 = cl.controller.states();
  const Eigen::Index m = cl.plant.ports();
  const double sign = flip_sign ? 1.0 : -1.0;
  const RealMatrix y1_rows = cl.output_map.topRows(m);
  const RealMatrix y2_rows = cl.output_map.bottomRows(m);

  DissipationMaps maps;
  maps.t1 = sign * cert.l1 * cl.plant.c().transpose() * y2_rows;
  maps.t1.leftCols(n1) += cert.l1 * cert.p1;
  maps.t2 = sign * cert.l2 * cl.controller.c().transpose() * y1_rows;
  maps.t2.rightCols(n2) += cert.l2 * cert.p2;
  return maps;
}

LyapunovCertificate LoopLyapunovCertificate(const ClosedLoop& cl,
                                            const NICertificate& plant_cert,
                                            const NICertificate& controller_cert,
                                            double tol) {
  if (plant_cert.verdict != CertVerdict::kCertified ||
      controller_cert.verdict != CertVerdict::kCertified) {
    throw Error(ErrorCode::kNotCertified,
                "both loop components need a Certified NI certificate");
  }
  LyapunovCertificate cert =
      BlockGram(plant_cert.p, controller_cert.p, cl.plant, cl.controller, tol);
  cert.l1 = plant_cert.l;
  cert.l2 = controller_cert.l;
  const DissipationMaps maps = MakeDissipationMaps(cl, cert);
  const RealMatrix lhs = cl.a_cl.transpose() * cert.q + cert.q * cl.a_cl +
                         maps.t1.transpose() * maps.t1 +
                         maps.t2.transpose() * maps.t2;
  cert.derivative_identity_residual =
      lhs.norm() / std::max(1.0, cert.q.norm() * cl.a_cl.norm());
  return cert;
}

GramDcGainReport GramDcGainEquivalence(const StateSpace& plant,
                               const StateSpace& controller,
                               const RealMatrix& p1, const RealMatrix& p2,
                               double tol, double band) {
  const LyapunovCertificate cert = BlockGram(p1, p2, plant, controller, tol);
  const DcGainResult dc = DcGainCondition(plant, controller, tol);
  GramDcGainReport out;
  out.min_eig_q = cert.min_eig_q;
  out.lambda_max = dc.lambda_max;
  out.q_positive = cert.min_eig_q > tol;
  out.dc_holds = dc.holds;
  out.agree = out.q_positive == out.dc_holds;
  out.borderline = std::abs(cert.min_eig_q) <= band ||
                   std::abs(1.0 - dc.lambda_max) <= band;
  return out;
}

InterconnectState MakeInterconnectState(const ClosedLoop& cl,
                                        const RealVector& x) {
  const Eigen::Index n1 = cl.plant.states();
  const Eigen::Index n2 = cl.controller.states();
  const Eigen::Index m = cl.plant.ports();
  if (x.size() != n1 + n2) {
    std::ostringstream os;
    os << "state has length " << x.size() << ", loop has " << n1 + n2
       << " states";
    throw Error(ErrorCode::kDimension, os.str());
  }
  InterconnectState s;
  s.x1 = x.head(n1);
  s.x2 = x.tail(n2);
  const RealVector y = cl.output_map * x;
  s.y1 = y.head(m);
  s.y2 = y.tail(m);
  return s;
}

ValueReport LyapunovValue(const InterconnectState& state,
                          const LyapunovCertificate& cert,
                          const StateSpace& plant,
                          const StateSpace& controller) {
  if (state.x1.size() != cert.p1.rows() || state.x2.size() != cert.p2.rows() ||
      state.y1.size() != plant.ports() || state.y2.size() != controller.ports()) {
    throw Error(ErrorCode::kDimension, "state does not match the certificate");
  }
  const RealVector x = state.Stacked();
  ValueReport out;
  out.quadratic = x.dot(cert.q * x);
  out.literal = state.x1.dot(cert.p1 * state.x1) +
                state.x2.dot(cert.p2 * state.x2) - 2.0 * state.y1.dot(state.y2);
  out.corrected = out.literal + state.y1.dot(controller.d() * state.y1) +
                  state.y2.dot(plant.d() * state.y2);
  out.residual = std::abs(out.quadratic - out.corrected);
  out.consistent =
      out.residual <= 1e-10 * std::max(1.0, x.squaredNorm() * cert.q.norm());
  return out;
}

DerivativeReport LyapunovDerivative(const InterconnectState& state,
                                    const ClosedLoop& cl,
                                    const LyapunovCertificate& cert,
                                    bool flip_sign) {
  if (cert.l2.cols() != cl.controller.states() ||
      cert.l1.cols() != cl.plant.states()) {
    throw Error(ErrorCode::kNotCertified,
                "certificate factors do not match the loop");
  }
  const RealVector x = state.Stacked();
  if (x.size() != cl.a_cl.rows()) {
    throw Error(ErrorCode::kDimension, "state does not match the loop");
  }
  const double sign = flip_sign ? 1.0 : -1.0;
  DerivativeReport out;
  out.ytilde1 = cert.l1 * cert.p1 * state.x1 +
                sign * cert.l1 * cl.plant.c().transpose() * state.u1();
  out.ytilde2 = cert.l2 * cert.p2 * state.x2 +
                sign * cert.l2 * cl.controller.c().transpose() * state.u2();
  const RealVector xdot = cl.a_cl * x;
  out.vdot_quadratic = 2.0 * x.dot(cert.q * xdot);
  out.vdot_dissipation = -out.ytilde1.squaredNorm() - out.ytilde2.squaredNorm();
  out.residual = std::abs(out.vdot_quadratic - out.vdot_dissipation);
  const double scale = x.squaredNorm() * cert.q.norm() * cl.a_cl.norm();
  out.within_tolerance = out.residual <= 1e-7 * std::max(1.0, scale);
  return out;
}

DissipationReport DissipationIntegralCheck(const SimulationTrace& trace,
                                           double tol_int, double tol_monotone) {
  DissipationReport out;
  if (trace.times.empty()) {
    out.bound_holds = true;
    out.monotone = true;
    return out;
  }
  if (!trace.monitored()) {
    throw Error(ErrorCode::kInvalidArgument,
                "trace was simulated without a Lyapunov certificate");
  }
  out.v0 = trace.v.front();
  out.steps = static_cast<int>(trace.times.size()) - 1;
  out.worst_excess = -out.v0;
  out.worst_increase = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < out.steps; ++k) {
    out.integral += trace.dissipation_increments[k];
    out.integral_trapezoid +=
        0.5 * trace.dt * (trace.ytilde2_normsq[k] + trace.ytilde2_normsq[k + 1]);
    out.worst_excess = std::max(out.worst_excess, out.integral - out.v0);
    out.worst_increase = std::max(out.worst_increase, trace.v[k + 1] - trace.v[k]);
  }
  if (out.steps == 0) out.worst_increase = 0.0;
  out.bound_holds = out.worst_excess <= tol_int;
  out.monotone = out.worst_increase <= tol_monotone;
  return out;
}

}  // namespace niloop
