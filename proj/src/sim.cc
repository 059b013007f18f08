#include "niloop/sim.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "niloop/error.h"

namespace niloop {
namespace {

RealVector Rk4Step(const RealMatrix& a, const RealVector& x, double dt) {
  const RealVector k1 = a * x;
  const RealVector k2 = a * (x + 0.5 * dt * k1);
  const RealVector k3 = a * (x + 0.5 * dt * k2);
  const RealVector k4 = a * (x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Gramian of ||T e^{A tau} x||^2 over [0, dt] through the block exponential
// of [[-A^T, T^T T], [0, A]].
RealMatrix StepGramian(const RealMatrix& a, const RealMatrix& t, double dt) {
  const Eigen::Index n = a.rows();
  RealMatrix block = RealMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a.transpose();
  block.topRightCorner(n, n) = t.transpose() * t;
  block.bottomRightCorner(n, n) = a;
  const RealMatrix e = matops::MatrixExponential(block, dt);
  const RealMatrix g = e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n);
  return 0.5 * (g + g.transpose());
}

void AppendNumber(std::string* out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out->append(buf);
}

}  // namespace

SimulationTrace Simulate(const ClosedLoop& cl, const RealVector& x0,
                         double t_final, double dt, SimMethod method,
                         const LyapunovCertificate* cert) {
  const Eigen::Index n = cl.a_cl.rows();
  if (x0.size() != n) {
    std::ostringstream os;
    os << "x0 has length " << x0.size() << ", loop has " << n << " states";
    throw Error(ErrorCode::kDimension, os.str());
  }
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be positive and finite");
  }
  if (!std::isfinite(t_final) || t_final < dt * (1.0 - 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "t_final must be at least dt");
  }
  if (!x0.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "x0 has non-finite entries");
  }
  const long steps = static_cast<long>(std::floor(t_final / dt + 1e-9));

  SimulationTrace trace;
  trace.dt = dt;
  trace.method = method;
  trace.state_dim = n;
  trace.times.reserve(steps + 1);
  trace.states.reserve(steps + 1);

  RealMatrix propagator;
  if (method == SimMethod::kExpmExact) {
    propagator = matops::MatrixExponential(cl.a_cl, dt);
  }
  DissipationMaps maps;
  RealMatrix gramian;
  if (cert != nullptr) {
    maps = MakeDissipationMaps(cl, *cert);
    gramian = StepGramian(cl.a_cl, maps.t2, dt);
  }

  RealVector x = x0;
  for (long k = 0; k <= steps; ++k) {
    trace.times.push_back(static_cast<double>(k) * dt);
    trace.states.push_back(MakeInterconnectState(cl, x));
    if (cert != nullptr) {
      trace.v.push_back(x.dot(cert->q * x));
      trace.ytilde2_normsq.push_back((maps.t2 * x).squaredNorm());
      if (k < steps) trace.dissipation_increments.push_back(x.dot(gramian * x));
    }
    if (k == steps) break;
    x = method == SimMethod::kExpmExact ? RealVector(propagator * x)
                                        : Rk4Step(cl.a_cl, x, dt);
  }
  return trace;
}

std::string TraceToCsv(const SimulationTrace& trace) {
  std::string out = "t";
  for (Eigen::Index i = 1; i <= trace.state_dim; ++i) {
    out += ",x" + std::to_string(i);
  }
  out += ",V,ytilde2sq\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    AppendNumber(&out, trace.times[k]);
    const RealVector x = trace.states[k].Stacked();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      out += ',';
      AppendNumber(&out, x(i));
    }
    const bool monitored = k < trace.v.size();
    out += monitored ? "," : ",nan";
    if (monitored) AppendNumber(&out, trace.v[k]);
    out += monitored ? "," : ",nan";
    if (monitored) AppendNumber(&out, trace.ytilde2_normsq[k]);
    out += '\n';
  }
  return out;
}

}  // namespace niloop
