#pragma once

#include <string>

#include "niloop/lyapunov.h"

namespace niloop {

inline constexpr double kDefaultDt = 1e-2;

/// Autonomous closed-loop trajectory x' = A_cl x sampled at t_k = k dt for
/// k = 0..floor(t_final / dt). expm_exact applies one precomputed e^{A_cl dt};
/// rk4 is the classical fourth-order scheme. When cert is given, V, ||ytilde2||^2
/// and the exact per-step dissipation integral are recorded.
/// Throws kDimension for a wrong x0 length and kInvalidArgument unless
/// dt > 0 and t_final >= dt.
SimulationTrace Simulate(const ClosedLoop& cl, const RealVector& x0,
                         double t_final, double dt = kDefaultDt,
                         SimMethod method = SimMethod::kExpmExact,
                         const LyapunovCertificate* cert = nullptr);

/// Header "t,x1,..,xN,V,ytilde2sq" and one row per sample, 12 significant
/// digits. Unmonitored traces write nan in the last two columns.
std::string TraceToCsv(const SimulationTrace& trace);

}  // namespace niloop
