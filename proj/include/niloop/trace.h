#pragma once

#include <vector>

#include "niloop/matops.h"

namespace niloop {

/// Loop state with the outputs solved from the loop constraint u1 = y2,
/// u2 = y1.
struct InterconnectState {
  RealVector x1;
  RealVector x2;
  RealVector y1;
  RealVector y2;

  const RealVector& u1() const { return y2; }
  const RealVector& u2() const { return y1; }
  RealVector Stacked() const;
};

enum class SimMethod { kExpmExact, kRk4 };

const char* ToString(SimMethod method);

struct SimulationTrace {
  std::vector<double> times;
  std::vector<InterconnectState> states;
  /// Filled only when a Lyapunov certificate was supplied to the simulator.
  std::vector<double> v;
  std::vector<double> ytilde2_normsq;
  /// Exact integral of ||ytilde2||^2 over [t_k, t_{k+1}] along the exact
  /// flow from states[k]; one entry per step.
  std::vector<double> dissipation_increments;
  double dt = 0.0;
  SimMethod method = SimMethod::kExpmExact;
  /// n1 + n2, kept so that an empty trace still knows its CSV header.
  Eigen::Index state_dim = 0;

  bool monitored() const { return !v.empty(); }
};

}  // namespace niloop
