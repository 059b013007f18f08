#pragma once

#include <cstdint>

#include "niloop/lmi_certificate.h"

namespace niloop {

enum class FeedthroughKind { kZero, kSymmetric, kPsd };

struct RandomSystemOptions {
  bool strict = false;
  FeedthroughKind feedthrough = FeedthroughKind::kSymmetric;
  int max_attempts = 200;
};

struct GeneratedSystem {
  StateSpace sys;
  /// Certificate known from the construction (not from the solver).
  NICertificate cert;
  int attempts = 0;
};

/// Builds a minimal NI system from a chosen certificate: Y > 0, skew S and
/// PSD W give A = (S - W/2) Y^{-1} (so A Y + Y A^T = -W), a random C, and
/// B = -A Y C^T. With strict set, W > 0, A is Hurwitz and the SNI rank
/// condition holds on the default grid. Deterministic in the seed. Throws
/// kGenerationFailed after opts.max_attempts draws.
GeneratedSystem RandomNiSystem(std::uint64_t seed, int n, int m,
                               const RandomSystemOptions& opts);

GeneratedSystem RandomNiSystem(std::uint64_t seed, int n, int m, bool strict);

/// NI plant and SNI controller with matching ports and D1 D2 = 0 (D2 PSD).
/// The controller is scaled by a log-uniform gain in [e^-2, e^2] so that
/// lambda_max(G(0) H(0)) falls on both sides of 1; certificates are rescaled
/// to match.
struct GeneratedPair {
  GeneratedSystem plant;
  GeneratedSystem controller;
  double gain = 1.0;
};

GeneratedPair RandomNiPair(std::uint64_t seed, int max_states = 4);

/// Member `index` of the mixed certifier-agreement suite: an NI system with
/// 1..6 states, left intact (index % 4 == 0) or perturbed by a random B
/// offset (1), a sign flip of C (2) or a random A offset (3). Most
/// perturbations destroy the NI property.
StateSpace RandomSuiteSystem(std::uint64_t seed, int index);

/// Standard normal entries from the same deterministic generator.
RealVector RandomGaussianVector(std::uint64_t seed, Eigen::Index n);

}  // namespace niloop
