#include "niloop/random_system.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "niloop/error.h"

namespace niloop {
namespace {

// mt19937_64 is fully specified by the standard; the normal draws are built
// on top of it directly so the stream is identical across standard libraries.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  RealMatrix Matrix(Eigen::Index rows, Eigen::Index cols) {
    RealMatrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = Next();
    }
    return out;
  }

  int Integer(int lo, int hi) {
    return lo + static_cast<int>(Uniform() * static_cast<double>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

GeneratedSystem RandomNiSystem(std::uint64_t seed, int n, int m,
                               const RandomSystemOptions& opts) {
  if (n < 1 || m < 1) {
    throw Error(ErrorCode::kInvalidArgument, "random system needs n, m >= 1");
  }
  Gaussian rng(seed);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    const RealMatrix r = rng.Matrix(n, n) / root_n;
    const RealMatrix y = r * r.transpose() + 0.5 * RealMatrix::Identity(n, n);
    const RealMatrix k = rng.Matrix(n, n);
    const RealMatrix s = 0.5 * (k - k.transpose());
    RealMatrix w;
    if (opts.strict) {
      const RealMatrix f = rng.Matrix(n, n) / root_n;
      w = f * f.transpose() + 0.1 * RealMatrix::Identity(n, n);
    } else {
      const int rank = rng.Integer(0, n);
      const RealMatrix f = rng.Matrix(n, rank) / root_n;
      w = rank == 0 ? RealMatrix::Zero(n, n) : RealMatrix(f * f.transpose());
    }
    const RealMatrix a =
        (s - 0.5 * w) * y.llt().solve(RealMatrix::Identity(n, n));
    const RealMatrix c = rng.Matrix(m, n);
    const RealMatrix b = -a * y * c.transpose();
    RealMatrix d = RealMatrix::Zero(m, m);
    if (opts.feedthrough != FeedthroughKind::kZero) {
      const RealMatrix e = rng.Matrix(m, m);
      d = opts.feedthrough == FeedthroughKind::kPsd
              ? RealMatrix(0.25 * e * e.transpose() / static_cast<double>(m))
              : RealMatrix(0.25 * (e + e.transpose()));
    }
    StateSpace sys(a, b, c, d, "random-ni");

    if (matops::MinSingularValue(a) <= 1e-6 * std::max(1.0, a.norm())) continue;
    if (!IsMinimal(sys, 1e-6).minimal) continue;
    const PoleClassification poles = ClassifyPoles(sys);
    bool simple_axis = true;
    for (int mult : poles.axis_multiplicity) simple_axis &= mult == 1;
    if (!simple_axis || poles.origin_pole) continue;

    NICertificate cert;
    cert.y = 0.5 * (y + y.transpose());
    cert.p = cert.y.llt().solve(RealMatrix::Identity(n, n));
    cert.p = 0.5 * (cert.p + cert.p.transpose());
    cert.l = matops::PsdFactor(w);
    const CertificateResiduals res = ComputeResiduals(sys, cert.y, cert.l);
    cert.lyap_residual = res.lyap_residual;
    cert.coupling_residual = res.coupling_residual;
    cert.factor_residual = res.factor_residual;
    cert.cb_identity_residual = res.cb_identity_residual;
    cert.verdict = CertVerdict::kCertified;
    cert.detail = "constructed";

    if (opts.strict) {
      if (poles.spectral_abscissa >= -1e-6) continue;
      const RankConditionReport rank = SniRankCondition(sys, cert);
      cert.rank_condition_min_sv = rank.min_sv;
      if (!rank.strict) continue;
      cert.strict = true;
    }
    return GeneratedSystem{std::move(sys), std::move(cert), attempt};
  }
  throw Error(ErrorCode::kGenerationFailed,
              "no acceptable system after " + std::to_string(opts.max_attempts) +
                  " draws");
}

GeneratedSystem RandomNiSystem(std::uint64_t seed, int n, int m, bool strict) {
  RandomSystemOptions opts;
  opts.strict = strict;
  return RandomNiSystem(seed, n, m, opts);
}

StateSpace RandomSuiteSystem(std::uint64_t seed, int index) {
  if (index < 0) throw Error(ErrorCode::kInvalidArgument, "index must be >= 0");
  const int n = 1 + index % 6;
  const int m = 1 + (index / 6) % std::min(n, 3);
  const std::uint64_t base = seed * 1000003ULL + static_cast<std::uint64_t>(index);
  RandomSystemOptions opts;
  opts.strict = (index / 4) % 3 == 0;
  const StateSpace sys = RandomNiSystem(base, n, m, opts).sys;
  Gaussian rng(base ^ 0x5bd1e995ULL);
  switch (index % 4) {
    case 1: {
      const RealMatrix e = rng.Matrix(n, m);
      const double delta = 0.05 + 0.5 * rng.Uniform();
      return StateSpace(sys.a(), sys.b() + delta * e / std::max(1e-12, e.norm()) *
                                               matops::Scale(sys.b()),
                        sys.c(), sys.d(), "perturbed-b");
    }
    case 2:
      return StateSpace(sys.a(), sys.b(), -sys.c(), sys.d(), "flipped-c");
    case 3: {
      const RealMatrix e = rng.Matrix(n, n);
      return StateSpace(sys.a() + 0.3 * sys.a().norm() / std::max(1e-12, e.norm()) * e,
                        sys.b(), sys.c(), sys.d(), "perturbed-a");
    }
    default:
      return sys;
  }
}

RealVector RandomGaussianVector(std::uint64_t seed, Eigen::Index n) {
  Gaussian rng(seed);
  return rng.Matrix(n, 1).col(0);
}

GeneratedPair RandomNiPair(std::uint64_t seed, int max_states) {
  if (max_states < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_states must be >= 1");
  }
  std::mt19937_64 pick(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto draw = [&pick](int lo, int hi) {
    return lo + static_cast<int>((pick() >> 11) % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const int n1 = draw(1, max_states);
  const int n2 = draw(1, max_states);
  const int m = draw(1, std::min({n1, n2, 2}));
  RandomSystemOptions plant_opts;
  RandomSystemOptions controller_opts;
  controller_opts.strict = true;
  switch (draw(0, 2)) {
    case 0:
      plant_opts.feedthrough = FeedthroughKind::kSymmetric;
      controller_opts.feedthrough = FeedthroughKind::kZero;
      break;
    case 1:
      plant_opts.feedthrough = FeedthroughKind::kZero;
      controller_opts.feedthrough = FeedthroughKind::kPsd;
      break;
    default:
      plant_opts.feedthrough = FeedthroughKind::kZero;
      controller_opts.feedthrough = FeedthroughKind::kZero;
      break;
  }
  GeneratedPair pair{RandomNiSystem(2 * seed + 1, n1, m, plant_opts),
                     RandomNiSystem(2 * seed + 2, n2, m, controller_opts), 1.0};
  const double u = static_cast<double>(pick() >> 11) * 0x1.0p-53;
  pair.gain = std::exp(4.0 * u - 2.0);

  // k H(s) is realized by (A, k B, C, k D) with Y -> k Y and L -> sqrt(k) L.
  const StateSpace& h = pair.controller.sys;
  const double k = pair.gain;
  StateSpace scaled(h.a(), k * h.b(), h.c(), k * h.d(), h.label());
  NICertificate cert = pair.controller.cert;
  cert.y *= k;
  cert.p /= k;
  cert.l *= std::sqrt(k);
  const CertificateResiduals res = ComputeResiduals(scaled, cert.y, cert.l);
  cert.lyap_residual = res.lyap_residual;
  cert.coupling_residual = res.coupling_residual;
  cert.factor_residual = res.factor_residual;
  cert.cb_identity_residual = res.cb_identity_residual;
  cert.rank_condition_min_sv = SniRankCondition(scaled, cert).min_sv;
  pair.controller.sys = std::move(scaled);
  pair.controller.cert = std::move(cert);
  return pair;
}

}  // namespace niloop
