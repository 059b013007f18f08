#include "niloop/lyapunov.h"

#include <cmath>

#include <gtest/gtest.h>

#include "niloop/error.h"
#include "niloop/random_system.h"
#include "niloop/sim.h"
#include "test_support.h"

namespace niloop {
namespace {

using testing::Oscillator;
using testing::Rng;
using testing::Siso;

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

RealMatrix Scalar(double v) { return RealMatrix::Constant(1, 1, v); }

struct WorkedLoop {
  StateSpace plant = Oscillator();
  StateSpace controller;
  ClosedLoop cl;
  LyapunovCertificate cert;

  explicit WorkedLoop(double gain)
      : controller(Siso(-1, 1, gain)),
        cl(MakeClosedLoop(plant, controller)),
        cert(LoopLyapunovCertificate(cl, LmiNiCertificate(plant), LmiNiCertificate(controller))) {}
};

TEST(BlockGramTest, WorkedExamples) {
  const LyapunovCertificate pd =
      BlockGram(RealMatrix::Identity(2, 2), Scalar(0.5), Oscillator(), Siso(-1, 1, 0.5));
  RealMatrix q(3, 3);
  q << 1, 0, -0.5, 0, 1, 0, -0.5, 0, 0.5;
  EXPECT_LE((pd.q - q).norm(), 1e-15);
  EXPECT_GT(pd.min_eig_q, 0.0);
  // Leading minors 1, 1, 0.25.
  EXPECT_NEAR(pd.q.topLeftCorner(2, 2).determinant(), 1.0, 1e-15);
  EXPECT_NEAR(pd.q.determinant(), 0.25, 1e-15);

  const LyapunovCertificate indef =
      BlockGram(RealMatrix::Identity(2, 2), Scalar(2.0), Oscillator(), Siso(-1, 1, 2));
  q << 1, 0, -2, 0, 1, 0, -2, 0, 2;
  EXPECT_LE((indef.q - q).norm(), 1e-15);
  EXPECT_LT(indef.min_eig_q, 0.0);
  RealMatrix trailing(2, 2);
  trailing << 1, -2, -2, 2;
  EXPECT_NEAR(RealMatrix(indef.q({0, 2}, {0, 2})).determinant(), trailing.determinant(), 1e-15);

  Rng rng(51);
  const RealMatrix p1 = rng.Psd(3, 3) + RealMatrix::Identity(3, 3);
  const RealMatrix p2 = rng.Psd(2, 2) + RealMatrix::Identity(2, 2);
  const StateSpace g(rng.Matrix(3, 3), rng.Matrix(3, 1), RealMatrix::Zero(1, 3), Scalar(0.0));
  const StateSpace h(rng.Matrix(2, 2), rng.Matrix(2, 1), rng.Matrix(1, 2), Scalar(0.0));
  const LyapunovCertificate dec = BlockGram(p1, p2, g, h);
  RealMatrix block = RealMatrix::Zero(5, 5);
  block.topLeftCorner(3, 3) = p1;
  block.bottomRightCorner(2, 2) = p2;
  EXPECT_LE((dec.q - block).norm(), 1e-12);
  EXPECT_GT(dec.min_eig_q, 0.0);
}

TEST(BlockGramTest, Errors) {
  EXPECT_EQ(CodeOf([] { BlockGram(Scalar(1), Scalar(1), Oscillator(), Siso(-1, 1, 1)); }),
            ErrorCode::kDimension);
  EXPECT_EQ(CodeOf([] { BlockGram(-RealMatrix::Identity(2, 2), Scalar(1), Oscillator(), Siso(-1, 1, 1)); }),
            ErrorCode::kNotPsd);
}

TEST(GramDcGainEquivalenceTest, WorkedExamples) {
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  const GramDcGainReport pd = GramDcGainEquivalence(Oscillator(), Siso(-1, 1, 0.5), i2, Scalar(0.5));
  EXPECT_TRUE(pd.agree);
  EXPECT_TRUE(pd.q_positive);
  EXPECT_TRUE(pd.dc_holds);
  EXPECT_FALSE(pd.borderline);
  EXPECT_NEAR(pd.lambda_max, 0.5, 1e-12);

  const GramDcGainReport indef = GramDcGainEquivalence(Oscillator(), Siso(-1, 1, 2), i2, Scalar(2));
  EXPECT_TRUE(indef.agree);
  EXPECT_FALSE(indef.q_positive);
  EXPECT_FALSE(indef.dc_holds);

  const GramDcGainReport edge = GramDcGainEquivalence(Oscillator(), Siso(-1, 1, 1), i2, Scalar(1));
  EXPECT_TRUE(edge.borderline);
  EXPECT_NEAR(edge.min_eig_q, 0.0, 1e-14);
  EXPECT_NEAR(edge.lambda_max, 1.0, 1e-14);
}

TEST(GramDcGainEquivalencePropertyTest, RandomPairs) {
  int decided = 0, positive = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const GeneratedPair p = RandomNiPair(seed);
    const GramDcGainReport r = GramDcGainEquivalence(p.plant.sys, p.controller.sys, p.plant.cert.p,
                                             p.controller.cert.p);
    if (r.borderline) continue;
    ++decided;
    positive += r.q_positive;
    EXPECT_TRUE(r.agree) << "seed " << seed << ": min eig " << r.min_eig_q << ", lambda "
                         << r.lambda_max;
    EXPECT_NEAR(r.min_eig_q, testing::JacobiMinEig(BlockGram(p.plant.cert.p, p.controller.cert.p,
                                                             p.plant.sys, p.controller.sys)
                                                       .q),
                1e-9);
  }
  EXPECT_GT(decided, 190);
  EXPECT_GT(positive, 30);
  EXPECT_LT(positive, decided - 30);
}

TEST(InterconnectStateTest, SolvesLoop) {
  const WorkedLoop w(0.5);
  RealVector x(3);
  x << 1, 2, 3;
  const InterconnectState s = MakeInterconnectState(w.cl, x);
  EXPECT_NEAR(s.y1(0), 1.0, 1e-15);
  EXPECT_NEAR(s.y2(0), 1.5, 1e-15);
  EXPECT_EQ(s.u1(), s.y2);
  EXPECT_EQ(s.u2(), s.y1);
  EXPECT_EQ(CodeOf([&] { MakeInterconnectState(w.cl, RealVector::Zero(2)); }), ErrorCode::kDimension);
}

TEST(LyapunovValueTest, WorkedExamples) {
  const WorkedLoop w(0.5);
  const ValueReport zero = LyapunovValue(MakeInterconnectState(w.cl, RealVector::Zero(3)), w.cert,
                                         w.plant, w.controller);
  EXPECT_EQ(zero.quadratic, 0.0);
  RealVector x(3);
  x << 1, 0, 0;
  const ValueReport v = LyapunovValue(MakeInterconnectState(w.cl, x), w.cert, w.plant, w.controller);
  EXPECT_NEAR(v.quadratic, 1.0, 1e-12);
  EXPECT_NEAR(v.literal, 1.0, 1e-12);
  EXPECT_TRUE(v.consistent);
  Rng rng(52);
  for (int k = 0; k < 100; ++k) {
    const RealVector r = rng.Vector(3);
    EXPECT_GT(LyapunovValue(MakeInterconnectState(w.cl, r), w.cert, w.plant, w.controller).quadratic, 0.0);
  }
}

// With feedthrough, x^T Q x equals V1 + V2 - 2 y1^T y2 + y1^T D2 y1 + y2^T D1 y2.
TEST(LyapunovValueTest, FeedthroughCorrection) {
  int literal_off = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const GeneratedPair p = RandomNiPair(seed);
    const ClosedLoop cl = MakeClosedLoop(p.plant.sys, p.controller.sys);
    const LyapunovCertificate cert = LoopLyapunovCertificate(cl, p.plant.cert, p.controller.cert);
    const RealVector x = Rng(seed).Vector(cl.a_cl.rows());
    const ValueReport v = LyapunovValue(MakeInterconnectState(cl, x), cert, p.plant.sys, p.controller.sys);
    EXPECT_TRUE(v.consistent) << seed;
    const bool has_d = p.plant.sys.d().norm() > 0 || p.controller.sys.d().norm() > 0;
    if (!has_d) EXPECT_NEAR(v.literal, v.quadratic, 1e-10 * std::max(1.0, x.squaredNorm() * cert.q.norm()));
    literal_off += has_d && std::abs(v.literal - v.quadratic) > 1e-6;
  }
  EXPECT_GT(literal_off, 5);
}

TEST(LyapunovValueTest, DimensionMismatch) {
  const WorkedLoop w(0.5);
  InterconnectState s = MakeInterconnectState(w.cl, RealVector::Ones(3));
  s.x1 = RealVector::Ones(3);
  EXPECT_EQ(CodeOf([&] { LyapunovValue(s, w.cert, w.plant, w.controller); }), ErrorCode::kDimension);
}

TEST(LyapunovDerivativeTest, WorkedExamples) {
  const WorkedLoop w(0.5);
  const DerivativeReport zero = LyapunovDerivative(MakeInterconnectState(w.cl, RealVector::Zero(3)), w.cl, w.cert);
  EXPECT_EQ(zero.vdot_quadratic, 0.0);
  EXPECT_EQ(zero.vdot_dissipation, 0.0);
  RealVector x(3);
  x << 1, 0, 0;
  const DerivativeReport d = LyapunovDerivative(MakeInterconnectState(w.cl, x), w.cl, w.cert);
  EXPECT_LE(std::abs(d.vdot_quadratic - d.vdot_dissipation), 1e-9);
  EXPECT_LE(d.vdot_dissipation, 0.0);
  EXPECT_EQ(d.ytilde1.size(), 0);  // lossless plant: L1 has no rows
  EXPECT_LE(w.cert.derivative_identity_residual, 1e-14);
}

TEST(LyapunovDerivativeTest, RequiresCertificates) {
  const ClosedLoop cl = MakeClosedLoop(Oscillator(), Siso(-1, 1, 0.5));
  NICertificate bad;
  EXPECT_EQ(CodeOf([&] { LoopLyapunovCertificate(cl, LmiNiCertificate(Oscillator()), bad); }),
            ErrorCode::kNotCertified);
}

TEST(LyapunovDerivativePropertyTest, IdentityOnRandomLoops) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GeneratedPair p = RandomNiPair(300 + seed);
    const ClosedLoop cl = MakeClosedLoop(p.plant.sys, p.controller.sys);
    const LyapunovCertificate cert = LoopLyapunovCertificate(cl, p.plant.cert, p.controller.cert);
    Rng rng(seed);
    const double scale = cert.q.norm() * cl.a_cl.norm();
    for (int k = 0; k < 1000; ++k) {
      const RealVector x = rng.Vector(cl.a_cl.rows()) * std::exp(rng.Uniform(-3, 3));
      const DerivativeReport d = LyapunovDerivative(MakeInterconnectState(cl, x), cl, cert);
      ASSERT_LE(std::abs(d.vdot_quadratic - d.vdot_dissipation),
                1e-7 * std::max(1.0, x.squaredNorm() * scale))
          << "seed " << seed << " state " << k;
      ASSERT_LE(d.vdot_dissipation, 0.0);
    }
  }
}

TEST(LyapunovDerivativePropertyTest, SignMutationIsCaught) {
  int caught = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GeneratedPair p = RandomNiPair(300 + seed);
    const ClosedLoop cl = MakeClosedLoop(p.plant.sys, p.controller.sys);
    const LyapunovCertificate cert = LoopLyapunovCertificate(cl, p.plant.cert, p.controller.cert);
    const RealVector x = Rng(seed).Vector(cl.a_cl.rows());
    caught += !LyapunovDerivative(MakeInterconnectState(cl, x), cl, cert, true).within_tolerance;
  }
  EXPECT_EQ(caught, 20);
}

// ytilde2 = 0 with the loop constraint forces x2 = u2 = 0: the pencil has
// only the trivial kernel at every grid frequency.
TEST(LyapunovTest, ZeroDissipationForcesControllerStateToZero) {
  const StateSpace h = Siso(-1, 1, 0.5);
  const NICertificate c = LmiNiCertificate(h);
  FrequencyGrid grid{1e-3, 1e3, 400};
  for (double w : grid.Omegas()) {
    ComplexMatrix pencil(2, 2);
    pencil << Complex(-1, -w), 1, c.l(0, 0) * c.p(0, 0), -c.l(0, 0) * 0.5;
    EXPECT_EQ(testing::EliminationRank(pencil, 1e-12), 2) << w;
  }
  EXPECT_TRUE(SniRankCondition(h, c, grid).strict);
}

TEST(DissipationIntegralCheckTest, WorkedExamples) {
  const WorkedLoop w(0.5);
  const SimulationTrace zero = Simulate(w.cl, RealVector::Zero(3), 1.0, 1e-2, SimMethod::kExpmExact, &w.cert);
  const DissipationReport z = DissipationIntegralCheck(zero);
  EXPECT_EQ(z.integral, 0.0);
  EXPECT_TRUE(z.bound_holds);

  RealVector x0(3);
  x0 << 1, 0, 0;
  const DissipationReport coarse =
      DissipationIntegralCheck(Simulate(w.cl, x0, 50.0, 1e-2, SimMethod::kExpmExact, &w.cert));
  EXPECT_NEAR(coarse.v0, 1.0, 1e-12);
  EXPECT_TRUE(coarse.bound_holds);
  EXPECT_TRUE(coarse.monotone);
  EXPECT_LE(coarse.integral, 1.0 + 1e-6);
  // Lossless plant: the integral tends to V(0) - V(inf) = 1.
  EXPECT_NEAR(coarse.integral, 1.0, 1e-6);

  const DissipationReport fine =
      DissipationIntegralCheck(Simulate(w.cl, x0, 50.0, 5e-3, SimMethod::kExpmExact, &w.cert));
  EXPECT_LT(std::abs(fine.integral - coarse.integral), 1e-4);
  EXPECT_LT(std::abs(fine.integral_trapezoid - coarse.integral_trapezoid), 1e-4);
  // The trapezoid converges to the exact increments at second order.
  EXPECT_LT(std::abs(fine.integral_trapezoid - fine.integral),
            0.5 * std::abs(coarse.integral_trapezoid - coarse.integral));
}

TEST(DissipationIntegralCheckTest, UnmonitoredTraceRejected) {
  const WorkedLoop w(0.5);
  const SimulationTrace t = Simulate(w.cl, RealVector::Ones(3), 1.0);
  EXPECT_EQ(CodeOf([&] { DissipationIntegralCheck(t); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace niloop
