#include "niloop/selftest.h"

#include <sstream>

#include "niloop/certify.h"
#include "niloop/error.h"
#include "niloop/random_system.h"
#include "niloop/sim.h"

namespace niloop {
namespace {

std::uint64_t CaseSeed(std::uint64_t seed, int index) {
  return seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(index) * 7919ULL;
}

void Record(PropertyTally* tally, int index, std::uint64_t case_seed, bool ok,
            const std::string& reason) {
  if (ok) {
    ++tally->passed;
    return;
  }
  ++tally->failed;
  if (tally->first_failure.empty()) {
    std::ostringstream os;
    os << "case " << index << " (seed " << case_seed << "): " << reason;
    tally->first_failure = os.str();
  }
}

// Reports the failing reason, or the empty string on success.
template <typename F>
std::string Guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return e.what();
  }
}

}  // namespace

SelftestResult RunSelftest(const SelftestOptions& opts) {
  SelftestResult result;
  if (opts.cases <= 0) {
    result.warnings.push_back("zero cases requested; every property passes vacuously");
  }
  PropertyTally recover{"lmi_recovers_constructed_ni", 0, 0, ""};
  PropertyTally routes{"certifier_route_agreement", 0, 0, ""};
  PropertyTally gram{"block_gram_dc_gain_equivalence", 0, 0, ""};
  PropertyTally identity{"derivative_identity", 0, 0, ""};
  PropertyTally monotone{"lyapunov_monotone_dissipation", 0, 0, ""};

  for (int i = 0; i < std::max(0, opts.cases); ++i) {
    const std::uint64_t s = CaseSeed(opts.seed, i);

    std::string why = Guarded([&]() -> std::string {
      const int n = 1 + static_cast<int>(s % 5);
      const GeneratedSystem g = RandomNiSystem(s, n, 1 + static_cast<int>(s / 5 % n),
                                               (i % 2) == 1);
      const NICertificate cert = LmiNiCertificate(g.sys);
      if (cert.verdict != CertVerdict::kCertified) {
        return std::string("verdict ") + ToString(cert.verdict);
      }
      const CertificateResiduals r = ComputeResiduals(g.sys, cert.y, cert.l);
      return ResidualsAcceptable(g.sys, cert.y, r) ? "" : "residuals out of tolerance";
    });
    Record(&recover, i, s, why.empty(), why);

    why = Guarded([&]() -> std::string {
      const RouteComparison cmp = CompareRoutes(RandomSuiteSystem(opts.seed, i));
      if (cmp.agree) return "";
      return std::string("frequency ") + ToString(cmp.frequency_answer) +
             ", positive-real " + ToString(cmp.positive_real_answer) + ", lmi " +
             ToString(cmp.lmi_answer);
    });
    Record(&routes, i, s, why.empty(), why);

    const GeneratedPair pair = RandomNiPair(s);
    why = Guarded([&]() -> std::string {
      const GramDcGainReport rep = GramDcGainEquivalence(pair.plant.sys, pair.controller.sys,
                                                 pair.plant.cert.p,
                                                 pair.controller.cert.p);
      if (rep.agree || rep.borderline) return "";
      std::ostringstream os;
      os << "min eig Q " << rep.min_eig_q << " vs lambda_max " << rep.lambda_max;
      return os.str();
    });
    Record(&gram, i, s, why.empty(), why);

    why = Guarded([&]() -> std::string {
      const ClosedLoop cl = MakeClosedLoop(pair.plant.sys, pair.controller.sys);
      const LyapunovCertificate cert =
          LoopLyapunovCertificate(cl, pair.plant.cert, pair.controller.cert);
      for (int k = 0; k < 20; ++k) {
        const RealVector x = RandomGaussianVector(s + 31 * k + 1, cl.a_cl.rows());
        const DerivativeReport d = LyapunovDerivative(MakeInterconnectState(cl, x), cl,
                                                      cert, opts.inject_sign_bug);
        if (!d.within_tolerance) {
          std::ostringstream os;
          os << "state " << k << ": residual " << d.residual;
          return os.str();
        }
      }
      return "";
    });
    Record(&identity, i, s, why.empty(), why);

    why = Guarded([&]() -> std::string {
      const ClosedLoop cl = MakeClosedLoop(pair.plant.sys, pair.controller.sys);
      if (!DcGainCondition(pair.plant.sys, pair.controller.sys).holds) return "";
      const LyapunovCertificate cert =
          LoopLyapunovCertificate(cl, pair.plant.cert, pair.controller.cert);
      const RealVector x0 = RandomGaussianVector(s + 17, cl.a_cl.rows());
      const SimulationTrace trace =
          Simulate(cl, x0, 10.0, kDefaultDt, SimMethod::kExpmExact, &cert);
      const DissipationReport rep = DissipationIntegralCheck(trace);
      if (!rep.monotone) return "V increased by " + std::to_string(rep.worst_increase);
      if (!rep.bound_holds) return "dissipation exceeded V(0) by " +
                                   std::to_string(rep.worst_excess);
      return "";
    });
    Record(&monotone, i, s, why.empty(), why);
  }

  result.properties = {recover, routes, gram, identity, monotone};
  for (const PropertyTally& t : result.properties) result.ok &= t.failed == 0;
  return result;
}

std::string FormatSelftest(const SelftestResult& result) {
  std::ostringstream os;
  for (const PropertyTally& t : result.properties) {
    os << (t.failed == 0 ? "PASS " : "FAIL ") << t.name << ": " << t.passed
       << " passed, " << t.failed << " failed";
    if (!t.first_failure.empty()) os << "; first failure " << t.first_failure;
    os << "\n";
  }
  for (const std::string& w : result.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace niloop
