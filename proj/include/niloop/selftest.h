#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace niloop {

struct SelftestOptions {
  std::uint64_t seed = 1;
  int cases = 50;
  /// Flips the sign of the L C^T u term in ytilde (mutation check).
  bool inject_sign_bug = false;
};

struct PropertyTally {
  std::string name;
  int passed = 0;
  int failed = 0;
  /// "case <i> (seed <s>): <reason>" for the first failure.
  std::string first_failure;
};

struct SelftestResult {
  std::vector<PropertyTally> properties;
  std::vector<std::string> warnings;
  bool ok = true;
};

/// Random property suites over certified systems and loops, deterministic in
/// the seed.
SelftestResult RunSelftest(const SelftestOptions& opts);

/// One line per property plus warnings.
std::string FormatSelftest(const SelftestResult& result);

}  // namespace niloop
