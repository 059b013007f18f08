#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "niloop/certify.h"
#include "niloop/error.h"
#include "niloop/sim.h"

namespace niloop::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "1";

struct SystemFile {
  std::string schema_version;
  std::map<std::string, StateSpace> systems;
  /// Hex SHA-256 of the raw file bytes.
  std::string sha256;
};

/// Parses {"schema_version": "1", "systems": {name: {"A", "B", "C", "D",
/// "label"}}} with row-major nested arrays. Throws kParse (with the byte
/// offset for malformed JSON, or naming the offending field), kNonFinite and
/// kDimension.
SystemFile ParseSystemFile(std::string_view text);

/// Throws kParse when the file can't be read.
SystemFile LoadSystemFile(const std::string& path);

/// Throws kNotFound.
const StateSpace& FindSystem(const SystemFile& file, const std::string& name);

std::string Sha256Hex(std::string_view bytes);

Json MatrixToJson(const RealMatrix& m);
/// Throws kParse on anything but a rectangular array of numbers. An empty
/// array gives a 0 x 0 matrix.
RealMatrix MatrixFromJson(const Json& j, const std::string& name);

struct Tolerances {
  double tol = kDefaultTol;
  double tol_axis = kDefaultTolAxis;
  double tol_hurwitz = 1e-8;
  double tol_int = 1e-6;
  double tol_monotone = 1e-8;
  int max_iterations = 5000;
};

struct RunOptions {
  FrequencyGrid grid;
  Tolerances tolerances;
  bool timestamps = false;

  LmiOptions Lmi() const;
};

struct CommandResult {
  Json report;
  int exit_code = 0;
  /// Frequency curve (certify) or trace (simulate) as CSV.
  std::string csv;
  /// Human-readable lines for stderr.
  std::vector<std::string> summary;
};

enum class Property { kNI, kSNI };

struct InputInfo {
  std::string file;
  std::string sha256;
};

/// Exit 0 iff the requested property is certified by the LMI route (plus the
/// rank condition and Hurwitz test for SNI).
CommandResult Certify(const StateSpace& sys, const std::string& name,
                      Property property, const InputInfo& input,
                      const RunOptions& opts);

/// Exit 0 iff the loop is InternallyStable.
CommandResult AnalyzeLoop(const StateSpace& plant, const std::string& plant_name,
                          const StateSpace& controller,
                          const std::string& controller_name,
                          const InputInfo& input, const RunOptions& opts);

/// Warns but proceeds when loop hypotheses fail. Exit 1 only when the loop
/// hypotheses hold and the monotonicity or dissipation check fails.
CommandResult SimulateLoop(const StateSpace& plant, const StateSpace& controller,
                           const RealVector& x0, double t_final, double dt,
                           SimMethod method, const RunOptions& opts);

/// Serialized report: two-space indent, trailing newline.
std::string Dump(const Json& report);

/// Maps library errors onto the CLI exit codes: 2 for input parse problems,
/// 3 for usage and dimension problems, 1 otherwise.
int ExitCodeFor(const Error& e);

Json CertificateToJson(const NICertificate& cert);

}  // namespace niloop::io
