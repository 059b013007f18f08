#include "niloop/report.h"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "niloop/error.h"

namespace niloop::io {
namespace {

Json ComplexListToJson(const std::vector<Complex>& values) {
  Json out = Json::array();
  for (const Complex& z : values) out.push_back(Json::array({z.real(), z.imag()}));
  return out;
}

Json SystemToJson(const StateSpace& sys, const std::string& name) {
  Json j;
  j["name"] = name;
  j["label"] = sys.label();
  j["A"] = MatrixToJson(sys.a());
  j["B"] = MatrixToJson(sys.b());
  j["C"] = MatrixToJson(sys.c());
  j["D"] = MatrixToJson(sys.d());
  return j;
}

Json GridToJson(const FrequencyGrid& grid) {
  Json j;
  j["omega_min"] = grid.omega_min;
  j["omega_max"] = grid.omega_max;
  j["points"] = grid.points;
  j["spacing"] = grid.spacing == GridSpacing::kLinear ? "linear" : "logarithmic";
  j["exclusion_radius"] = grid.exclusion_radius;
  return j;
}

Json TolerancesToJson(const Tolerances& t) {
  Json j;
  j["tol"] = t.tol;
  j["tol_axis"] = t.tol_axis;
  j["tol_hurwitz"] = t.tol_hurwitz;
  j["tol_int"] = t.tol_int;
  j["tol_monotone"] = t.tol_monotone;
  j["max_iterations"] = t.max_iterations;
  return j;
}

Json ResidueToJson(const ResidueReport& r) {
  Json j;
  j["omega0"] = r.omega0;
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index i = 0; i < r.k0.rows(); ++i) {
    Json row_re = Json::array();
    Json row_im = Json::array();
    for (Eigen::Index k = 0; k < r.k0.cols(); ++k) {
      row_re.push_back(r.k0(i, k).real());
      row_im.push_back(r.k0(i, k).imag());
    }
    re.push_back(row_re);
    im.push_back(row_im);
  }
  j["k0_real"] = re;
  j["k0_imag"] = im;
  j["is_simple"] = r.is_simple;
  j["hermitian_residual"] = r.hermitian_residual;
  j["min_eig"] = r.min_eig;
  j["accepted"] = r.accepted;
  return j;
}

Json FrequencyToJson(const FrequencyReport& r) {
  Json j;
  j["verdict"] = ToString(r.verdict);
  j["worst_value"] = r.worst_value;
  j["worst_omega"] = r.worst_omega;
  j["evaluated_points"] = r.evaluated_points;
  j["origin_pole"] = r.origin_pole;
  j["rhp_pole"] = r.rhp_pole;
  j["d_symmetric"] = r.d_symmetric;
  j["minimal"] = r.minimal;
  Json poles = Json::array();
  for (const ResidueReport& p : r.pole_findings) poles.push_back(ResidueToJson(p));
  j["axis_poles"] = poles;
  j["reasons"] = r.reasons;
  return j;
}

Json PositiveRealToJson(const RouteComparison& routes) {
  Json j;
  if (!routes.positive_real) {
    j["pass"] = false;
    j["error"] = routes.positive_real_error;
    return j;
  }
  const PositiveRealReport& r = *routes.positive_real;
  j["pass"] = r.pass;
  j["poles_ok"] = r.poles_ok;
  j["residues_ok"] = r.residues_ok;
  j["d_symmetric"] = r.d_symmetric;
  j["worst_value"] = r.worst_value;
  j["worst_omega"] = r.worst_omega;
  j["evaluated_points"] = r.evaluated_points;
  j["reasons"] = r.reasons;
  return j;
}

Json RankToJson(const SniCertification& sni) {
  Json j;
  j["certified"] = sni.certified;
  j["hurwitz"] = sni.hurwitz;
  j["rank_condition_min_sv"] = sni.rank.min_sv;
  j["rank_condition_omega"] = sni.rank.omega_at_min;
  j["rank_condition_strict"] = sni.rank.strict;
  return j;
}

Json HeaderJson(const char* command, const InputInfo& input,
                const RunOptions& opts) {
  Json j;
  j["tool"] = "niloop";
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  if (opts.timestamps) {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["generated_at"] = buf;
  }
  Json in;
  in["file"] = input.file;
  in["sha256"] = input.sha256;
  j["input"] = in;
  j["tolerances"] = TolerancesToJson(opts.tolerances);
  j["grid"] = GridToJson(opts.grid);
  return j;
}

Json& RequireField(Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kParse, where + " is missing \"" + key + "\"");
  }
  return j[key];
}

std::string FrequencyCsv(const FrequencyReport& r) {
  std::string out = "omega,min_eig,normalized,excluded\n";
  char buf[96];
  for (const FrequencySample& s : r.per_point) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%d\n", s.omega, s.min_eig,
                  s.normalized, s.excluded ? 1 : 0);
    out += buf;
  }
  return out;
}

const std::vector<std::string>& NotationWarnings() {
  static const std::vector<std::string> warnings = {
      "LMI certificates use A Y + Y A^T = -L^T L with Y = P^{-1}; the "
      "'+L^T L' reading contradicts A P^{-1} + P^{-1} A^T <= 0",
      "the loop hypothesis N(inf) >= 0 is read as H(inf) = D2 >= 0"};
  return warnings;
}

}  // namespace

LmiOptions RunOptions::Lmi() const {
  LmiOptions lmi;
  lmi.tol = tolerances.tol;
  lmi.max_iterations = tolerances.max_iterations;
  return lmi;
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Json MatrixToJson(const RealMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

RealMatrix MatrixFromJson(const Json& j, const std::string& name) {
  if (!j.is_array()) throw Error(ErrorCode::kParse, name + " is not an array");
  if (j.empty()) return RealMatrix(0, 0);
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  RealMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != cols) {
      throw Error(ErrorCode::kParse,
                  name + " row " + std::to_string(i) + " has the wrong length");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) {
        throw Error(ErrorCode::kParse, name + " has a non-numeric entry at (" +
                                           std::to_string(i) + "," +
                                           std::to_string(k) + ")");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          row[k].get<double>();
    }
  }
  return m;
}

SystemFile ParseSystemFile(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::ostringstream os;
    os << "malformed JSON at byte offset " << e.byte << ": " << e.what();
    throw Error(ErrorCode::kParse, os.str());
  }
  if (!root.is_object()) throw Error(ErrorCode::kParse, "top level is not an object");
  SystemFile file;
  file.sha256 = Sha256Hex(text);
  const Json& version = RequireField(root, "schema_version", "system file");
  if (!version.is_string() || version.get<std::string>() != kSchemaVersion) {
    throw Error(ErrorCode::kParse, "unsupported schema_version " + version.dump() +
                                       " (expected \"1\")");
  }
  file.schema_version = version.get<std::string>();
  Json& systems = RequireField(root, "systems", "system file");
  if (!systems.is_object()) throw Error(ErrorCode::kParse, "\"systems\" is not an object");
  for (auto it = systems.begin(); it != systems.end(); ++it) {
    const std::string where = "system \"" + it.key() + "\"";
    Json& entry = it.value();
    RealMatrix a = MatrixFromJson(RequireField(entry, "A", where), where + " A");
    RealMatrix b = MatrixFromJson(RequireField(entry, "B", where), where + " B");
    RealMatrix c = MatrixFromJson(RequireField(entry, "C", where), where + " C");
    RealMatrix d = MatrixFromJson(RequireField(entry, "D", where), where + " D");
    std::string label = it.key();
    if (entry.contains("label")) {
      if (!entry["label"].is_string()) {
        throw Error(ErrorCode::kParse, where + " label is not a string");
      }
      label = entry["label"].get<std::string>();
    }
    file.systems.emplace(it.key(), StateSpace(std::move(a), std::move(b), std::move(c),
                                              std::move(d), std::move(label)));
  }
  return file;
}

SystemFile LoadSystemFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot read " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return ParseSystemFile(text);
}

const StateSpace& FindSystem(const SystemFile& file, const std::string& name) {
  const auto it = file.systems.find(name);
  if (it == file.systems.end()) {
    throw Error(ErrorCode::kNotFound, "no system named \"" + name + "\"");
  }
  return it->second;
}

Json CertificateToJson(const NICertificate& cert) {
  Json j;
  j["verdict"] = ToString(cert.verdict);
  j["detail"] = cert.detail;
  j["iterations"] = cert.iterations;
  j["final_gap"] = cert.final_gap;
  if (cert.verdict == CertVerdict::kCertified) {
    j["P"] = MatrixToJson(cert.p);
    j["Y"] = MatrixToJson(cert.y);
    j["L"] = MatrixToJson(cert.l);
    Json r;
    r["lyap_residual"] = cert.lyap_residual;
    r["coupling_residual"] = cert.coupling_residual;
    r["factor_residual"] = cert.factor_residual;
    r["cb_identity_residual"] = cert.cb_identity_residual;
    j["residuals"] = r;
    j["strict"] = cert.strict;
    j["rank_condition_min_sv"] = cert.rank_condition_min_sv;
  } else if (cert.witness.size() > 0) {
    j["witness"] = MatrixToJson(cert.witness);
  }
  return j;
}

CommandResult Certify(const StateSpace& sys, const std::string& name,
                      Property property, const InputInfo& input,
                      const RunOptions& opts) {
  opts.grid.Validate();
  const Tolerances& t = opts.tolerances;
  const RouteComparison routes =
      CompareRoutes(sys, opts.grid, opts.Lmi(), t.tol, t.tol_axis);

  CommandResult result;
  Json& j = result.report;
  j = HeaderJson("certify", input, opts);
  j["property"] = property == Property::kSNI ? "sni" : "ni";
  j["system"] = SystemToJson(sys, name);
  j["frequency"] = FrequencyToJson(routes.frequency);
  j["positive_real"] = PositiveRealToJson(routes);
  if (routes.lmi) {
    j["lmi"] = CertificateToJson(*routes.lmi);
  } else {
    j["lmi"] = Json{{"verdict", "Error"}, {"error", routes.lmi_error}};
  }

  bool certified = routes.lmi_answer == RouteAnswer::kYes;
  if (property == Property::kSNI) {
    const FrequencyReport sni_freq =
        FreqSniTest(sys, opts.grid, t.tol, t.tol_axis);
    j["frequency_sni"] = FrequencyToJson(sni_freq);
    if (routes.lmi && certified) {
      NICertificate cert = *routes.lmi;
      SniCertification sni;
      sni.rank = SniRankCondition(sys, cert, opts.grid, t.tol);
      sni.hurwitz = matops::SpectralAbscissa(Poles(sys)) <
                    -t.tol_axis * matops::Scale(sys.a());
      sni.certified = sni.rank.strict && sni.hurwitz;
      cert.rank_condition_min_sv = sni.rank.min_sv;
      cert.strict = sni.certified;
      sni.cert = cert;
      j["lmi"] = CertificateToJson(cert);
      j["sni"] = RankToJson(sni);
      certified = sni.certified;
    }
  }

  Json agreement;
  agreement["frequency"] = ToString(routes.frequency_answer);
  agreement["positive_real"] = ToString(routes.positive_real_answer);
  agreement["lmi"] = ToString(routes.lmi_answer);
  agreement["agree"] = routes.agree;
  j["route_agreement"] = agreement;

  const bool negative = routes.frequency_answer == RouteAnswer::kNo ||
                        routes.positive_real_answer == RouteAnswer::kNo ||
                        routes.lmi_answer == RouteAnswer::kNo;
  std::string verdict;
  if (certified) {
    verdict = property == Property::kSNI ? "SNI" : "NI";
  } else if (property == Property::kSNI && routes.lmi_answer == RouteAnswer::kYes) {
    verdict = "NotSNI";
  } else {
    verdict = negative ? "NotNI" : "Inconclusive";
  }
  j["verdict"] = verdict;
  j["certified"] = certified;

  Json warnings = Json::array();
  warnings.push_back(NotationWarnings()[0]);
  if (!routes.agree) warnings.push_back("certification routes disagree");
  if (!routes.frequency.minimal) warnings.push_back("realization is not minimal");
  j["warnings"] = warnings;

  result.exit_code = certified ? 0 : 1;
  result.csv = FrequencyCsv(routes.frequency);
  std::ostringstream os;
  os.precision(6);
  os << name << ": " << verdict << " (worst grid eigenvalue "
     << routes.frequency.worst_value << " at omega " << routes.frequency.worst_omega
     << ")";
  result.summary.push_back(os.str());
  return result;
}

CommandResult AnalyzeLoop(const StateSpace& plant, const std::string& plant_name,
                          const StateSpace& controller,
                          const std::string& controller_name,
                          const InputInfo& input, const RunOptions& opts) {
  opts.grid.Validate();
  const Tolerances& t = opts.tolerances;
  AnalyzeOptions ao;
  ao.grid = opts.grid;
  ao.lmi = opts.Lmi();
  ao.tol = t.tol;
  ao.hurwitz_tol = t.tol_hurwitz;
  const Analysis an = Analyze(plant, controller, ao);

  CommandResult result;
  Json& j = result.report;
  j = HeaderJson("analyze", input, opts);
  j["plant"] = SystemToJson(plant, plant_name);
  j["controller"] = SystemToJson(controller, controller_name);
  if (an.plant_cert) j["plant_certificate"] = CertificateToJson(*an.plant_cert);
  if (an.controller_cert) {
    j["controller_certificate"] = CertificateToJson(an.controller_cert->cert);
    j["controller_sni"] = RankToJson(*an.controller_cert);
  }

  Json hyps = Json::array();
  for (const HypothesisCheck& h : an.hypotheses) {
    hyps.push_back(Json{{"name", h.name}, {"holds", h.holds}, {"detail", h.detail}});
  }
  Json inter;
  inter["hypotheses"] = hyps;
  if (an.dc_gain) {
    inter["lambda_max"] = an.dc_gain->lambda_max;
    inter["dc_product_eigenvalues"] = ComplexListToJson(an.dc_gain->eigenvalues);
  } else {
    inter["lambda_max"] = nullptr;
  }
  if (an.closed_loop) {
    inter["well_posed"] = true;
    inter["feedthrough_product_norm"] = an.closed_loop->dd_product_norm;
    inter["closed_loop_matrix"] = MatrixToJson(an.closed_loop->a_cl);
    inter["spectrum"] = ComplexListToJson(an.closed_loop->eigenvalues);
    inter["spectral_abscissa"] = matops::SpectralAbscissa(an.closed_loop->eigenvalues);
  } else {
    inter["well_posed"] = false;
  }
  inter["hurwitz"] = an.verdict.hurwitz;
  inter["stability_margin"] = an.verdict.margin;
  inter["verdict"] = ToString(an.verdict.kind);
  inter["violated_hypotheses"] = an.verdict.violated_hypotheses;
  j["interconnection"] = inter;

  Json lyap;
  const bool have_certs = an.closed_loop && an.plant_cert && an.controller_cert &&
                          an.plant_cert->verdict == CertVerdict::kCertified &&
                          an.controller_cert->cert.verdict == CertVerdict::kCertified;
  lyap["available"] = have_certs;
  if (have_certs) {
    const LyapunovCertificate cert = LoopLyapunovCertificate(
        *an.closed_loop, *an.plant_cert, an.controller_cert->cert, t.tol);
    lyap["Q"] = MatrixToJson(cert.q);
    lyap["min_eig_q"] = cert.min_eig_q;
    lyap["derivative_identity_residual"] = cert.derivative_identity_residual;
    if (an.dc_gain) {
      const bool q_positive = cert.min_eig_q > t.tol;
      lyap["q_positive_agrees_with_dc_gain"] = q_positive == an.dc_gain->holds;
    }
  }
  j["lyapunov"] = lyap;

  Json warnings = Json::array();
  for (const std::string& w : an.warnings) warnings.push_back(w);
  j["warnings"] = warnings;
  j["verdict"] = ToString(an.verdict.kind);

  result.exit_code = an.verdict.kind == StabilityKind::kInternallyStable ? 0 : 1;
  std::ostringstream os;
  os << plant_name << " + " << controller_name << ": " << ToString(an.verdict.kind);
  for (const std::string& v : an.verdict.violated_hypotheses) os << " [" << v << " failed]";
  result.summary.push_back(os.str());
  return result;
}

CommandResult SimulateLoop(const StateSpace& plant, const StateSpace& controller,
                           const RealVector& x0, double t_final, double dt,
                           SimMethod method, const RunOptions& opts) {
  const Tolerances& t = opts.tolerances;
  AnalyzeOptions ao;
  ao.grid = opts.grid;
  ao.lmi = opts.Lmi();
  ao.tol = t.tol;
  ao.hurwitz_tol = t.tol_hurwitz;
  const Analysis an = Analyze(plant, controller, ao);
  CommandResult result;
  if (!an.closed_loop) {
    throw Error(ErrorCode::kFeedthroughHypothesis, "the loop is not well posed");
  }
  for (const std::string& v : an.verdict.violated_hypotheses) {
    result.summary.push_back("warning: hypothesis " + v + " does not hold");
  }
  std::optional<LyapunovCertificate> cert;
  if (an.plant_cert && an.controller_cert &&
      an.plant_cert->verdict == CertVerdict::kCertified &&
      an.controller_cert->cert.verdict == CertVerdict::kCertified) {
    cert = LoopLyapunovCertificate(*an.closed_loop, *an.plant_cert,
                                   an.controller_cert->cert, t.tol);
  }
  const SimulationTrace trace = Simulate(*an.closed_loop, x0, t_final, dt, method,
                                         cert ? &*cert : nullptr);
  result.csv = TraceToCsv(trace);

  bool ok = true;
  std::ostringstream os;
  os.precision(6);
  os << "steps " << trace.times.size() - 1 << ", dt " << dt << ", method "
     << ToString(method) << ", verdict " << ToString(an.verdict.kind);
  result.summary.push_back(os.str());
  if (cert) {
    const DissipationReport rep = DissipationIntegralCheck(trace, t.tol_int, t.tol_monotone);
    std::ostringstream mono;
    mono.precision(6);
    mono << "lyapunov monotone: " << (rep.monotone ? "pass" : "FAIL")
         << " (worst step increase " << rep.worst_increase << ")";
    std::ostringstream diss;
    diss.precision(10);
    diss << "dissipation bound: " << (rep.bound_holds ? "pass" : "FAIL")
         << " (integral " << rep.integral << " <= V(0) " << rep.v0 << ")";
    result.summary.push_back(mono.str());
    result.summary.push_back(diss.str());
    // The dissipation argument only applies when the loop hypotheses hold.
    if (an.verdict.violated_hypotheses.empty()) ok = ok && rep.monotone && rep.bound_holds;
  } else {
    result.summary.push_back("no loop certificates; V not monitored");
  }
  result.exit_code = ok ? 0 : 1;
  return result;
}

std::string Dump(const Json& report) { return report.dump(2) + "\n"; }

int ExitCodeFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kParse:
    case ErrorCode::kNonFinite:
      return 2;
    case ErrorCode::kDimension:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNotFound:
      return 3;
    default:
      return 1;
  }
}

}  // namespace niloop::io
