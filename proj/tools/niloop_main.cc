// niloop: certify NI/SNI systems and analyze their positive-feedback loops.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "niloop/error.h"
#include "niloop/report.h"
#include "niloop/selftest.h"

namespace {

using niloop::Error;
using niloop::ErrorCode;
namespace io = niloop::io;

void AddGridAndTolerances(CLI::App* cmd, io::RunOptions* opts) {
  cmd->add_option("--wmin", opts->grid.omega_min, "smallest grid frequency (rad/s)")
      ->capture_default_str();
  cmd->add_option("--wmax", opts->grid.omega_max, "largest grid frequency (rad/s)")
      ->capture_default_str();
  cmd->add_option("--points", opts->grid.points, "number of grid points")
      ->capture_default_str();
  cmd->add_flag_callback(
      "--linear", [opts]() { opts->grid.spacing = niloop::GridSpacing::kLinear; },
      "linear instead of logarithmic spacing");
  cmd->add_option("--exclusion", opts->grid.exclusion_radius,
                  "grid exclusion radius around imaginary-axis poles")
      ->capture_default_str();
  io::Tolerances& t = opts->tolerances;
  cmd->add_option("--tol", t.tol, "general tolerance")->capture_default_str();
  cmd->add_option("--tol-axis", t.tol_axis, "imaginary-axis pole tolerance")
      ->capture_default_str();
  cmd->add_option("--tol-hurwitz", t.tol_hurwitz, "relative Hurwitz band")
      ->capture_default_str();
  cmd->add_option("--tol-int", t.tol_int, "dissipation bound slack")
      ->capture_default_str();
  cmd->add_option("--tol-monotone", t.tol_monotone, "per-step V increase allowed")
      ->capture_default_str();
  cmd->add_option("--max-iter", t.max_iterations, "LMI iteration cap")
      ->capture_default_str();
  cmd->add_flag("--timestamps", opts->timestamps, "add a generation timestamp");
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << text;
}

niloop::RealVector ParseVector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad --x0 entry \"" + item + "\"");
    }
  }
  return Eigen::Map<niloop::RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void PrintSummary(const io::CommandResult& result) {
  for (const std::string& line : result.summary) std::cerr << line << "\n";
}

int Run(int argc, char** argv) {
  CLI::App app{"Negative-imaginary certification and loop stability analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolVersion);

  io::RunOptions opts;
  std::string file, name, plant, controller, out, freq_csv, property = "ni";
  std::string x0_text, method = "expm";
  double t_final = 50.0, dt = niloop::kDefaultDt;
  niloop::SelftestOptions self;

  CLI::App* certify = app.add_subcommand("certify", "certify one system as NI or SNI");
  certify->add_option("file", file, "system file")->required();
  certify->add_option("system", name, "system name")->required();
  certify->add_option("--property", property, "ni or sni")
      ->check(CLI::IsMember({"ni", "sni"}))
      ->capture_default_str();
  certify->add_option("--out", out, "report path (default stdout)");
  certify->add_option("--freq-csv", freq_csv, "write the frequency curve as CSV");
  AddGridAndTolerances(certify, &opts);

  CLI::App* analyze = app.add_subcommand("analyze", "analyze a plant/controller loop");
  analyze->add_option("file", file, "system file")->required();
  analyze->add_option("plant", plant, "plant name")->required();
  analyze->add_option("controller", controller, "controller name")->required();
  analyze->add_option("--out", out, "report path (default stdout)");
  AddGridAndTolerances(analyze, &opts);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate the autonomous loop");
  simulate->add_option("file", file, "system file")->required();
  simulate->add_option("plant", plant, "plant name")->required();
  simulate->add_option("controller", controller, "controller name")->required();
  simulate->add_option("--x0", x0_text, "comma-separated initial state")->required();
  simulate->add_option("--t-final", t_final, "final time")->capture_default_str();
  simulate->add_option("--dt", dt, "time step")->capture_default_str();
  simulate->add_option("--method", method, "expm or rk4")
      ->check(CLI::IsMember({"expm", "rk4"}))
      ->capture_default_str();
  simulate->add_option("--out", out, "trace CSV path (default stdout)");
  AddGridAndTolerances(simulate, &opts);

  CLI::App* selftest = app.add_subcommand("selftest", "run the random property suites");
  selftest->add_option("--seed", self.seed, "random seed")->capture_default_str();
  selftest->add_option("--cases", self.cases, "cases per property")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  selftest->add_flag("--inject-sign-bug", self.inject_sign_bug,
                     "flip the sign of the L C^T u term (mutation check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*selftest) {
      const niloop::SelftestResult result = niloop::RunSelftest(self);
      std::cout << niloop::FormatSelftest(result);
      return result.ok ? 0 : 1;
    }
    const io::SystemFile systems = io::LoadSystemFile(file);
    const io::InputInfo input{file, systems.sha256};
    io::CommandResult result;
    if (*certify) {
      const niloop::StateSpace& sys = io::FindSystem(systems, name);
      result = io::Certify(sys, name, property == "sni" ? io::Property::kSNI : io::Property::kNI,
                           input, opts);
      WriteOutput(out, io::Dump(result.report));
      if (!freq_csv.empty()) WriteOutput(freq_csv, result.csv);
    } else if (*analyze) {
      const niloop::StateSpace& g = io::FindSystem(systems, plant);
      const niloop::StateSpace& h = io::FindSystem(systems, controller);
      result = io::AnalyzeLoop(g, plant, h, controller, input, opts);
      WriteOutput(out, io::Dump(result.report));
    } else {
      const niloop::StateSpace& g = io::FindSystem(systems, plant);
      const niloop::StateSpace& h = io::FindSystem(systems, controller);
      result = io::SimulateLoop(g, h, ParseVector(x0_text), t_final, dt,
                                method == "rk4" ? niloop::SimMethod::kRk4
                                                : niloop::SimMethod::kExpmExact,
                                opts);
      WriteOutput(out, result.csv);
    }
    PrintSummary(result);
    return result.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io::ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return Run(argc, argv); }
