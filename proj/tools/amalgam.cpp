// Command-line driver for the check suites.
//
//   amalgam <suite> [--dim M] [--block KxD | --diag D] [--trials T] [--seed S]
//           [--tol E] [--order N] [--ball-fraction F] [--negative-control]
//           [--timing] [--out PATH]
//
// Exit status: 0 all trials pass, 1 any trial fails, 2 usage error.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "amalgam/suite.hpp"

namespace {

constexpr int kExitUsage = 2;

std::pair<std::size_t, std::size_t> parse_block(const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw amalgam::Error(amalgam::ErrorCode::Parse, "--block expects KxD");
  try {
    std::size_t used = 0;
    const auto k = std::stoul(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("k");
    const auto rest = s.substr(x + 1);
    const auto d = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("d");
    return {k, d};
  } catch (const std::logic_error&) {
    throw amalgam::Error(amalgam::ErrorCode::Parse, "--block expects KxD with positive integers");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for operator-valued R- and S-transforms"};
  std::string suite_name;
  std::string block;
  std::string out_path;
  std::size_t dim = 0;
  std::size_t diag = 0;
  double tol = 0.0;
  amalgam::RunConfig cfg;

  app.add_option("suite", suite_name, "domains | rs | dilation | additivity | multiplicativity | lemma31 | all")
      ->required();
  auto* dim_opt = app.add_option("--dim", dim, "ambient matrix dimension M");
  auto* block_opt = app.add_option("--block", block, "B = M_K (x) I_D inside M_{K*D}");
  auto* diag_opt = app.add_option("--diag", diag, "B = diagonal matrices of size D");
  block_opt->excludes(diag_opt);
  app.add_option("--trials", cfg.trials, "number of trials per suite");
  app.add_option("--seed", cfg.seed, "64-bit seed");
  auto* tol_opt = app.add_option("--tol", tol, "residual tolerance (suite default if omitted)");
  app.add_option("--order", cfg.order, "truncation order N");
  app.add_option("--ball-fraction", cfg.ball_fraction, "fraction of the certified radius used for samples");
  app.add_flag("--negative-control", cfg.negative_control, "use correlated pairs in the series suites");
  app.add_flag("--timing", cfg.timing, "record wall time in the report (breaks byte-identical output)");
  app.add_option("--out", out_path, "report path; the report goes to stdout if omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const auto suite = amalgam::parse_suite(suite_name);
    if (!suite) throw amalgam::Error(amalgam::ErrorCode::Parse, "unknown suite '" + suite_name + "'");
    cfg.suite = *suite;
    if (*dim_opt) cfg.dim = dim;
    if (*diag_opt) cfg.diag = diag;
    if (*block_opt) cfg.block = parse_block(block);
    if (*tol_opt) cfg.tol = tol;
    cfg.validate();
    (void)cfg.context();
  } catch (const amalgam::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  amalgam::Json report = amalgam::run_suite(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cfg.timing) report["aggregate"]["wall_time_s"] = wall;

  const std::string text = report.dump(2) + "\n";
  std::ostream& summary = out_path.empty() ? std::cerr : std::cout;
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f || !(f << text)) {
      std::cerr << "cannot write " << out_path << "\n";
      return 1;
    }
  }
  const auto& agg = report["aggregate"];
  char line[256];
  std::snprintf(line, sizeof line, "%s: %zu/%zu trials passed (pass_rate %.3f, max_residual %.3e, wall %.2fs)",
                suite_name.c_str(), agg["passed"].get<std::size_t>(), agg["trials"].get<std::size_t>(),
                agg["pass_rate"].get<double>(), agg["max_residual"].get<double>(), wall);
  summary << line << "\n";
  return agg["passed"] == agg["trials"] ? 0 : 1;
}
