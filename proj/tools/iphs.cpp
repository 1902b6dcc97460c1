// iphs: simulate and audit irreversible port-Hamiltonian models.
//
//   iphs run    --config cfg.json [--out-csv traj.csv] [--out-report report.txt] [--tol 1e-10]
//   iphs check  --config cfg.json [--samples 1000] [--seed 1] [--tol 1e-10]
//   iphs report traj.csv [--out-report report.txt] [--tol 1e-10]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "iphs/cli/commands.hpp"
#include "iphs/cli/config.hpp"

int main(int argc, char** argv) {
  using namespace iphs::cli;

  CLI::App app{"Irreversible port-Hamiltonian simulation and balance audits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_csv;
  std::string out_report;
  std::string in_csv;
  std::optional<double> tol;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;

  auto* run_cmd = app.add_subcommand("run", "simulate a configuration and write CSV + balance report");
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  run_cmd->add_option("--out-csv", out_csv, "trajectory CSV path (default: stdout)");
  run_cmd->add_option("--out-report", out_report, "balance report path (default: stderr)");
  run_cmd->add_option("--tol", tol, "balance tolerance (relative)")->check(CLI::PositiveNumber);

  auto* check_cmd = app.add_subcommand("check", "audit structural invariants at random admissible states");
  check_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  check_cmd->add_option("--samples", samples, "number of random draws")->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", seed, "random seed");
  check_cmd->add_option("--tol", tol, "balance tolerance (relative)")->check(CLI::PositiveNumber);

  auto* report_cmd = app.add_subcommand("report", "re-summarize a stored trajectory CSV");
  report_cmd->add_option("csv", in_csv, "trajectory CSV written by 'run'")->required();
  report_cmd->add_option("--out-report", out_report, "report path (default: stdout)");
  report_cmd->add_option("--tol", tol, "balance tolerance (relative)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (report_cmd->parsed()) {
    std::ifstream in(in_csv);
    if (!in) {
      std::cerr << "iphs report: cannot open '" << in_csv << "'\n";
      return kConfigError;
    }
    if (out_report.empty()) return report(in, tol.value_or(iphs::kDefaultBalanceTolerance), std::cout, std::cerr);
    std::ofstream out(out_report);
    if (!out) {
      std::cerr << "iphs report: cannot write '" << out_report << "'\n";
      return kConfigError;
    }
    return report(in, tol.value_or(iphs::kDefaultBalanceTolerance), out, std::cerr);
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "iphs: " << e.what() << '\n';
    return kConfigError;
  }
  if (tol) cfg.tol_balance = *tol;

  if (check_cmd->parsed()) return check(cfg, samples, seed, std::cout, std::cerr);

  if (!out_csv.empty()) cfg.out_csv = out_csv;
  if (!out_report.empty()) cfg.out_report = out_report;
  return run(cfg, std::cout, std::cerr);
}
