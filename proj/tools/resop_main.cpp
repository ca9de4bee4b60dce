/// @file resop_main.cpp
/// @brief `resop` command line: estimate | solve | verify | simulate.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "resop/cli.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::string cell;
  std::stringstream ss(csv);
  while (std::getline(ss, cell, ','))
    out.push_back(resop::parse_double(cell, "list option"));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reservoir discharge policy toolkit: regime estimation, optimality-system "
               "solve, exact-solution verification, and Monte Carlo simulation"};
  app.require_subcommand(1);

  resop::GlobalOptions global;
  std::uint64_t seed_opt = 0;
  bool seed_given = false;
  app.add_option("--output-dir", global.output_dir, "Directory for output artifacts")
      ->capture_default_str();
  app.add_option("--seed", seed_opt, "Override the random seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  app.add_flag("--quiet", global.quiet, "Suppress console summaries");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the inflow regime model from an "
                                             "hourly discharge CSV");
  std::string inflow_csv;
  resop::EstimateOptions eopt;
  std::string edges_csv, reps_csv;
  est->add_option("--input", inflow_csv, "CSV with columns timestamp,discharge_m3s")
      ->required();
  est->add_option("--bin-width", eopt.bin_width, "Uniform bin width (m^3/s)")
      ->capture_default_str();
  est->add_option("--num-regimes", eopt.num_regimes, "Number of regimes")
      ->capture_default_str();
  est->add_option("--bin-edges", edges_csv,
                  "Explicit finite bin edges, comma separated (overrides width/count)");
  est->add_option("--representatives", reps_csv,
                  "Explicit representative discharges, comma separated");
  est->add_option("--lag", eopt.lag_hours, "Record spacing in hours")->capture_default_str();

  // solve
  auto* sol = app.add_subcommand("solve", "Solve the optimality system and extract the "
                                          "discharge policy");
  std::string solve_config;
  bool normalize_output = false;
  sol->add_option("--config", solve_config, "Run configuration JSON")->required();
  sol->add_flag("--normalize-output", normalize_output,
                "Write the value table divided by y/delta");

  // verify
  auto* ver = app.add_subcommand("verify", "Residual check and grid-refinement study "
                                           "against the closed-form steady solution");
  std::string verify_config;
  ver->add_option("--config", verify_config, "Run configuration JSON")->required();

  // simulate
  auto* simc = app.add_subcommand("simulate", "Monte Carlo simulation under a policy CSV");
  std::string sim_config, policy_csv;
  simc->add_option("--config", sim_config, "Run configuration JSON")->required();
  simc->add_option("--policy", policy_csv, "Policy CSV from the solve command")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (seed_given) global.seed = seed_opt;

  try {
    if (est->parsed()) {
      if (!edges_csv.empty()) eopt.bin_edges = parse_double_list(edges_csv);
      if (!reps_csv.empty()) eopt.representatives = parse_double_list(reps_csv);
      return resop::cmd_estimate(inflow_csv, eopt, global);
    }
    if (sol->parsed()) return resop::cmd_solve(solve_config, normalize_output, global);
    if (ver->parsed()) return resop::cmd_verify(verify_config, global);
    if (simc->parsed()) return resop::cmd_simulate(sim_config, policy_csv, global);
  } catch (const resop::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const resop::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
