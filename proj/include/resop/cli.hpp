#pragma once

/// @file cli.hpp
/// @brief JSON run configuration and the four command entry points
///        (estimate | solve | verify | simulate).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "resop/costs.hpp"
#include "resop/errors.hpp"
#include "resop/exact.hpp"
#include "resop/io.hpp"
#include "resop/regime.hpp"
#include "resop/scheme.hpp"
#include "resop/sim.hpp"
#include "resop/solver.hpp"

namespace resop {

struct SimulateBlock {
  double v0 = 0.5;  ///< in the spec's volume units (vbar-relative fraction in JSON)
  int i0 = 0;
  long n_paths = 1000;
  double horizon = 125.0;  ///< days
  std::optional<double> dt_sim;
  std::uint64_t seed = 1;
};

/// A fully resolved run: the regime model, the cost spec in normalized
/// volume units, the solver settings (with unit factors applied), and the
/// simulation block.
struct RunConfig {
  RegimeModel model;
  CostSpec spec;
  SolveConfig solve;
  std::vector<int> verify_grids{50, 100, 200, 400, 800};
  SimulateBlock sim;
};

namespace cli_detail {

inline std::vector<double> number_or_array(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return {j.get<double>()};
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open: " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(path.string() + ": " + e.what());
  }
}

}  // namespace cli_detail

/// Parses the run-configuration JSON (schema documented in the README).
/// Volumes are normalized internally: the band is given as fractions of the
/// capacity, and in physical mode the drift factor 86400/vbar_m3 converts
/// discharges (m^3/s) into normalized volume per day. Switching rates are
/// always per hour in the model file and scaled by 24 to match day-based
/// time.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  const nlohmann::json j = cli_detail::load_json(path);
  RunConfig cfg;
  try {
    if (j.contains("model_file")) {
      const std::filesystem::path mpath = j.at("model_file").get<std::string>();
      cfg.model = read_model_json(mpath.is_absolute() ? mpath : path.parent_path() / mpath);
    } else if (j.contains("model")) {
      cfg.model = model_from_json(j.at("model"));
    } else {
      throw config_error("config: one of 'model' or 'model_file' is required");
    }

    const nlohmann::json& dom = j.at("domain");
    const bool normalized = dom.value("normalized", true);
    double vbar_m3 = 1.0;
    if (normalized) {
      cfg.spec.vbar = dom.value("vbar", 1.0);
      cfg.solve.drift_factor = 1.0;
      cfg.solve.rate_scale = dom.value("rate_scale_per_day", 24.0);
    } else {
      vbar_m3 = dom.at("vbar_m3").get<double>();
      if (!(vbar_m3 > 0.0)) throw config_error("config: vbar_m3 must be > 0");
      cfg.spec.vbar = 1.0;
      cfg.solve.drift_factor = 86400.0 / vbar_m3;
      cfg.solve.rate_scale = 24.0;
    }

    const nlohmann::json& costs = j.at("costs");
    cfg.spec.m_exp = costs.value("m", 1.0);
    cfg.spec.n_exp = costs.value("n", 1.0);
    cfg.spec.w = costs.at("w").get<double>();
    cfg.spec.y = costs.at("y").get<double>();
    cfg.spec.delta = costs.at("delta_per_day").get<double>();
    cfg.spec.q_min = costs.value("q_min_m3s", 0.0);
    cfg.spec.q_max = costs.at("q_max_m3s").get<double>();
    cfg.spec.target = costs.contains("target_m3s")
                          ? cli_detail::number_or_array(costs.at("target_m3s"))
                          : cfg.model.representatives;
    cfg.spec.threshold = costs.contains("threshold_m3s")
                             ? cli_detail::number_or_array(costs.at("threshold_m3s"))
                             : cfg.model.representatives;
    if (costs.contains("high_flow")) {
      HighFlowPenalty hf;
      hf.weight = costs.at("high_flow").at("weight").get<double>();
      hf.threshold = costs.at("high_flow").at("threshold_m3s").get<double>();
      cfg.spec.high_flow = hf;
    }
    if (costs.contains("band_schedule")) {
      BandSchedule sched;
      sched.times.clear();
      for (const auto& entry : costs.at("band_schedule")) {
        sched.times.push_back(entry.at("t_day").get<double>());
        sched.a.push_back(entry.at("a_frac").get<double>() * cfg.spec.vbar);
        sched.b.push_back(entry.at("b_frac").get<double>() * cfg.spec.vbar);
      }
      cfg.spec.band = sched;
    } else {
      const nlohmann::json& band = costs.at("band_frac");
      cfg.spec.band = BandSchedule::constant(band.at("a").get<double>() * cfg.spec.vbar,
                                             band.at("b").get<double>() * cfg.spec.vbar);
    }

    if (j.contains("solve")) {
      const nlohmann::json& s = j.at("solve");
      cfg.solve.K = s.value("K", 50);
      cfg.solve.horizon = s.value("T_day", 125.0);
      cfg.solve.cfl = s.value("cfl", 0.25);
      if (s.contains("L") && !s.at("L").is_null())
        cfg.solve.num_steps = s.at("L").get<long>();
      cfg.solve.steady_tol = s.value("steady_tol", 1e-10);
      cfg.solve.steady_mode = s.value("steady_mode", false);
      cfg.solve.scheme.weno = s.value("weno", true);
      cfg.solve.scheme.visc_sign = s.value("visc_sign", -1);
      cfg.solve.scheme.boundary_one_sided_pminus_at_km1 =
          s.value("boundary_literal_km1", false);
      cfg.solve.terminal_value = s.value("terminal_value", 0.0);
    }

    if (j.contains("verify") && j.at("verify").contains("grids"))
      cfg.verify_grids = j.at("verify").at("grids").get<std::vector<int>>();

    if (j.contains("simulate")) {
      const nlohmann::json& s = j.at("simulate");
      cfg.sim.v0 = s.value("v0_frac", 0.5) * cfg.spec.vbar;
      cfg.sim.i0 = s.value("i0", 0);
      cfg.sim.n_paths = s.value("n_paths", 1000L);
      cfg.sim.horizon = s.value("horizon_day", cfg.solve.horizon);
      if (s.contains("dt_sim_day") && !s.at("dt_sim_day").is_null())
        cfg.sim.dt_sim = s.at("dt_sim_day").get<double>();
      cfg.sim.seed = s.value("seed", 1ULL);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(path.string() + ": " + e.what());
  }
  cfg.solve.validate();
  validate(cfg.spec, cfg.model);
  return cfg;
}

struct GlobalOptions {
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

// ---------------------------------------------------------------------------
// estimate

struct EstimateOptions {
  double bin_width = 10.0;
  int num_regimes = 41;
  std::vector<double> bin_edges;        ///< optional explicit finite edges
  std::vector<double> representatives;  ///< optional explicit Q_i
  double lag_hours = 1.0;
};

/// Builds a RegimeModel from an hourly discharge record: classifies every
/// sample, estimates one-lag transition probabilities, converts them to
/// switching rates, and writes model.json, pij.csv, and stationary.csv.
inline int cmd_estimate(const std::filesystem::path& input_csv, const EstimateOptions& opt,
                        const GlobalOptions& global) {
  RegimeModel model;
  model.lag_hours = opt.lag_hours;
  if (!opt.bin_edges.empty()) {
    model.bin_edges = opt.bin_edges;
  } else {
    if (opt.num_regimes < 1) throw config_error("estimate: need at least one regime");
    for (int i = 0; i < opt.num_regimes; ++i)
      model.bin_edges.push_back(opt.bin_width * i);
  }
  const std::size_t n_regimes = model.bin_edges.size();
  if (!opt.representatives.empty()) {
    model.representatives = opt.representatives;
  } else {
    for (std::size_t i = 0; i < n_regimes; ++i) {
      const double lo = model.bin_edges[i];
      const double prev_width =
          (i > 0) ? lo - model.bin_edges[i - 1] : opt.bin_width;
      const double hi =
          (i + 1 < n_regimes) ? model.bin_edges[i + 1] : lo + prev_width;
      model.representatives.push_back(0.5 * (lo + hi));
    }
  }
  model.bin_edges.push_back(std::numeric_limits<double>::infinity());
  model.rates.assign(n_regimes, std::vector<double>(n_regimes, 0.0));
  model.validate();

  const std::vector<double> discharges = read_inflow_csv(input_csv, opt.lag_hours);
  if (discharges.size() < 2)
    throw config_error(input_csv.string() + ": need at least 2 records");
  std::vector<int> seq;
  seq.reserve(discharges.size());
  for (double q : discharges) seq.push_back(classify_inflow(q, model));

  const Matrix p = estimate_transition_probs(seq, static_cast<int>(n_regimes));
  model.rates = rates_from_probs(p, opt.lag_hours);
  const std::vector<double> pi = stationary_distribution(p);

  std::filesystem::create_directories(global.output_dir);
  write_model_json(global.output_dir / "model.json", model);
  write_matrix_csv(global.output_dir / "pij.csv", p, "i,j,p_ij");
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < pi.size(); ++i)
      rows.push_back({static_cast<double>(i), pi[i]});
    write_csv(global.output_dir / "stationary.csv", "i,pi", rows);
  }
  if (!global.quiet) {
    std::cout << "estimated " << n_regimes << " regimes from " << discharges.size()
              << " records\n";
    std::size_t top = 0;
    for (std::size_t i = 1; i < pi.size(); ++i)
      if (pi[i] > pi[top]) top = i;
    std::cout << "stationary mode: regime " << top << " (pi = " << format_value(pi[top])
              << ")\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// solve

inline int cmd_solve(const std::filesystem::path& config_path, bool normalize_output,
                     const GlobalOptions& global) {
  const RunConfig cfg = load_run_config(config_path);
  const SolveResult result = solve(cfg.solve, cfg.model, cfg.spec);
  std::filesystem::create_directories(global.output_dir);
  const double scale = normalize_output ? cfg.spec.delta / cfg.spec.y : 1.0;
  write_value_csv(global.output_dir / "value.csv", result.value, scale);
  write_policy_csv(global.output_dir / "policy.csv", result.policy);
  write_convergence_csv(global.output_dir / "convergence.csv", result.log);
  if (!global.quiet) {
    std::cout << "steps: " << result.steps_taken << ", dt: " << format_value(result.dt)
              << ", final residual: " << format_value(result.final_residual) << "\n";
    if (result.status == SolveStatus::steady_not_reached)
      std::cout << "warning: steady tolerance not reached within the step budget\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify

namespace cli_detail {

/// The closed-form solution applies only to the symmetric penalty regime.
inline ExactParams exact_params_for(const RunConfig& cfg) {
  const CostSpec& spec = cfg.spec;
  if (spec.m_exp != spec.n_exp)
    throw config_error("verify: closed-form reference requires m = n");
  if (spec.high_flow)
    throw config_error("verify: closed-form reference excludes the high-flow term");
  if (spec.band.times.size() != 1)
    throw config_error("verify: closed-form reference requires a constant band");
  if (spec.residual.fn)
    throw config_error("verify: closed-form reference requires zero residual flow");
  for (int i = 0; i < cfg.model.num_regimes(); ++i) {
    const double qi = cfg.model.representatives[static_cast<std::size_t>(i)];
    if (spec.target_of(i) != qi || spec.threshold_of(i) != qi)
      throw config_error(
          "verify: closed-form reference requires target = threshold = Q_i");
  }
  ExactParams params;
  params.vbar = spec.vbar;
  params.a = spec.band.a[0];
  params.b = spec.band.b[0];
  params.m = spec.m_exp;
  params.w = spec.w;
  params.y = spec.y;
  params.delta = spec.delta;
  params.representatives = cfg.model.representatives;
  params.q_min = spec.q_min;
  params.q_max = spec.q_max;
  params.validate();
  return params;
}

}  // namespace cli_detail

/// Analytic residual check followed by the grid-refinement error study
/// against the closed-form steady solution, in both plain and WENO modes.
inline int cmd_verify(const std::filesystem::path& config_path, const GlobalOptions& global) {
  const RunConfig cfg = load_run_config(config_path);
  const ExactParams params = cli_detail::exact_params_for(cfg);
  std::filesystem::create_directories(global.output_dir);

  const ValidityReport validity = check_validity(params);
  {
    std::vector<std::vector<double>> rows{
        {validity.valid ? 1.0 : 0.0, validity.left_margin, validity.right_margin}};
    write_csv(global.output_dir / "validity.csv", "valid,left_margin,right_margin", rows);
  }
  if (!global.quiet)
    std::cout << "validity margins: left " << format_value(validity.left_margin)
              << ", right " << format_value(validity.right_margin)
              << (validity.valid ? "" : " (advisory: bound violated)") << "\n";

  // Residual profile of the analytic solution (oracle transcription check).
  {
    std::vector<std::vector<double>> rows;
    const int per_branch = 200;
    const auto sample_branch = [&](double lo, double hi) {
      for (int s = 1; s <= per_branch; ++s) {
        const double v = lo + (hi - lo) * s / (per_branch + 1.0);
        rows.push_back({v, steady_residual_at(v, params)});
      }
    };
    sample_branch(0.0, params.a);
    sample_branch(params.a, params.b);
    sample_branch(params.b, params.vbar);
    write_csv(global.output_dir / "residual.csv", "v,residual", rows);
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, std::abs(row[1]));
    if (!global.quiet)
      std::cout << "analytic residual: max |H| = " << format_value(worst) << "\n";
  }

  std::vector<std::vector<double>> table_rows;
  for (int K : cfg.verify_grids) {
    double cells[4];
    for (int mode = 0; mode < 2; ++mode) {
      SolveConfig sc = cfg.solve;
      sc.K = K;
      sc.scheme.weno = (mode == 1);
      const SolveResult res = solve(sc, cfg.model, cfg.spec);
      const auto [l1, linf] = grid_errors(
          res.value.phi[0], res.value.grid,
          [&params](double v) { return exact_value(v, params); });
      cells[mode] = l1;
      cells[2 + mode] = linf;
    }
    table_rows.push_back({static_cast<double>(K), cells[0], cells[1], cells[2], cells[3]});
    if (!global.quiet)
      std::cout << "K=" << K << "  llxf l1 " << format_value(cells[0]) << "  weno l1 "
                << format_value(cells[1]) << "  llxf linf " << format_value(cells[2])
                << "  weno linf " << format_value(cells[3]) << "\n";
  }
  write_csv(global.output_dir / "table1.csv", "K,llxf_l1,weno_l1,llxf_linf,weno_linf",
            table_rows);

  std::vector<std::vector<double>> order_rows;
  for (std::size_t r = 1; r < table_rows.size(); ++r) {
    std::vector<double> row{table_rows[r][0]};
    for (std::size_t c = 1; c <= 4; ++c)
      row.push_back(std::log2(table_rows[r - 1][c] / table_rows[r][c]));
    order_rows.push_back(row);
  }
  write_csv(global.output_dir / "orders.csv",
            "K,llxf_l1_order,weno_l1_order,llxf_linf_order,weno_linf_order", order_rows);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const std::filesystem::path& config_path,
                        const std::filesystem::path& policy_path,
                        const GlobalOptions& global) {
  const RunConfig cfg = load_run_config(config_path);
  const Grid grid(cfg.solve.K, cfg.spec.vbar);
  const PolicyField policy = read_policy_csv(policy_path, grid, cfg.model.num_regimes());
  const std::uint64_t seed = global.seed.value_or(cfg.sim.seed);
  const double dt_sim = cfg.sim.dt_sim.value_or(
      default_dt_sim(grid.dv(), cfg.spec.q_max, cfg.solve.drift_factor));

  std::filesystem::create_directories(global.output_dir);
  const Trajectory traj = simulate_trajectory(
      policy, cfg.model, cfg.spec, cfg.sim.v0, cfg.sim.i0, cfg.sim.horizon, dt_sim, seed,
      cfg.solve.drift_factor, cfg.solve.rate_scale);
  write_trajectory_csv(global.output_dir / "trajectory.csv", traj);

  const ObjectiveEstimate est = estimate_objective(
      policy, cfg.model, cfg.spec, cfg.sim.v0, cfg.sim.i0, cfg.sim.horizon,
      cfg.sim.n_paths, dt_sim, seed, cfg.solve.drift_factor, cfg.solve.rate_scale);
  write_csv(global.output_dir / "ensemble.csv", "n_paths,mean,stderr",
            {{static_cast<double>(est.n_paths), est.mean, est.stderr_}});
  if (!global.quiet)
    std::cout << "mean discounted cost: " << format_value(est.mean) << " +/- "
              << format_value(est.stderr_) << " (" << est.n_paths << " paths)\n";
  return 0;
}

}  // namespace resop
