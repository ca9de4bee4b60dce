#pragma once

/// @file solver.hpp
/// @brief Backward-in-time marching of the optimality system from the
///        terminal condition, steady-state detection, policy extraction, and
///        unit handling.

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "resop/costs.hpp"
#include "resop/errors.hpp"
#include "resop/hamiltonian.hpp"
#include "resop/regime.hpp"
#include "resop/scheme.hpp"

namespace resop {

struct SolveConfig {
  int K = 50;
  double horizon = 125.0;  ///< T (day)
  double cfl = 0.25;       ///< dt = cfl * dv unless num_steps is given
  std::optional<long> num_steps;  ///< explicit L: dt = horizon / L
  double steady_tol = 1e-10;      ///< l-inf change between successive steps
  bool steady_mode = false;       ///< stop early once steady_tol is met
  double drift_factor = 1.0;      ///< m^3/s -> volume units per day (86400/vbar in SI)
  double rate_scale = 1.0;        ///< rate unit -> 1/day (24 for hourly rates)
  SchemeOptions scheme;
  double terminal_value = 0.0;  ///< constant terminal data (0 in the model)

  void validate() const {
    if (!(cfl > 0.0)) throw config_error("SolveConfig: cfl must be > 0");
    if (!(horizon > 0.0)) throw config_error("SolveConfig: horizon must be > 0");
    if (!(steady_tol > 0.0)) throw config_error("SolveConfig: steady_tol must be > 0");
    if (num_steps && *num_steps < 1)
      throw config_error("SolveConfig: num_steps must be >= 1");
    if (!(drift_factor > 0.0) || !(rate_scale > 0.0))
      throw config_error("SolveConfig: unit factors must be > 0");
  }
};

/// Optimal discharge at every (regime, vertex), m^3/s, with the time stamp
/// of extraction.
struct PolicyField {
  Grid grid;
  double time = 0.0;
  std::vector<std::vector<double>> q;  ///< [regime][vertex]
};

struct ConvergenceEntry {
  long step = 0;
  double t = 0.0;
  double residual = 0.0;  ///< l-inf change produced by this step
};

enum class SolveStatus {
  completed_horizon,   ///< marched the full horizon as requested
  converged_steady,    ///< steady tolerance met before the horizon
  steady_not_reached,  ///< steady mode requested but tolerance not met (warning)
};

struct SolveResult {
  ValueField value;  ///< at the final time reached
  PolicyField policy;
  std::vector<ConvergenceEntry> log;
  SolveStatus status = SolveStatus::completed_horizon;
  double final_residual = 0.0;
  long steps_taken = 0;
  double dt = 0.0;
};

/// Pointwise optimal discharge recovered from a value field: the inner
/// minimizer at the averaged one-sided gradient (p+ + p-)/2 of each vertex.
inline PolicyField extract_policy(const ValueField& field, const RegimeModel& model,
                                  const CostSpec& spec, const SchemeOptions& opt = {},
                                  double drift_factor = 1.0) {
  PolicyField pol;
  pol.grid = field.grid;
  pol.time = field.time;
  pol.q.resize(field.phi.size());
  const double dv = field.grid.dv();
  for (std::size_t i = 0; i < field.phi.size(); ++i) {
    auto [pm, pp] = derivative_pairs(field.phi[i], dv, opt);
    pol.q[i].resize(pm.size());
    for (std::size_t k = 0; k < pm.size(); ++k) {
      const double v = field.grid.vertex(static_cast<int>(k));
      const ControlInterval iv =
          control_interval(spec, model, field.time, v, static_cast<int>(i));
      const double pbar = 0.5 * (pm[k] + pp[k]);
      pol.q[i][k] = detail::inner_argmin(spec, static_cast<int>(i),
                                         drift_factor * pbar, iv.lo, iv.hi);
    }
  }
  return pol;
}

/// Marches the value system backward from the terminal condition
/// phi = terminal_value at t = horizon, in steps of dt = cfl*dv (or
/// horizon/num_steps), recording the per-step l-inf change. In steady mode
/// the march stops once the change drops to steady_tol; running out of steps
/// first is reported as a warning status, not an error.
inline SolveResult solve(const SolveConfig& config, const RegimeModel& model,
                         const CostSpec& spec) {
  config.validate();
  validate(spec, model);
  const Grid grid(config.K, spec.vbar);

  double dt = config.cfl * grid.dv();
  long total_steps;
  if (config.num_steps) {
    total_steps = *config.num_steps;
    dt = config.horizon / static_cast<double>(total_steps);
  } else {
    total_steps = std::max(1L, std::lround(config.horizon / dt));
    dt = config.horizon / static_cast<double>(total_steps);
  }

  SolveResult result;
  result.dt = dt;
  result.log.reserve(static_cast<std::size_t>(std::min(total_steps, 2000000L)));
  ValueField cur(grid, model.num_regimes(), config.terminal_value, config.horizon);

  for (long l = 1; l <= total_steps; ++l) {
    ValueField next;
    try {
      next = llf_step(cur, model, spec, dt, config.scheme, config.drift_factor,
                      config.rate_scale);
    } catch (const numeric_error& e) {
      throw numeric_error(std::string(e.what()) + " at step " + std::to_string(l));
    }
    double change = 0.0;
    for (std::size_t i = 0; i < cur.phi.size(); ++i)
      for (std::size_t k = 0; k < cur.phi[i].size(); ++k)
        change = std::max(change, std::abs(next.phi[i][k] - cur.phi[i][k]));
    cur = std::move(next);
    result.log.push_back({l, cur.time, change});
    result.final_residual = change;
    result.steps_taken = l;
    if (config.steady_mode && change <= config.steady_tol) {
      result.status = SolveStatus::converged_steady;
      break;
    }
  }
  if (config.steady_mode && result.status != SolveStatus::converged_steady)
    result.status = SolveStatus::steady_not_reached;

  result.value = std::move(cur);
  result.policy =
      extract_policy(result.value, model, spec, config.scheme, config.drift_factor);
  return result;
}

/// l1 and l-inf errors of a per-vertex array against a reference functor,
/// with the l1 norm weighted by the cell width.
template <typename Ref>
inline std::pair<double, double> grid_errors(const std::vector<double>& values,
                                             const Grid& grid, Ref&& reference) {
  double l1 = 0.0, linf = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double err = std::abs(values[k] - reference(grid.vertex(static_cast<int>(k))));
    l1 += err;
    linf = std::max(linf, err);
  }
  return {l1 * grid.dv(), linf};
}

}  // namespace resop
