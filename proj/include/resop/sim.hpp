#pragma once

/// @file sim.hpp
/// @brief Monte Carlo simulation of the controlled piecewise-deterministic
///        reservoir dynamics and estimation of the discounted objective.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "resop/costs.hpp"
#include "resop/errors.hpp"
#include "resop/regime.hpp"
#include "resop/solver.hpp"

namespace resop {

struct Trajectory {
  std::vector<double> times;   ///< days
  std::vector<int> regimes;
  std::vector<double> volumes;
  std::vector<double> discharges;       ///< m^3/s
  std::vector<double> cost_increments;  ///< discounted cost accrued to the next sample
  double total_cost = 0.0;
};

/// Half-cell step rule: no substep moves the volume by more than dv/2 at the
/// maximum discharge rate.
inline double default_dt_sim(double dv, double q_max, double drift_factor) {
  return dv / (2.0 * q_max * drift_factor);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Piecewise-linear policy lookup in v (regime index exact).
inline double policy_lookup(const PolicyField& policy, double v, int i) {
  const auto& q = policy.q[static_cast<std::size_t>(i)];
  const double x = std::clamp(v / policy.grid.dv(), 0.0, static_cast<double>(policy.grid.K));
  const int k0 = std::min(static_cast<int>(x), policy.grid.K - 1);
  const double frac = x - k0;
  return (1.0 - frac) * q[static_cast<std::size_t>(k0)] +
         frac * q[static_cast<std::size_t>(k0) + 1];
}

/// Explicit Euler between exact regime-switch times. Calls
/// sink(t, regime, v, q, increment) at every substep boundary; the increment
/// is the trapezoidal discounted cost accrued over the substep that starts
/// there (0 for the final sample).
template <typename Sink>
inline double run_path(const PolicyField& policy, const RegimeModel& model,
                       const CostSpec& spec, double v0, int i0, double horizon,
                       double dt_sim, std::uint64_t seed, double drift_factor,
                       double rate_scale, Sink&& sink) {
  if (!(v0 >= 0.0 && v0 <= spec.vbar))
    throw config_error("simulate: v0 outside [0, vbar]");
  if (!(dt_sim > 0.0)) throw config_error("simulate: dt_sim must be > 0");
  if (i0 < 0 || i0 >= model.num_regimes())
    throw config_error("simulate: initial regime out of range");

  Matrix rates_day = model.rates;
  for (auto& row : rates_day)
    for (double& x : row) x *= rate_scale;
  const auto path = sample_regime_path(rates_day, horizon, i0, seed);

  const auto project_at_walls = [&](double q, double t, double v, double qi) {
    if (v == 0.0) return std::clamp(q, spec.q_min, qi + spec.residual(t, 0.0));
    if (v == spec.vbar) return std::clamp(q, qi + spec.residual(t, spec.vbar), spec.q_max);
    return q;
  };

  double t = 0.0, v = v0, total = 0.0;
  double disc = 1.0;  // e^{-delta t}, advanced multiplicatively per substep
  for (std::size_t seg = 0; seg < path.size(); ++seg) {
    const int regime = path[seg].second;
    const double qi = model.representatives[static_cast<std::size_t>(regime)];
    const double t_end = (seg + 1 < path.size()) ? path[seg + 1].first : horizon;
    if (t_end <= t) continue;
    const long nsub = std::max(1L, static_cast<long>(std::ceil((t_end - t) / dt_sim)));
    const double h = (t_end - t) / static_cast<double>(nsub);
    const double decay = std::exp(-spec.delta * h);
    double q = project_at_walls(policy_lookup(policy, v, regime), t, v, qi);
    double rate = disc * (flow_penalty(spec, t, q, regime) + volume_penalty(spec, t, v));
    for (long s = 0; s < nsub; ++s) {
      const double v_next = std::clamp(
          v + h * drift_factor * (qi - q + spec.residual(t, v)), 0.0, spec.vbar);
      const double t_next = t + h;
      const double disc_next = disc * decay;
      const double q_next =
          project_at_walls(policy_lookup(policy, v_next, regime), t_next, v_next, qi);
      const double rate_next = disc_next * (flow_penalty(spec, t_next, q_next, regime) +
                                            volume_penalty(spec, t_next, v_next));
      const double increment = 0.5 * h * (rate + rate_next);
      if (!std::isfinite(v_next) || !std::isfinite(increment))
        throw numeric_error("simulate: non-finite state at t = " + std::to_string(t));
      sink(t, regime, v, q, increment);
      total += increment;
      v = v_next;
      t = t_next;
      disc = disc_next;
      q = q_next;
      rate = rate_next;
    }
  }
  {  // closing sample at the horizon
    const int regime = path.back().second;
    const double qi = model.representatives[static_cast<std::size_t>(regime)];
    sink(t, regime, v, project_at_walls(policy_lookup(policy, v, regime), t, v, qi), 0.0);
  }
  return total;
}

}  // namespace detail

/// One controlled trajectory with full sample recording; deterministic for a
/// fixed seed.
inline Trajectory simulate_trajectory(const PolicyField& policy, const RegimeModel& model,
                                      const CostSpec& spec, double v0, int i0,
                                      double horizon, double dt_sim, std::uint64_t seed,
                                      double drift_factor = 1.0,
                                      double rate_scale = 1.0) {
  Trajectory traj;
  traj.total_cost = detail::run_path(
      policy, model, spec, v0, i0, horizon, dt_sim, seed, drift_factor, rate_scale,
      [&traj](double t, int regime, double v, double q, double inc) {
        traj.times.push_back(t);
        traj.regimes.push_back(regime);
        traj.volumes.push_back(v);
        traj.discharges.push_back(q);
        traj.cost_increments.push_back(inc);
      });
  return traj;
}

struct ObjectiveEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n_paths = 0;
};

/// Monte Carlo estimate of the discounted objective under `policy` from
/// (v0, i0); each path derives its own rng stream from (seed, path index).
inline ObjectiveEstimate estimate_objective(const PolicyField& policy,
                                            const RegimeModel& model,
                                            const CostSpec& spec, double v0, int i0,
                                            double horizon, long n_paths, double dt_sim,
                                            std::uint64_t seed,
                                            double drift_factor = 1.0,
                                            double rate_scale = 1.0) {
  if (n_paths < 2) throw config_error("estimate_objective: n_paths must be >= 2");
  double sum = 0.0, sumsq = 0.0;
  for (long idx = 0; idx < n_paths; ++idx) {
    const std::uint64_t path_seed = detail::splitmix64(seed ^ static_cast<std::uint64_t>(idx));
    const double cost =
        detail::run_path(policy, model, spec, v0, i0, horizon, dt_sim, path_seed,
                         drift_factor, rate_scale,
                         [](double, int, double, double, double) {});
    sum += cost;
    sumsq += cost * cost;
  }
  ObjectiveEstimate est;
  est.n_paths = n_paths;
  est.mean = sum / static_cast<double>(n_paths);
  const double var =
      std::max(0.0, (sumsq - sum * sum / static_cast<double>(n_paths)) /
                        static_cast<double>(n_paths - 1));
  est.stderr_ = std::sqrt(var / static_cast<double>(n_paths));
  return est;
}

}  // namespace resop
