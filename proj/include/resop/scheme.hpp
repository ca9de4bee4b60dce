#pragma once

/// @file scheme.hpp
/// @brief Spatial discretization: third-order WENO one-sided derivative
///        reconstructions and the local Lax-Friedrichs update, including the
///        boundary modifications at the first and last vertices.
///
/// REFERENCE: G.-S. Jiang, D. Peng, "Weighted ENO schemes for Hamilton-Jacobi
/// equations", SIAM J. Sci. Comput. 21 (2000) 2126-2143.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "resop/costs.hpp"
#include "resop/errors.hpp"
#include "resop/hamiltonian.hpp"
#include "resop/regime.hpp"

namespace resop {

/// Smoothness-indicator regularization in the WENO weights.
inline constexpr double kWenoEps = 1e-12;

/// Uniform vertex grid on [0, vbar] with K cells and K+1 vertices.
/// Vertices are computed as (k*vbar)/K with the endpoints forced exact, so a
/// band edge that is an exact multiple of vbar/K classifies consistently.
struct Grid {
  int K = 0;
  double vbar = 1.0;

  Grid() = default;
  Grid(int cells, double capacity) : K(cells), vbar(capacity) {
    if (K < 4) throw config_error("Grid: K >= 4 required by the WENO stencil");
    if (!(vbar > 0.0)) throw config_error("Grid: vbar must be > 0");
  }

  double dv() const { return vbar / K; }
  double vertex(int k) const {
    if (k <= 0) return 0.0;
    if (k >= K) return vbar;
    return (static_cast<double>(k) * vbar) / static_cast<double>(K);
  }
};

/// Per-regime value arrays on a grid at one time level.
struct ValueField {
  Grid grid;
  double time = 0.0;
  std::vector<std::vector<double>> phi;  ///< [regime][vertex], size (I+1) x (K+1)

  ValueField() = default;
  ValueField(const Grid& g, int regimes, double fill = 0.0, double t = 0.0)
      : grid(g), time(t),
        phi(static_cast<std::size_t>(regimes),
            std::vector<double>(static_cast<std::size_t>(g.K + 1), fill)) {}
};

struct SchemeOptions {
  bool weno = true;           ///< false: plain one-sided differences
  int visc_sign = -1;         ///< s in the update term s*(D/2)*(p+ - p-)
  bool boundary_one_sided_pminus_at_km1 = false;  ///< literal K-1 boundary variant
};

/// One-sided derivative estimates (p-, p+) at every vertex of one regime's
/// array. WENO3 in the interior; first-order one-sided differences at the
/// boundary vertices:
///   k = 0:   p- = p+ = forward difference, k = K: p- = p+ = backward;
///   k = 1:   p- one-sided, p+ from the regular stencil;
///   k = K-1: p+ one-sided (default; the flag swaps this to p-), the other
///            from the regular stencil.
/// Plain mode uses adjacent one-sided differences everywhere.
inline std::pair<std::vector<double>, std::vector<double>> derivative_pairs(
    const std::vector<double>& phi, double dv, const SchemeOptions& opt = {}) {
  const int K = static_cast<int>(phi.size()) - 1;
  if (K < 4) throw config_error("derivative_pairs: K >= 4 required");
  std::vector<double> pm(static_cast<std::size_t>(K + 1), 0.0);
  std::vector<double> pp(static_cast<std::size_t>(K + 1), 0.0);
  std::vector<double> dp(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) dp[k] = phi[k + 1] - phi[k];

  if (!opt.weno) {
    for (int k = 0; k <= K; ++k) {
      pm[k] = (k >= 1 ? dp[k - 1] : dp[0]) / dv;
      pp[k] = (k <= K - 1 ? dp[k] : dp[K - 1]) / dv;
    }
    return {std::move(pm), std::move(pp)};
  }

  // Second differences d2[k] = dp[k] - dp[k-1], defined for 1 <= k <= K-1.
  std::vector<double> d2(static_cast<std::size_t>(K), 0.0);
  for (int k = 1; k < K; ++k) d2[k] = dp[k] - dp[k - 1];

  for (int k = 2; k <= K - 1; ++k) {
    const double central = (dp[k - 1] + dp[k]) / (2.0 * dv);
    const double r = (kWenoEps + d2[k - 1] * d2[k - 1]) / (kWenoEps + d2[k] * d2[k]);
    const double w = 1.0 / (1.0 + 2.0 * r * r);
    pm[k] = central - 0.5 * w * (dp[k - 2] - 2.0 * dp[k - 1] + dp[k]) / dv;
  }
  for (int k = 1; k <= K - 2; ++k) {
    const double central = (dp[k - 1] + dp[k]) / (2.0 * dv);
    const double r = (kWenoEps + d2[k + 1] * d2[k + 1]) / (kWenoEps + d2[k] * d2[k]);
    const double w = 1.0 / (1.0 + 2.0 * r * r);
    pp[k] = central - 0.5 * w * (dp[k + 1] - 2.0 * dp[k] + dp[k - 1]) / dv;
  }

  pm[0] = pp[0] = dp[0] / dv;
  pm[K] = pp[K] = dp[K - 1] / dv;
  pm[1] = dp[0] / dv;
  if (opt.boundary_one_sided_pminus_at_km1)
    pm[K - 1] = pp[K - 1] = dp[K - 1] / dv;
  else
    pp[K - 1] = dp[K - 1] / dv;
  return {std::move(pm), std::move(pp)};
}

/// Spec-shaped single-vertex accessor over the same reconstruction.
inline std::pair<double, double> weno_derivative_pair(const std::vector<double>& phi,
                                                      int k, double dv,
                                                      const SchemeOptions& opt = {}) {
  auto [pm, pp] = derivative_pairs(phi, dv, opt);
  return {pm[static_cast<std::size_t>(k)], pp[static_cast<std::size_t>(k)]};
}

/// One backward-in-time explicit Euler step of the local Lax-Friedrichs
/// scheme: for every regime i and vertex k,
///   phi_i^(k,l) = phi_i^(k,l+1)
///                 - dt * [ H(v_k, i, ., (p+ + p-)/2) + s*(D/2)*(p+ - p-) ],
/// with D from viscosity_coefficient, forced to 0 at k = 0 and k = K.
/// All regimes advance from the same frozen input field (Jacobi update).
inline ValueField llf_step(const ValueField& in, const RegimeModel& model,
                           const CostSpec& spec, double dt,
                           const SchemeOptions& opt = {}, double drift_factor = 1.0,
                           double rate_scale = 1.0) {
  if (!(dt > 0.0)) throw config_error("llf_step: dt must be > 0");
  const int K = in.grid.K;
  const int n_reg = static_cast<int>(in.phi.size());
  const double dv = in.grid.dv();
  const double t = in.time;
  ValueField out = in;
  out.time = in.time - dt;

  std::vector<double> phi_at_vertex(static_cast<std::size_t>(n_reg), 0.0);
  std::vector<std::vector<double>> all_pm(n_reg), all_pp(n_reg);
  for (int i = 0; i < n_reg; ++i) {
    auto [pm, pp] = derivative_pairs(in.phi[static_cast<std::size_t>(i)], dv, opt);
    all_pm[static_cast<std::size_t>(i)] = std::move(pm);
    all_pp[static_cast<std::size_t>(i)] = std::move(pp);
  }

  for (int k = 0; k <= K; ++k) {
    const double v = in.grid.vertex(k);
    for (int i = 0; i < n_reg; ++i)
      phi_at_vertex[static_cast<std::size_t>(i)] =
          in.phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    for (int i = 0; i < n_reg; ++i) {
      const double pmk = all_pm[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      const double ppk = all_pp[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      const double pbar = 0.5 * (pmk + ppk);
      const double ham = hamiltonian_value(spec, model, t, v, i, phi_at_vertex, pbar,
                                           drift_factor, rate_scale);
      const double d_coef =
          (k == 0 || k == K)
              ? 0.0
              : viscosity_coefficient(spec, model, t, v, i, pmk, ppk, drift_factor);
      const double updated =
          phi_at_vertex[static_cast<std::size_t>(i)] -
          dt * (ham + opt.visc_sign * 0.5 * d_coef * (ppk - pmk));
      if (!std::isfinite(updated))
        throw numeric_error("llf_step: non-finite value at regime " + std::to_string(i) +
                            ", vertex " + std::to_string(k));
      out.phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = updated;
    }
  }
  return out;
}

}  // namespace resop
