#pragma once

/// @file exact.hpp
/// @brief Closed-form steady constrained viscosity solution for the symmetric
///        penalty regime (m = n, equal target/threshold/representative
///        discharges, zero residual flow, constant band) and its validity
///        condition. Serves as the verification oracle for the PDE solver.
///
/// The minimization and the branch constants here are transcribed
/// independently of the hamiltonian module on purpose: the oracle must not
/// share code with the iterative machinery it validates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "resop/errors.hpp"

namespace resop {

/// Parameters of the exact steady solution.
struct ExactParams {
  double vbar = 1.0;
  double a = 0.3;
  double b = 0.7;
  double m = 1.0;  ///< shared penalty exponent (m = n)
  double w = 0.4;
  double y = 0.5;
  double delta = 0.1;
  std::vector<double> representatives;  ///< Q_i, also the target/threshold
  double q_min = 0.0;
  double q_max = 1.0;

  void validate() const {
    if (!(0.0 < a && a < b && b < vbar))
      throw config_error("ExactParams: need 0 < a < b < vbar");
    if (!(delta > 0.0)) throw config_error("ExactParams: delta must be > 0");
    if (!(m > 0.0 && w > 0.0 && y > 0.0))
      throw config_error("ExactParams: m, w, y must be > 0");
    if (representatives.empty())
      throw config_error("ExactParams: at least one representative discharge");
    if (!(q_min < q_max)) throw config_error("ExactParams: need q_min < q_max");
  }

  /// The constant C of the left branch: ((1+w)^{1/(m+1)}/(m+1)) ((m+1)delta/m)^{m/(m+1)}.
  double C() const { return branch_constant(w); }

  /// Same constant with the shortfall weight removed; governs the right
  /// branch, where the shortfall term is inactive (q* > target there).
  double C_right() const { return branch_constant(0.0); }

  /// (y/delta)^{1/(m+1)}, the root of the band value gap.
  double root_gap() const { return std::pow(y / delta, 1.0 / (m + 1.0)); }

 private:
  double branch_constant(double weight) const {
    return std::pow(1.0 + weight, 1.0 / (m + 1.0)) / (m + 1.0) *
           std::pow((m + 1.0) * delta / m, m / (m + 1.0));
  }
};

struct ValidityReport {
  bool valid = false;
  double left_margin = 0.0;   ///< y - left bound  (>= 0 when the left inequality holds)
  double right_margin = 0.0;  ///< right bound - y (>= 0 when the right inequality holds)
};

/// Both inequalities of the validity condition
///   (1+w)/(m^m (m+1)) delta^{m+1} max{a, vbar-b}^{m+1}
///     <= y <= m/((m+1)(1+w)^{1/m}) min_i { Q_i, q_max - Q_i }^{m+1}.
/// Margins are reported as slack so callers can see how close a
/// configuration sits to either bound; the check is advisory.
inline ValidityReport check_validity(const ExactParams& params) {
  params.validate();
  const double m = params.m;
  const double left_bound = (1.0 + params.w) / (std::pow(m, m) * (m + 1.0)) *
                            std::pow(params.delta, m + 1.0) *
                            std::pow(std::max(params.a, params.vbar - params.b), m + 1.0);
  double min_part = std::numeric_limits<double>::infinity();
  for (double qi : params.representatives)
    min_part = std::min({min_part, qi, params.q_max - qi});
  const double right_bound = m / ((m + 1.0) * std::pow(1.0 + params.w, 1.0 / m)) *
                             std::pow(min_part, m + 1.0);
  ValidityReport rep;
  rep.left_margin = params.y - left_bound;
  rep.right_margin = right_bound - params.y;
  rep.valid = rep.left_margin >= 0.0 && rep.right_margin >= 0.0;
  return rep;
}

namespace exact_detail {

inline double left_value(const ExactParams& p, double v) {
  const double z = p.root_gap() - p.C() * (p.a - v);
  return p.y / p.delta - std::pow(z, p.m + 1.0);
}

inline double right_value(const ExactParams& p, double v) {
  const double z = p.root_gap() - p.C_right() * (v - p.b);
  return p.y / p.delta - std::pow(z, p.m + 1.0);
}

/// One-sided analytic slope of the steady solution (0 on the band).
inline double slope(const ExactParams& p, double v) {
  if (v < p.a) {
    const double z = p.root_gap() - p.C() * (p.a - v);
    return -(p.m + 1.0) * p.C() * std::pow(z, p.m);
  }
  if (v > p.b) {
    const double z = p.root_gap() - p.C_right() * (v - p.b);
    return (p.m + 1.0) * p.C_right() * std::pow(z, p.m);
  }
  return 0.0;
}

/// Analytic argmin of -u*slope + |u|^{m+1}/(m+1) + w*max(-u,0)^{m+1}/(m+1)
/// in the centered coordinate u = q - Q_i (equal target/threshold).
inline double centered_argmin(const ExactParams& p, double s) {
  if (s > 0.0) return std::pow(s, 1.0 / p.m);
  if (s < 0.0) return -std::pow(-s / (1.0 + p.w), 1.0 / p.m);
  return 0.0;
}

}  // namespace exact_detail

/// The steady value function: zero on the closed band [a, b], the left
/// branch on [0, a), the right branch on (b, vbar]. Regime-independent.
inline double exact_value(double v, const ExactParams& params) {
  if (v < params.a) return exact_detail::left_value(params, v);
  if (v > params.b) return exact_detail::right_value(params, v);
  return 0.0;
}

struct ExactPolicy {
  double q = 0.0;
  bool clamped = false;
};

/// The steady optimal discharge: Q_i on the band, below it when filling is
/// needed (v < a), above it when releasing is needed (v > b), clamped to the
/// technological interval with a flag when the clamp is active.
inline ExactPolicy exact_policy(double v, int i, const ExactParams& params) {
  const double qi = params.representatives[static_cast<std::size_t>(i)];
  double q = qi;
  if (v < params.a) {
    const double z = params.root_gap() - params.C() * (params.a - v);
    q = qi - std::pow((params.m + 1.0) * params.C() / (1.0 + params.w), 1.0 / params.m) * z;
  } else if (v > params.b) {
    const double z = params.root_gap() - params.C_right() * (v - params.b);
    q = qi + std::pow((params.m + 1.0) * params.C_right(), 1.0 / params.m) * z;
  }
  ExactPolicy out;
  out.q = std::clamp(q, params.q_min, params.q_max);
  out.clamped = out.q != q;
  return out;
}

/// Residual of the steady Hamiltonian at v with the analytic value, slope,
/// and inner minimum substituted. The coupling terms vanish identically
/// because the value is regime-independent, and the remaining expression is
/// the same for every regime; the worst (largest magnitude) residual over
/// the configured regimes is returned. v must avoid the kinks a, b.
inline double steady_residual_at(double v, const ExactParams& params) {
  params.validate();
  if (v == params.a || v == params.b)
    throw config_error("steady_residual_at: the solution has a kink at v = a, b");
  if (!(v >= 0.0 && v <= params.vbar))
    throw config_error("steady_residual_at: v outside [0, vbar]");
  const double phi = exact_value(v, params);
  const double s = exact_detail::slope(params, v);
  const double g = (v < params.a || v > params.b) ? params.y : 0.0;
  const double m1 = params.m + 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.representatives.size(); ++i) {
    const double qi = params.representatives[i];
    double u = exact_detail::centered_argmin(params, s);
    // Admissible interval in centered coordinates; restricted at the walls.
    double u_lo = params.q_min - qi, u_hi = params.q_max - qi;
    if (v == 0.0) u_hi = 0.0;
    if (v == params.vbar) u_lo = 0.0;
    u = std::clamp(u, u_lo, u_hi);
    const double f = std::pow(std::abs(u), m1) / m1 +
                     params.w * std::pow(std::max(-u, 0.0), m1) / m1;
    const double residual = params.delta * phi - (-u * s + f + g);
    if (std::abs(residual) > std::abs(worst)) worst = residual;
  }
  return worst;
}

}  // namespace resop
