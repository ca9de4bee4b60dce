#pragma once

/// @file hamiltonian.hpp
/// @brief Coupled Hamiltonian evaluation, the inner discharge minimization,
///        and the local numerical-viscosity coefficient.

#include <cmath>
#include <span>
#include <string>

#include "resop/costs.hpp"
#include "resop/errors.hpp"
#include "resop/regime.hpp"

namespace resop {

struct InnerMinResult {
  double q_star = 0.0;
  double min_value = 0.0;
  int iterations = 0;
};

namespace detail {

/// d/dq [ -q*slope + f(t, q, i) ]; one-sided (right) values at the kinks.
inline double psi_prime(const CostSpec& spec, int i, double slope, double q) {
  const double dq = q - spec.target_of(i);
  double d = -slope + std::copysign(std::pow(std::abs(dq), spec.m_exp), dq);
  const double shortfall = spec.threshold_of(i) - q;
  if (shortfall > 0.0) d -= spec.w * std::pow(shortfall, spec.n_exp);
  if (spec.high_flow) {
    const double excess = q - spec.high_flow->threshold;
    if (excess > 0.0) d += spec.high_flow->weight * std::pow(excess, spec.m_exp);
  }
  return d;
}

inline double psi_second(const CostSpec& spec, int i, double q) {
  const double adq = std::abs(q - spec.target_of(i));
  double d2 = (adq > 0.0 || spec.m_exp == 1.0)
                  ? spec.m_exp * std::pow(adq, spec.m_exp - 1.0)
                  : 0.0;
  const double shortfall = spec.threshold_of(i) - q;
  if (shortfall > 0.0)
    d2 += spec.w * spec.n_exp * std::pow(shortfall, spec.n_exp - 1.0);
  if (spec.high_flow) {
    const double excess = q - spec.high_flow->threshold;
    if (excess > 0.0)
      d2 += spec.high_flow->weight * spec.m_exp * std::pow(excess, spec.m_exp - 1.0);
  }
  return d2;
}

/// Argmin of psi(q) = -q*slope + f(t, q, i) over [lo, hi] without evaluating
/// the minimum value (hot path of the dissipation coefficient). Fills
/// iterations for the Newton path, 0 for the closed form.
inline double inner_argmin(const CostSpec& spec, int i, double slope, double lo,
                           double hi, int* iterations = nullptr) {
  const double qc = spec.target_of(i);
  const double qt = spec.threshold_of(i);
  if (iterations) *iterations = 0;
  if (spec.m_exp == 1.0 && spec.n_exp == 1.0) {
    // psi' = -slope + (q - qc) - w*(qt - q)+ + yw*(q - qp)+ is continuous,
    // piecewise linear and strictly increasing, so its unique root lies on
    // exactly one of at most four segments; test each segment's root against
    // that segment's validity window.
    const double base = qc + slope;
    const double q1 = (base + spec.w * qt) / (1.0 + spec.w);
    double q = base;  // fallback: root within rounding of a kink
    if (!spec.high_flow) {
      if (base >= qt)
        q = base;  // shortfall inactive
      else if (q1 < qt)
        q = q1;  // shortfall active
      else
        q = qt;
    } else {
      const double yw = spec.high_flow->weight;
      const double qp = spec.high_flow->threshold;
      const double q3 = (base + yw * qp) / (1.0 + yw);
      const double q4 = (base + spec.w * qt + yw * qp) / (1.0 + spec.w + yw);
      if (base >= qt && base <= qp)
        q = base;  // no kink term active
      else if (q1 < qt && q1 <= qp)
        q = q1;  // shortfall active
      else if (q3 > qp && q3 >= qt)
        q = q3;  // high-flow active
      else if (qp < qt && q4 > qp && q4 < qt)
        q = q4;  // both active
    }
    return std::clamp(q, lo, hi);
  }
  if (detail::psi_prime(spec, i, slope, lo) >= 0.0) return lo;
  if (detail::psi_prime(spec, i, slope, hi) <= 0.0) return hi;
  double ql = lo, qh = hi;
  double q = 0.5 * (ql + qh);
  for (int it = 1; it <= 100; ++it) {
    const double d1 = detail::psi_prime(spec, i, slope, q);
    if (d1 > 0.0)
      qh = q;
    else
      ql = q;
    const double d2 = detail::psi_second(spec, i, q);
    double qn = (d2 > 0.0) ? q - d1 / d2 : 0.5 * (ql + qh);
    if (!(qn > ql && qn < qh)) qn = 0.5 * (ql + qh);
    const double step = std::abs(qn - q);
    q = qn;
    if (iterations) *iterations = it;
    if (step < 1e-12) return q;
  }
  throw numeric_error("inner_minimize: iteration limit exceeded, best iterate q = " +
                      std::to_string(q));
}

}  // namespace detail

/// Minimizes psi(q) = -q*slope + f(t, q, i) over [lo, hi]. psi is convex, so
/// the minimizer is unique (tie-break: smallest q). The quadratic case
/// (m = n = 1, no high-flow term) is solved in closed form by branch
/// analysis; otherwise a safeguarded Newton iteration on psi' with a
/// bisection fallback runs to |dq| < 1e-12 within 100 iterations.
inline InnerMinResult inner_minimize_on(const CostSpec& spec, double t, int i,
                                        double slope, double lo, double hi) {
  InnerMinResult res;
  res.q_star = detail::inner_argmin(spec, i, slope, lo, hi, &res.iterations);
  res.min_value = -res.q_star * slope + flow_penalty(spec, t, res.q_star, i);
  return res;
}

/// Volume-aware entry point: minimizes -q*p + f over the admissible interval
/// A(v) at (t, v, i).
inline InnerMinResult inner_minimize(double p, double t, double v, int i,
                                     const CostSpec& spec, const RegimeModel& model) {
  const ControlInterval iv = control_interval(spec, model, t, v, i);
  return inner_minimize_on(spec, t, i, p, iv.lo, iv.hi);
}

/// Coupled Hamiltonian
///   H = delta*phi_i + sum_{j != i} lambda_ij (phi_i - phi_j)
///       - [ (Q_i - q* + residual) p + f(t, q*, i) + g(t, v) ]
/// with q* the inner minimizer. `drift_factor` rescales the advective term
/// (m^3/s -> volume units per day) and `rate_scale` rescales the switching
/// rates into the time unit of t; both default to 1 for normalized setups.
inline double hamiltonian_value(const CostSpec& spec, const RegimeModel& model,
                                double t, double v, int i,
                                std::span<const double> phi, double p,
                                double drift_factor = 1.0, double rate_scale = 1.0) {
  const ControlInterval iv = control_interval(spec, model, t, v, i);
  const double res_flow = spec.residual(t, v);
  const InnerMinResult inner =
      inner_minimize_on(spec, t, i, drift_factor * p, iv.lo, iv.hi);
  const double drift =
      drift_factor *
      (model.representatives[static_cast<std::size_t>(i)] - inner.q_star + res_flow);
  const double running =
      drift * p + flow_penalty(spec, t, inner.q_star, i) + volume_penalty(spec, t, v);
  double coupling = 0.0;
  const auto& lam = model.rates[static_cast<std::size_t>(i)];
  for (int j = 0; j < model.num_regimes(); ++j)
    if (j != i)
      coupling += rate_scale * lam[static_cast<std::size_t>(j)] *
                  (phi[static_cast<std::size_t>(i)] - phi[static_cast<std::size_t>(j)]);
  return spec.delta * phi[static_cast<std::size_t>(i)] + coupling - running;
}

/// Local dissipation coefficient D = max_{p in [p_min, p_max]} |dH/dp|.
/// By the envelope theorem dH/dp = -(Q_i - q*(p) + residual) (scaled by the
/// drift factor), which is monotone in p because q*(p) is nondecreasing, so
/// the maximum is attained at an endpoint of [p_min, p_max].
inline double viscosity_coefficient(const CostSpec& spec, const RegimeModel& model,
                                    double t, double v, int i, double p_minus,
                                    double p_plus, double drift_factor = 1.0) {
  const ControlInterval iv = control_interval(spec, model, t, v, i);
  const double res_flow = spec.residual(t, v);
  const double qi = model.representatives[static_cast<std::size_t>(i)];
  const double p_min = std::min(p_minus, p_plus);
  const double p_max = std::max(p_minus, p_plus);
  const double d_lo =
      drift_factor *
      (qi - detail::inner_argmin(spec, i, drift_factor * p_min, iv.lo, iv.hi) + res_flow);
  const double d_hi =
      drift_factor *
      (qi - detail::inner_argmin(spec, i, drift_factor * p_max, iv.lo, iv.hi) + res_flow);
  return std::max(std::abs(d_lo), std::abs(d_hi));
}

}  // namespace resop
