#pragma once

/// @file costs.hpp
/// @brief Running penalties on discharge and volume, and the state-dependent
///        admissible control interval.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "resop/errors.hpp"
#include "resop/regime.hpp"

namespace resop {

/// Optional high-flow penalty term: weight * max(q - threshold, 0)^{m+1}/(m+1),
/// sharing the exponent m of the target-deviation term.
struct HighFlowPenalty {
  double weight = 0.0;     ///< y'
  double threshold = 0.0;  ///< q' (m^3/s)
};

/// Comfort volume band [a, b], optionally a piecewise-constant schedule in t.
/// Entry k applies for t in [times[k], times[k+1]); queries before times[0]
/// use the first entry, at or after the last time the last entry.
struct BandSchedule {
  std::vector<double> times{0.0};
  std::vector<double> a;
  std::vector<double> b;

  static BandSchedule constant(double a0, double b0) {
    BandSchedule s;
    s.a = {a0};
    s.b = {b0};
    return s;
  }

  std::pair<double, double> at(double t) const {
    std::size_t idx = 0;
    while (idx + 1 < times.size() && t >= times[idx + 1]) ++idx;
    return {a[idx], b[idx]};
  }
};

/// Residual (environmental base) flow entering the water balance alongside
/// the inflow. Bounds and the Lipschitz constant are declared by the
/// registrant; they feed the capacity check and the Hamiltonian Lipschitz
/// property. The default is identically zero.
struct ResidualFlow {
  std::function<double(double t, double v)> fn;  ///< null means 0
  double lower = 0.0;      ///< inf over (t, v)
  double upper = 0.0;      ///< sup over (t, v)
  double lipschitz_v = 0.0;

  double operator()(double t, double v) const { return fn ? fn(t, v) : 0.0; }
};

/// Penalty weights, control bounds, comfort band, and discounting.
struct CostSpec {
  double m_exp = 1.0;  ///< target-deviation exponent m > 0
  double n_exp = 1.0;  ///< shortfall exponent n > 0
  double w = 1.0;      ///< shortfall weight > 0
  double y = 1.0;      ///< volume penalty weight > 0
  std::vector<double> target;     ///< per-regime target discharge (m^3/s)
  std::vector<double> threshold;  ///< per-regime threshold discharge (m^3/s)
  std::optional<HighFlowPenalty> high_flow;
  BandSchedule band;
  double delta = 0.0;  ///< discount rate (1/day), >= 0
  double q_min = 0.0;
  double q_max = 1.0;
  double vbar = 1.0;  ///< reservoir capacity, volume units of the band
  ResidualFlow residual;

  double target_of(int i) const {
    return target.size() == 1 ? target[0] : target[static_cast<std::size_t>(i)];
  }
  double threshold_of(int i) const {
    return threshold.size() == 1 ? threshold[0] : threshold[static_cast<std::size_t>(i)];
  }

  /// Structural invariants that do not involve the regime model.
  void validate() const {
    if (!(m_exp > 0.0 && n_exp > 0.0)) throw config_error("CostSpec: exponents must be > 0");
    if (!(w > 0.0)) throw config_error("CostSpec: w must be > 0");
    if (!(y > 0.0)) throw config_error("CostSpec: y must be > 0");
    if (!(delta >= 0.0)) throw config_error("CostSpec: delta must be >= 0");
    if (!(q_min >= 0.0 && q_min < q_max)) throw config_error("CostSpec: need 0 <= q_min < q_max");
    if (!(vbar > 0.0)) throw config_error("CostSpec: vbar must be > 0");
    if (target.empty() || threshold.empty())
      throw config_error("CostSpec: target and threshold discharges required");
    if (band.a.size() != band.b.size() || band.a.size() != band.times.size() || band.a.empty())
      throw config_error("CostSpec: band schedule arrays must align and be nonempty");
    for (std::size_t k = 0; k < band.a.size(); ++k)
      if (!(0.0 < band.a[k] && band.a[k] < band.b[k] && band.b[k] < vbar))
        throw config_error("CostSpec: band must satisfy 0 < a < b < vbar at every time");
    if (high_flow && !(high_flow->weight > 0.0))
      throw config_error("CostSpec: high-flow weight must be > 0 when configured");
  }
};

/// Capacity assumption: the control range must bracket every regime's net
/// inflow so the boundary control intervals of A(0) and A(vbar) are nonempty.
inline void check_capacity(const CostSpec& spec, const RegimeModel& model) {
  const double q_top = *std::max_element(model.representatives.begin(),
                                         model.representatives.end());
  if (!(spec.q_max > q_top + spec.residual.upper))
    throw config_error("capacity assumption violated: q_max <= max Q_i + sup residual");
  if (!(spec.q_min < model.representatives.front() + spec.residual.lower))
    throw config_error("capacity assumption violated: q_min >= Q_0 + inf residual");
}

/// Combined structural validation of a (costs, regimes) pairing.
inline void validate(const CostSpec& spec, const RegimeModel& model) {
  model.validate();
  spec.validate();
  const auto n = static_cast<std::size_t>(model.num_regimes());
  if (spec.target.size() != 1 && spec.target.size() != n)
    throw config_error("CostSpec: target discharge count must be 1 or one per regime");
  if (spec.threshold.size() != 1 && spec.threshold.size() != n)
    throw config_error("CostSpec: threshold discharge count must be 1 or one per regime");
  check_capacity(spec, model);
}

namespace detail {

/// |x|^(e+1)/(e+1) with fast paths for the common integer exponents.
inline double power_term(double x, double e) {
  x = std::abs(x);
  if (e == 1.0) return 0.5 * x * x;
  if (e == 2.0) return x * x * x / 3.0;
  return std::pow(x, e + 1.0) / (e + 1.0);
}

}  // namespace detail

/// Discharge penalty f(t, q, i): target deviation + environmental shortfall
/// + optional high-flow excess. Convex in q, zero at q = target when
/// target >= threshold and below the high-flow threshold.
inline double flow_penalty(const CostSpec& spec, double t, double q, int i) {
  (void)t;
  double f = detail::power_term(spec.target_of(i) - q, spec.m_exp);
  const double shortfall = spec.threshold_of(i) - q;
  if (shortfall > 0.0) f += spec.w * detail::power_term(shortfall, spec.n_exp);
  if (spec.high_flow) {
    const double excess = q - spec.high_flow->threshold;
    if (excess > 0.0) f += spec.high_flow->weight * detail::power_term(excess, spec.m_exp);
  }
  return f;
}

/// Volume penalty g(t, v): y outside the closed band [a_t, b_t], else 0.
inline double volume_penalty(const CostSpec& spec, double t, double v) {
  const auto [a, b] = spec.band.at(t);
  return (v < a || v > b) ? spec.y : 0.0;
}

struct ControlInterval {
  double lo;
  double hi;
};

/// Admissible discharge interval A(v): the full technological range in the
/// interior, restricted at the exact endpoints v = 0 (no emptying below the
/// net inflow) and v = vbar (no filling above it). Endpoint cases apply only
/// at exact equality; interior vertices always get [q_min, q_max].
inline ControlInterval control_interval(const CostSpec& spec, const RegimeModel& model,
                                        double t, double v, int i) {
  ControlInterval iv{spec.q_min, spec.q_max};
  if (v == 0.0) {
    iv.hi = model.representatives[static_cast<std::size_t>(i)] + spec.residual(t, 0.0);
  } else if (v == spec.vbar) {
    iv.lo = model.representatives[static_cast<std::size_t>(i)] + spec.residual(t, spec.vbar);
  }
  if (!(iv.lo <= iv.hi))
    throw config_error("control_interval: empty interval (capacity assumption violated)");
  return iv;
}

}  // namespace resop
