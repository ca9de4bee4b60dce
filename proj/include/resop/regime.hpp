#pragma once

/// @file regime.hpp
/// @brief Continuous-time finite-state inflow Markov chain: representation,
///        estimation from discharge series, stationary analysis, and sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "resop/errors.hpp"

namespace resop {

using Matrix = std::vector<std::vector<double>>;

/// Finite-state inflow model. Regime i covers discharges in
/// [bin_edges[i], bin_edges[i+1]); the final edge is +infinity.
struct RegimeModel {
  std::vector<double> bin_edges;       ///< size I+2, first 0, last +inf (m^3/s)
  std::vector<double> representatives; ///< size I+1, Q_i in its bin (m^3/s)
  Matrix rates;                        ///< (I+1)x(I+1) switching rates (1/h)
  double lag_hours = 1.0;              ///< estimation interval h

  int num_regimes() const { return static_cast<int>(representatives.size()); }

  /// Throws config_error on any violated structural invariant.
  void validate() const {
    const int n = num_regimes();
    if (n < 1) throw config_error("RegimeModel: at least one regime required");
    if (static_cast<int>(bin_edges.size()) != n + 1)
      throw config_error("RegimeModel: bin_edges must have one entry more than representatives");
    if (bin_edges.front() != 0.0)
      throw config_error("RegimeModel: first bin edge must be 0");
    if (!std::isinf(bin_edges.back()))
      throw config_error("RegimeModel: last bin edge must be +inf");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
      if (!(bin_edges[i - 1] < bin_edges[i]))
        throw config_error("RegimeModel: bin_edges must be strictly increasing");
    for (int i = 0; i < n; ++i)
      if (!(representatives[i] >= bin_edges[i] && representatives[i] < bin_edges[i + 1]))
        throw config_error("RegimeModel: representative " + std::to_string(i) +
                           " outside its bin");
    if (static_cast<int>(rates.size()) != n)
      throw config_error("RegimeModel: rate matrix must be square with side I+1");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rates[i].size()) != n)
        throw config_error("RegimeModel: rate matrix must be square with side I+1");
      for (int j = 0; j < n; ++j)
        if (i != j && !(rates[i][j] >= 0.0))
          throw config_error("RegimeModel: negative off-diagonal rate at (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (!(lag_hours > 0.0)) throw config_error("RegimeModel: lag_hours must be > 0");
  }
};

/// Maps a discharge to its regime index: the unique i with
/// bin_edges[i] <= discharge < bin_edges[i+1].
inline int classify_inflow(double discharge, const RegimeModel& model) {
  if (!(discharge >= 0.0)) throw config_error("classify_inflow: negative discharge");
  const auto& e = model.bin_edges;
  auto it = std::upper_bound(e.begin(), e.end(), discharge);
  int idx = static_cast<int>(it - e.begin()) - 1;
  if (idx < 0) idx = 0;  // discharge == 0 with edge 0
  if (idx >= model.num_regimes()) idx = model.num_regimes() - 1;
  return idx;
}

/// Empirical one-lag transition probabilities.
/// p_ij = #(pairs i->j) / #(occurrences of i excluding the final sample);
/// rows never visited are made absorbing (p_ii = 1).
inline Matrix estimate_transition_probs(const std::vector<int>& seq, int num_regimes) {
  if (num_regimes < 1) throw config_error("estimate_transition_probs: no regimes");
  if (seq.size() < 2)
    throw config_error("estimate_transition_probs: sequence must have at least 2 samples");
  for (int s : seq)
    if (s < 0 || s >= num_regimes)
      throw config_error("estimate_transition_probs: regime index out of range");
  Matrix counts(num_regimes, std::vector<double>(num_regimes, 0.0));
  std::vector<double> visits(num_regimes, 0.0);
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    counts[seq[k]][seq[k + 1]] += 1.0;
    visits[seq[k]] += 1.0;
  }
  Matrix p(num_regimes, std::vector<double>(num_regimes, 0.0));
  for (int i = 0; i < num_regimes; ++i) {
    if (visits[i] == 0.0) {
      p[i][i] = 1.0;
    } else {
      for (int j = 0; j < num_regimes; ++j) p[i][j] = counts[i][j] / visits[i];
    }
  }
  return p;
}

/// Converts one-lag probabilities into switching rates (1/h):
/// lambda_ij = p_ij / h off-diagonal, lambda_ii = (1 - p_ii) / h.
/// The diagonal is stored for completeness but never consumed downstream,
/// where sums run over j != i only.
inline Matrix rates_from_probs(const Matrix& p, double h) {
  if (!(h > 0.0)) throw config_error("rates_from_probs: lag must be > 0");
  Matrix lam(p.size(), std::vector<double>(p.size(), 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != p.size())
      throw config_error("rates_from_probs: matrix must be square");
    for (std::size_t j = 0; j < p.size(); ++j)
      lam[i][j] = (i == j) ? (1.0 - p[i][i]) / h : p[i][j] / h;
  }
  return lam;
}

namespace detail {

inline void require_row_stochastic(const Matrix& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != p.size())
      throw config_error("stationary_distribution: matrix must be square");
    double sum = 0.0;
    for (double x : p[i]) {
      if (!(x >= 0.0)) throw config_error("stationary_distribution: negative entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw config_error("stationary_distribution: row " + std::to_string(i) +
                         " does not sum to 1");
  }
}

}  // namespace detail

/// Stationary distribution pi with pi P = pi, by lazy power iteration
/// pi <- pi (P + I)/2 from the uniform start. The lazy smoothing removes
/// periodicity, so the iteration converges for every stochastic matrix;
/// for reducible chains the result is the limit from the uniform start.
inline std::vector<double> stationary_distribution(const Matrix& p,
                                                   double tol = 1e-12,
                                                   long max_iters = 1000000) {
  detail::require_row_stochastic(p);
  const std::size_t n = p.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
  for (long it = 0; it < max_iters; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += pi[i] * p[i][j];
      next[j] = 0.5 * (acc + pi[j]);
    }
    double change = 0.0, sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      change = std::max(change, std::abs(next[j] - pi[j]));
      sum += next[j];
    }
    for (std::size_t j = 0; j < n; ++j) next[j] /= sum;  // guard drift
    pi.swap(next);
    if (change <= tol) break;
  }
  return pi;
}

/// One continuous-time path of the jump chain generated by `rates`
/// (time unit = 1 / rate unit). Returns (switch time, regime) pairs starting
/// with (0, initial). Holding time in i is Exp(sum_{j != i} rates[i][j]);
/// the next regime is drawn proportionally to rates[i][j]. A regime with zero
/// exit rate ends the path (the chain stays there forever).
inline std::vector<std::pair<double, int>> sample_regime_path(const Matrix& rates,
                                                              double t_end,
                                                              int initial,
                                                              std::uint64_t seed) {
  if (!(t_end > 0.0)) throw config_error("sample_regime_path: t_end must be > 0");
  const int n = static_cast<int>(rates.size());
  if (initial < 0 || initial >= n)
    throw config_error("sample_regime_path: initial regime out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<double, int>> path{{0.0, initial}};
  double t = 0.0;
  int cur = initial;
  while (true) {
    double exit_rate = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != cur) exit_rate += rates[cur][j];
    if (exit_rate <= 0.0) break;
    const double hold = -std::log1p(-unif(rng)) / exit_rate;
    t += hold;
    if (t >= t_end) break;
    double u = unif(rng) * exit_rate;
    int next = cur;
    for (int j = 0; j < n; ++j) {
      if (j == cur) continue;
      u -= rates[cur][j];
      if (u <= 0.0) {
        next = j;
        break;
      }
    }
    if (next == cur) {  // numerical slack in the cumulative walk
      for (int j = n - 1; j >= 0; --j)
        if (j != cur && rates[cur][j] > 0.0) {
          next = j;
          break;
        }
    }
    cur = next;
    path.emplace_back(t, cur);
  }
  return path;
}

inline std::vector<std::pair<double, int>> sample_regime_path(const RegimeModel& model,
                                                              double t_end_hours,
                                                              int initial,
                                                              std::uint64_t seed) {
  return sample_regime_path(model.rates, t_end_hours, initial, seed);
}

/// Discrete-time chain sampled from one-lag probabilities p; n samples.
inline std::vector<int> sample_discrete_chain(const Matrix& p, std::size_t n,
                                              int initial, std::uint64_t seed) {
  detail::require_row_stochastic(p);
  if (n < 1) throw config_error("sample_discrete_chain: need at least one sample");
  const int m = static_cast<int>(p.size());
  if (initial < 0 || initial >= m)
    throw config_error("sample_discrete_chain: initial regime out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> seq;
  seq.reserve(n);
  seq.push_back(initial);
  int cur = initial;
  for (std::size_t k = 1; k < n; ++k) {
    double u = unif(rng);
    int next = m - 1;
    for (int j = 0; j < m; ++j) {
      u -= p[cur][j];
      if (u <= 0.0) {
        next = j;
        break;
      }
    }
    cur = next;
    seq.push_back(cur);
  }
  return seq;
}

/// Synthetic diagonal-dominant transition matrix mimicking observed hourly
/// inflow dynamics: heavy diagonal (around 0.95 for low regimes, slightly
/// lighter higher up), off-diagonal mass decaying geometrically with regime
/// distance, and a downward bias that makes the lowest regime the most
/// persistent in the stationary sense.
inline Matrix synthetic_transition_matrix(int num_regimes, std::uint64_t seed) {
  if (num_regimes < 2)
    throw config_error("synthetic_transition_matrix: need at least 2 regimes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix p(num_regimes, std::vector<double>(num_regimes, 0.0));
  for (int i = 0; i < num_regimes; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(num_regimes - 1);
    const double diag = (0.95 - 0.10 * frac) + 0.03 * unif(rng);
    double total = 0.0;
    for (int j = 0; j < num_regimes; ++j) {
      if (j == i) continue;
      const double dist = std::abs(j - i);
      const double down_bias = (j < i) ? 2.0 : 1.0;
      p[i][j] = down_bias * std::exp(-1.5 * (dist - 1.0));
      total += p[i][j];
    }
    for (int j = 0; j < num_regimes; ++j)
      if (j != i) p[i][j] *= (1.0 - diag) / total;
    p[i][i] = diag;
  }
  return p;
}

/// Synthetic inflow model: bins of width `bin_width` starting at 0 with
/// midpoint representatives, and rates derived from
/// synthetic_transition_matrix at a 1-hour lag.
inline RegimeModel synthetic_model(int num_regimes, std::uint64_t seed,
                                   double bin_width = 5.0) {
  RegimeModel model;
  model.lag_hours = 1.0;
  for (int i = 0; i < num_regimes; ++i) {
    model.bin_edges.push_back(bin_width * i);
    model.representatives.push_back(bin_width * i + 0.5 * bin_width);
  }
  model.bin_edges.push_back(std::numeric_limits<double>::infinity());
  model.rates = rates_from_probs(synthetic_transition_matrix(num_regimes, seed),
                                 model.lag_hours);
  model.validate();
  return model;
}

/// Hourly discharge series consistent with the chain `p` over the model's
/// bins: each sample is drawn uniformly inside its regime's bin (the last,
/// unbounded bin uses a one-bin-width band above its lower edge).
inline std::vector<double> synthetic_discharge_series(const RegimeModel& model,
                                                      const Matrix& p, std::size_t n,
                                                      int initial, std::uint64_t seed) {
  const std::vector<int> seq = sample_discrete_chain(p, n, initial, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  for (int s : seq) {
    const double lo = model.bin_edges[s];
    double hi = model.bin_edges[s + 1];
    if (std::isinf(hi)) hi = lo + (model.bin_edges[s] - model.bin_edges[s - 1]);
    out.push_back(lo + unif(rng) * (hi - lo) * 0.999999);
  }
  return out;
}

}  // namespace resop
