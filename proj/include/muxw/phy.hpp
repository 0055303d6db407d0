#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "muxw/types.hpp"

namespace muxw {

inline double path_gain(double distance, double exponent) {
  if (distance <= 0.0)
    throw ContractError("path_gain: distance must be positive");
  return std::pow(distance, -exponent);
}

// Cross gains between links: g(j, l) is the gain from the transmitter of
// link j to the receiver of link l; the diagonal carries the direct links.
struct GainMatrix {
  Matrix g;

  std::size_t links() const { return g.rows; }

  void check() const {
    if (g.rows != g.cols) throw StructuralError("gain matrix must be square");
    for (std::size_t j = 0; j < g.rows; ++j)
      for (std::size_t l = 0; l < g.cols; ++l)
        if (g(j, l) < 0.0)
          throw ContractError("gain matrix entries must be nonnegative");
    for (std::size_t l = 0; l < g.rows; ++l)
      if (g(l, l) <= 0.0)
        throw ContractError("gain matrix needs positive direct gains");
  }
};

// Whitespace/comma separated numeric table.
inline GainMatrix load_gain_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gain matrix file: " + path);
  std::vector<Vec> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',' || c == ';') c = ' ';
    std::istringstream ls(line);
    Vec row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("gain matrix file is empty: " + path);
  GainMatrix gm;
  gm.g = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != gm.g.cols)
      throw ConfigError("gain matrix file has ragged rows: " + path);
    for (std::size_t j = 0; j < gm.g.cols; ++j) gm.g(i, j) = rows[i][j];
  }
  gm.check();
  return gm;
}

inline Vec sinr(const GainMatrix& gains, const Vec& power, const Vec& noise) {
  gains.check();
  std::size_t n = gains.links();
  if (power.size() != n || noise.size() != n)
    throw StructuralError("sinr: power/noise length mismatch");
  for (double p : power)
    if (p < 0.0) throw ContractError("sinr: negative power");
  for (double s : noise)
    if (s <= 0.0) throw ContractError("sinr: noise power must be positive");
  Vec out(n);
  for (std::size_t l = 0; l < n; ++l) {
    double interference = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != l) interference += gains.g(j, l) * power[j];
    out[l] = gains.g(l, l) * power[l] / (noise[l] + interference);
  }
  return out;
}

inline double link_rate(double bandwidth_hz, double sinr_value) {
  if (bandwidth_hz <= 0.0) throw ContractError("link_rate: bandwidth <= 0");
  if (sinr_value < 0.0) throw ContractError("link_rate: negative SINR");
  return bandwidth_hz * std::log2(1.0 + sinr_value);
}

namespace detail {

// Inverse of the standard normal CDF: rational initial guess refined by one
// Halley step through erfc, giving errors far below 1e-9.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ContractError("norm_quantile: p must lie in (0, 1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double sqrt_two_pi = 2.506628274631000502;
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * sqrt_two_pi * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace detail

// Inverse Gaussian tail Q^{-1}(p), Q(z) = P(Z > z).
inline double gaussian_tail_inverse(double p) {
  return -detail::norm_quantile(p);
}

// epsilon-outage capacity from the Gaussian approximation of the mutual
// information: mean - sqrt(var) * Q^{-1}(p_out), floored at zero.
inline double outage_capacity(double mean_mi, double var_mi, double p_out) {
  if (var_mi < 0.0) throw ContractError("outage_capacity: negative variance");
  if (!(p_out > 0.0 && p_out < 1.0))
    throw ContractError("outage_capacity: p_out must lie in (0, 1)");
  double cap = mean_mi - std::sqrt(var_mi) * gaussian_tail_inverse(p_out);
  return std::max(0.0, cap);
}

// Per-link bound parameters: alpha*log(z) + beta <= log(1+z), tight at z0.
struct ScaParams {
  double alpha = 1.0;
  double beta = 0.0;
};

inline ScaParams sca_params(double z0) {
  if (z0 <= 0.0) throw ContractError("sca_params: z0 must be positive");
  ScaParams s;
  s.alpha = z0 / (1.0 + z0);
  s.beta = std::log(1.0 + z0) - s.alpha * std::log(z0);
  return s;
}

struct ScaState {
  Vec alpha;
  Vec beta;

  static ScaState high_sinr(std::size_t links) {
    return {Vec(links, 1.0), Vec(links, 0.0)};
  }
};

// Transmitter-side power constraints: each node splits at most p_max over
// its outgoing links, every link keeps at least p_min.
struct PowerBudget {
  double p_max = 1.0;
  double p_min = 1e-6;
  std::vector<std::size_t> node_of_link;
  std::size_t num_nodes = 0;

  void check(std::size_t links) const {
    if (node_of_link.size() != links)
      throw StructuralError("power budget: node map length mismatch");
    if (p_max <= 0.0 || p_min <= 0.0 || p_min > p_max)
      throw ContractError("power budget: need 0 < p_min <= p_max");
    for (std::size_t n : node_of_link)
      if (n >= num_nodes)
        throw StructuralError("power budget: node index out of range");
    std::vector<std::size_t> count(num_nodes, 0);
    for (std::size_t n : node_of_link) ++count[n];
    for (std::size_t c : count)
      if (static_cast<double>(c) * p_min > p_max)
        throw ContractError("power budget: floor exceeds node budget");
  }

  std::vector<std::vector<std::size_t>> links_per_node(std::size_t links) const {
    std::vector<std::vector<std::size_t>> out(num_nodes);
    for (std::size_t l = 0; l < links; ++l) out[node_of_link[l]].push_back(l);
    return out;
  }
};

inline PowerBudget default_budget(std::size_t links, double p_max) {
  PowerBudget b;
  b.p_max = p_max;
  b.p_min = 1e-6 * p_max;
  b.node_of_link.resize(links);
  std::iota(b.node_of_link.begin(), b.node_of_link.end(), std::size_t{0});
  b.num_nodes = links;
  return b;
}

// Concave surrogate of the weighted sum rate in log powers; equals the true
// weighted rate wherever every active bound is tight.
inline double surrogate_objective(const Vec& log_power, const Vec& weights,
                                  const ScaState& state,
                                  const GainMatrix& gains, const Vec& noise,
                                  double bandwidth_hz) {
  std::size_t n = gains.links();
  if (log_power.size() != n || weights.size() != n ||
      state.alpha.size() != n || state.beta.size() != n || noise.size() != n)
    throw StructuralError("surrogate_objective: dimension mismatch");
  const double k = bandwidth_hz / std::log(2.0);
  double total = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    if (weights[l] == 0.0) continue;
    double interference = noise[l];
    for (std::size_t j = 0; j < n; ++j)
      if (j != l) interference += gains.g(j, l) * std::exp(log_power[j]);
    double log_sinr =
        std::log(gains.g(l, l)) + log_power[l] - std::log(interference);
    total += weights[l] * k * (state.alpha[l] * log_sinr + state.beta[l]);
  }
  return total;
}

// Euclidean projection onto {y >= lo componentwise, sum(y) <= cap} by exact
// water-filling over the sorted excesses.
inline Vec project_capped_simplex(const Vec& z, double lo, double cap) {
  std::size_t n = z.size();
  if (static_cast<double>(n) * lo > cap + 1e-15)
    throw ContractError("projection: floor exceeds cap");
  Vec y(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::max(z[i], lo);
    total += y[i];
  }
  if (total <= cap) return y;
  Vec d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = z[i] - lo;
  std::sort(d.begin(), d.end(), std::greater<double>());
  double budget = cap - static_cast<double>(n) * lo;
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t kk = 0; kk < n; ++kk) {
    prefix += d[kk];
    double cand = (prefix - budget) / static_cast<double>(kk + 1);
    bool upper_ok = d[kk] - cand >= -1e-15;
    bool lower_ok = kk + 1 == n || d[kk + 1] - cand <= 1e-15;
    if (upper_ok && lower_ok) {
      tau = cand;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) y[i] = lo + std::max(0.0, z[i] - lo - tau);
  return y;
}

struct SubproblemResult {
  Vec power;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
};

struct SubproblemOptions {
  std::size_t max_iterations = 4000;
  double rel_improvement_tol = 1e-12;
};

namespace detail {

inline Vec project_per_node(
    const Vec& p, const PowerBudget& budget,
    const std::vector<std::vector<std::size_t>>& node_links) {
  Vec out = p;
  for (const auto& links : node_links) {
    if (links.empty()) continue;
    Vec z(links.size());
    for (std::size_t k = 0; k < links.size(); ++k) z[k] = p[links[k]];
    Vec proj = project_capped_simplex(z, budget.p_min, budget.p_max);
    for (std::size_t k = 0; k < links.size(); ++k) out[links[k]] = proj[k];
  }
  return out;
}

// Gradient of the bandwidth-normalized surrogate in power coordinates.
inline Vec surrogate_gradient(const Vec& p, const Vec& weights,
                              const ScaState& state, const GainMatrix& gains,
                              const Vec& noise) {
  std::size_t n = p.size();
  Vec denom(n);
  for (std::size_t l = 0; l < n; ++l) {
    denom[l] = noise[l];
    for (std::size_t j = 0; j < n; ++j)
      if (j != l) denom[l] += gains.g(j, l) * p[j];
  }
  Vec grad(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    if (weights[l] != 0.0) grad[l] += weights[l] * state.alpha[l] / p[l];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == l || weights[j] == 0.0) continue;
      grad[l] -= weights[j] * state.alpha[j] * gains.g(l, j) / denom[j];
    }
  }
  return grad;
}

}  // namespace detail

// Maximize the surrogate over the per-node power polytopes with projected
// gradient ascent (Armijo-style halving on the step). All-zero weights make
// the objective constant, so the start point comes back with residual zero;
// otherwise zero-weight links are pinned to the floor.
inline SubproblemResult solve_convex_subproblem(
    const Vec& weights, const ScaState& state, const GainMatrix& gains,
    const Vec& noise, double bandwidth_hz, const PowerBudget& budget,
    const Vec& start = {}, const SubproblemOptions& opts = {}) {
  gains.check();
  std::size_t n = gains.links();
  budget.check(n);
  if (weights.size() != n) throw StructuralError("subproblem: weights length");
  for (double w : weights)
    if (w < 0.0) throw ContractError("subproblem: negative weight");
  auto node_links = budget.links_per_node(n);

  Vec p;
  if (!start.empty()) {
    if (start.size() != n) throw StructuralError("subproblem: start length");
    p = detail::project_per_node(start, budget, node_links);
  } else {
    p.assign(n, budget.p_min);
    for (const auto& links : node_links)
      for (std::size_t l : links)
        p[l] = budget.p_max / static_cast<double>(links.size());
    p = detail::project_per_node(p, budget, node_links);
  }

  bool any_weight = false;
  for (double w : weights) any_weight = any_weight || w > 0.0;
  SubproblemResult res;
  if (!any_weight) {
    res.power = p;
    res.objective = 0.0;
    return res;
  }
  for (std::size_t l = 0; l < n; ++l)
    if (weights[l] == 0.0) p[l] = budget.p_min;

  // optimize in bandwidth-normalized units so improvement tolerances and the
  // stationarity probe work at O(1) scale regardless of the channel width
  const double k_scale = bandwidth_hz / std::log(2.0);
  auto eval = [&](const Vec& pw) {
    Vec lp(n);
    for (std::size_t l = 0; l < n; ++l) lp[l] = std::log(pw[l]);
    return surrogate_objective(lp, weights, state, gains, noise, bandwidth_hz) /
           k_scale;
  };

  double f = eval(p);
  double eta = budget.p_max;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    Vec g = detail::surrogate_gradient(p, weights, state, gains, noise);
    for (std::size_t l = 0; l < n; ++l)
      if (weights[l] == 0.0) g[l] = 0.0;
    double gnorm = l2_norm(g);
    if (gnorm == 0.0) break;
    double step = eta;
    bool improved = false;
    Vec cand;
    double fc = f;
    for (int halvings = 0; halvings < 60; ++halvings) {
      Vec trial(n);
      for (std::size_t l = 0; l < n; ++l) trial[l] = p[l] + step * g[l];
      trial = detail::project_per_node(trial, budget, node_links);
      for (std::size_t l = 0; l < n; ++l)
        if (weights[l] == 0.0) trial[l] = budget.p_min;
      double ft = eval(trial);
      if (ft > f) {
        cand = std::move(trial);
        fc = ft;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    eta = std::min(step * 2.0, budget.p_max * 1e3);
    double gain = fc - f;
    p = std::move(cand);
    f = fc;
    if (gain < opts.rel_improvement_tol * (1.0 + std::abs(f))) {
      ++it;
      break;
    }
  }

  Vec g = detail::surrogate_gradient(p, weights, state, gains, noise);
  for (std::size_t l = 0; l < n; ++l)
    if (weights[l] == 0.0) g[l] = 0.0;
  const double probe = 1e-6;
  Vec moved(n);
  for (std::size_t l = 0; l < n; ++l) moved[l] = p[l] + probe * g[l];
  moved = detail::project_per_node(moved, budget, node_links);
  double r = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double dlt = (moved[l] - p[l]) / probe;
    r += dlt * dlt;
  }
  res.power = p;
  res.objective = f * k_scale;
  res.kkt_residual = std::sqrt(r);
  res.iterations = it;
  return res;
}

struct ScaOptions {
  std::size_t max_outer_iterations = 20;
  double outer_rel_tol = 1e-4;
  SubproblemOptions inner;
};

struct ScaResult {
  Vec power;
  Vec rates;  // true Shannon rates at the final powers, bit/s
  ScaState state;
  std::size_t outer_iterations = 0;
  Vec weighted_sum_rate_trace;  // true weighted sum rate after each maximize
};

// Alternating maximize/tighten loop. Starts from the high-SINR bound
// (alpha=1, beta=0), warm-starts each subproblem at the previous powers, and
// stops when tightening no longer moves any link's surrogate rate by more
// than the relative tolerance.
inline ScaResult sca_power_control(const Vec& weights, const GainMatrix& gains,
                                   const Vec& noise, double bandwidth_hz,
                                   const PowerBudget& budget,
                                   const ScaOptions& opts = {},
                                   const ScaState* warm_state = nullptr,
                                   const Vec* warm_power = nullptr) {
  gains.check();
  std::size_t n = gains.links();
  const double k_scale = bandwidth_hz / std::log(2.0);
  ScaResult out;
  out.state = warm_state ? *warm_state : ScaState::high_sinr(n);
  Vec p_start = warm_power ? *warm_power : Vec{};

  auto surrogate_rates = [&](const Vec& gamma, const ScaState& st) {
    Vec r(n);
    for (std::size_t l = 0; l < n; ++l)
      r[l] = gamma[l] > 0.0
                 ? k_scale * (st.alpha[l] * std::log(gamma[l]) + st.beta[l])
                 : 0.0;
    return r;
  };

  for (std::size_t t = 0; t < opts.max_outer_iterations; ++t) {
    SubproblemResult sub = solve_convex_subproblem(
        weights, out.state, gains, noise, bandwidth_hz, budget, p_start,
        opts.inner);
    out.power = sub.power;
    ++out.outer_iterations;
    Vec gamma = sinr(gains, out.power, noise);
    double wsr = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      wsr += weights[l] * link_rate(bandwidth_hz, gamma[l]);
    out.weighted_sum_rate_trace.push_back(wsr);

    ScaState next = out.state;
    for (std::size_t l = 0; l < n; ++l) {
      if (gamma[l] > 0.0) {
        ScaParams sp = sca_params(gamma[l]);
        next.alpha[l] = sp.alpha;
        next.beta[l] = sp.beta;
      }
    }
    Vec before = surrogate_rates(gamma, out.state);
    Vec after = surrogate_rates(gamma, next);
    double worst = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      double denom = std::max(std::abs(before[l]), 1e-12);
      worst = std::max(worst, std::abs(after[l] - before[l]) / denom);
    }
    out.state = next;
    p_start = out.power;
    if (worst < opts.outer_rel_tol) break;
  }

  Vec gamma = sinr(gains, out.power, noise);
  out.rates.resize(n);
  for (std::size_t l = 0; l < n; ++l)
    out.rates[l] = link_rate(bandwidth_hz, gamma[l]);
  return out;
}

struct LinkWeightSet {
  Vec weights;
  std::vector<std::size_t> commodity;
};

// Backpressure link weights from per-node, per-commodity field values: each
// link carries its best differential commodity, clipped at zero and gated by
// the chosen schedule. An optional carrier mask (nodes x commodities, nonzero
// = node holds a queue for that commodity) restricts each link to commodities
// both endpoints can hold; a link with no eligible commodity gets weight zero.
inline LinkWeightSet bppc_link_weights(
    const Matrix& node_field, const std::vector<std::pair<std::size_t, std::size_t>>& links,
    const ControlAction& schedule, const Matrix* mask = nullptr) {
  if (schedule.size() != links.size())
    throw StructuralError("bppc_link_weights: schedule length mismatch");
  std::size_t commodities = node_field.cols;
  if (commodities == 0)
    throw StructuralError("bppc_link_weights: no commodities");
  if (mask && (mask->rows != node_field.rows || mask->cols != node_field.cols))
    throw StructuralError("bppc_link_weights: mask shape mismatch");
  LinkWeightSet out;
  out.weights.resize(links.size());
  out.commodity.resize(links.size());
  for (std::size_t l = 0; l < links.size(); ++l) {
    auto [src, dst] = links[l];
    if (src >= node_field.rows || dst >= node_field.rows)
      throw StructuralError("bppc_link_weights: node index out of range");
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    bool any = false;
    for (std::size_t c = 0; c < commodities; ++c) {
      if (mask && ((*mask)(src, c) == 0.0 || (*mask)(dst, c) == 0.0)) continue;
      double diff = node_field(src, c) - node_field(dst, c);
      if (diff > best) {
        best = diff;
        best_c = c;
        any = true;
      }
    }
    out.weights[l] = any && schedule[l] ? std::max(0.0, best) : 0.0;
    out.commodity[l] = best_c;
  }
  return out;
}

}  // namespace muxw
