#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "muxw/field.hpp"

namespace muxw {

struct ShellResult {
  double radius = 0.0;
  double worst_violation = 0.0;  // signed margin; <= 0 means the bound held
  bool pass = false;
};

// Outcome of one sampled condition check. Shell checks fill `shells` per
// radius; grid checks reuse the same slots with the grid anchor as radius.
// `aux` carries a secondary branch (e.g. the strong gradient bound) and
// `component_pass` per-queue outcomes for grid checks.
struct AuditReport {
  std::string condition;
  double threshold = 0.0;
  std::size_t samples = 0;
  std::vector<ShellResult> shells;
  std::vector<ShellResult> aux;
  std::vector<std::uint8_t> component_pass;
  bool pass = false;
  double pass_radius = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

inline std::vector<double> default_shell_radii() {
  return {1e1, 1e2, 1e3, 1e4};
}

// Geometric grid for scalar growth checks.
inline std::vector<double> geometric_grid(double lo = 1e-2, double hi = 1e6,
                                          std::size_t points = 200) {
  if (lo <= 0.0 || hi <= lo || points < 2)
    throw ContractError("geometric_grid: need 0 < lo < hi and >= 2 points");
  std::vector<double> g(points);
  double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) g[k] = lo * std::exp(step * k);
  return g;
}

namespace detail {

inline Vec random_positive_direction(std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec d(m);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = std::abs(n(rng));
      norm += d[i] * d[i];
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& v : d) v /= norm;
  return d;
}

// Uniform draw from the radius-r Euclidean ball (signed components).
inline Vec random_ball_point(std::size_t m, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec d(m);
  double norm = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    d[i] = n(rng);
    norm += d[i] * d[i];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) return Vec(m, 0.0);
  double scale = r * std::pow(u(rng), 1.0 / static_cast<double>(m)) / norm;
  for (double& v : d) v *= scale;
  return d;
}

// mu / ||mu||_1 with the all-zero convention for degenerate states, so
// audits remain defined on the measure-zero set where the field vanishes.
inline Vec normalized_or_zero(const Vec& mu) {
  double n = l1_norm(mu);
  if (n == 0.0) return Vec(mu.size(), 0.0);
  Vec v = mu;
  for (double& w : v) w /= n;
  return v;
}

inline void finalize_shell_report(AuditReport& r) {
  r.pass = !r.shells.empty();
  for (const auto& s : r.shells) r.pass = r.pass && s.pass;
  r.pass_radius = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = r.shells.size(); k-- > 0;) {
    if (!r.shells[k].pass) break;
    r.pass_radius = r.shells[k].radius;
  }
}

inline Vec gradient_row(const SchedulingField& f, const Vec& x,
                        std::size_t i) {
  if (f.gradient) return f.gradient(x, i);
  return finite_difference_gradient(f.value, x, i);
}

}  // namespace detail

// Smoothness of the normalized field: across each shell ||x|| = R, a
// perturbation within the radius-c1 ball must move every normalized
// component by at most eps1.
inline AuditReport check_A1(const SchedulingField& field, double eps1,
                            double c1, const std::vector<double>& radii,
                            std::size_t samples, const RngHandle& rng_handle) {
  if (field.dim == 0) throw AuditError("check_A1: field has no dimension");
  auto rng = rng_handle.engine();
  AuditReport r;
  r.condition = "A1";
  r.threshold = eps1;
  r.samples = samples;
  for (double radius : radii) {
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      Vec x = detail::random_positive_direction(field.dim, rng);
      for (double& v : x) v *= radius;
      Vec dx = detail::random_ball_point(field.dim, c1, rng);
      Vec xp(field.dim);
      for (std::size_t i = 0; i < field.dim; ++i)
        xp[i] = std::max(0.0, x[i] + dx[i]);
      Vec a = detail::normalized_or_zero(field(x));
      Vec b = detail::normalized_or_zero(field(xp));
      for (std::size_t i = 0; i < field.dim; ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    r.shells.push_back({radius, worst - eps1, worst <= eps1});
  }
  detail::finalize_shell_report(r);
  return r;
}

// Boundary decay: on shells ||x|| = R, coordinates with x_i < c2 must carry
// at most eps2 of the normalized weight.
inline AuditReport check_A2(const SchedulingField& field, double eps2,
                            double c2, const std::vector<double>& radii,
                            std::size_t samples, const RngHandle& rng_handle) {
  if (field.dim < 2) throw AuditError("check_A2: needs at least 2 queues");
  auto rng = rng_handle.engine();
  std::uniform_real_distribution<double> low(0.0, c2);
  std::uniform_int_distribution<std::size_t> coord(0, field.dim - 1);
  AuditReport r;
  r.condition = "A2";
  r.threshold = eps2;
  r.samples = samples;
  for (double radius : radii) {
    double worst = -eps2;
    for (std::size_t s = 0; s < samples; ++s) {
      std::size_t i = coord(rng);
      double xi = std::min(low(rng), radius * 0.5);
      Vec x = detail::random_positive_direction(field.dim - 1, rng);
      double rest_norm = std::sqrt(std::max(0.0, radius * radius - xi * xi));
      Vec state(field.dim);
      std::size_t k = 0;
      for (std::size_t j = 0; j < field.dim; ++j)
        state[j] = (j == i) ? xi : x[k++] * rest_norm;
      Vec mu_bar = detail::normalized_or_zero(field(state));
      for (std::size_t j = 0; j < field.dim; ++j)
        if (state[j] < c2)
          worst = std::max(worst, std::abs(mu_bar[j]) - eps2);
    }
    r.shells.push_back({radius, worst, worst <= 0.0});
  }
  detail::finalize_shell_report(r);
  return r;
}

// Relative gradient bound. Weak branch (decides the verdict): for every i,
// ||grad mu_i||_1 <= eps * ||mu||_1 on sampled shells; the stored violation
// is the ratio margin max_i ||grad mu_i||_1 / ||mu||_1 - eps. Strong branch
// (aux): ||grad log mu_i||_1 <= eps where mu_i > 0.
inline AuditReport check_C1(const SchedulingField& field, double eps,
                            const std::vector<double>& radii,
                            std::size_t samples, const RngHandle& rng_handle) {
  if (field.dim == 0) throw AuditError("check_C1: field has no dimension");
  auto rng = rng_handle.engine();
  AuditReport r;
  r.condition = "C1";
  r.threshold = eps;
  r.samples = samples;
  for (double radius : radii) {
    double worst_weak = -eps;
    double worst_strong = -eps;
    for (std::size_t s = 0; s < samples; ++s) {
      Vec x = detail::random_positive_direction(field.dim, rng);
      for (double& v : x) v *= radius;
      Vec mu = field(x);
      double mu_l1 = l1_norm(mu);
      if (mu_l1 == 0.0) continue;
      for (std::size_t i = 0; i < field.dim; ++i) {
        double row_l1 = l1_norm(detail::gradient_row(field, x, i));
        worst_weak = std::max(worst_weak, row_l1 / mu_l1 - eps);
        if (mu[i] > 0.0)
          worst_strong = std::max(worst_strong, row_l1 / mu[i] - eps);
      }
    }
    r.shells.push_back({radius, worst_weak, worst_weak <= 0.0});
    r.aux.push_back({radius, worst_strong, worst_strong <= 0.0});
  }
  detail::finalize_shell_report(r);
  return r;
}

// Exact boundary vanishing: mu_i must be zero (to tolerance) whenever
// x_i = 0, on random states with random coordinate subsets zeroed.
inline AuditReport check_C2(const SchedulingField& field, std::size_t samples,
                            const RngHandle& rng_handle, double tol = 1e-12,
                            double state_scale = 100.0) {
  if (field.dim == 0) throw AuditError("check_C2: field has no dimension");
  auto rng = rng_handle.engine();
  std::uniform_real_distribution<double> u(0.0, state_scale);
  std::uniform_int_distribution<std::size_t> coord(0, field.dim - 1);
  AuditReport r;
  r.condition = "C2";
  r.threshold = tol;
  r.samples = samples;
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x(field.dim);
    for (double& v : x) v = u(rng);
    std::size_t zeros = 1 + coord(rng) % field.dim;
    for (std::size_t z = 0; z < zeros; ++z) x[coord(rng)] = 0.0;
    Vec mu = field(x);
    for (std::size_t i = 0; i < field.dim; ++i)
      if (x[i] == 0.0) worst = std::max(worst, std::abs(mu[i]));
  }
  r.shells.push_back({0.0, worst - tol, worst <= tol});
  r.pass = r.shells.front().pass;
  r.pass_radius = 0.0;
  return r;
}

namespace detail {

// Difference-quotient envelope: Lipschitz evidence = the max quotient over
// the upper half of the grid does not exceed the lower half's (with slack).
inline bool quotient_envelope_bounded(const std::vector<double>& xs,
                                      const std::vector<double>& ys,
                                      double& head_max, double& tail_max) {
  head_max = 0.0;
  tail_max = 0.0;
  std::size_t half = xs.size() / 2;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    double q = std::abs(ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
    (k < half ? head_max : tail_max) = std::max(k < half ? head_max : tail_max, q);
  }
  return tail_max <= head_max * 1.05 + 1e-9;
}

}  // namespace detail

// Derivative growth of a separable perturbation: dx~/dx must be Lipschitz
// (bounded difference quotients) and diverge as x grows. The divergence
// margin compares the last grid decade against the one before it.
inline AuditReport check_D1(const Perturbation& p,
                            const std::vector<double>& grid,
                            double divergence_margin = 0.1) {
  if (!p.separable())
    throw AuditError("check_D1: requires a separable perturbation");
  if (grid.size() < 8) throw AuditError("check_D1: grid too small");
  p.check();
  std::vector<double> deriv(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    deriv[k] = p.scalar_derivative(grid[k]);
  double head_max = 0.0, tail_max = 0.0;
  bool lipschitz = detail::quotient_envelope_bounded(grid, deriv, head_max, tail_max);
  double x_end = grid.back();
  double growth = p.scalar_derivative(x_end) - p.scalar_derivative(x_end / 10.0);
  bool diverges = growth >= divergence_margin;
  AuditReport r;
  r.condition = "D1";
  r.threshold = divergence_margin;
  r.samples = grid.size();
  r.shells.push_back({grid[grid.size() / 2], tail_max - head_max * 1.05, lipschitz});
  r.aux.push_back({x_end, divergence_margin - growth, diverges});
  r.pass = lipschitz && diverges;
  r.note = lipschitz
               ? (diverges ? "derivative bounded-slope and divergent"
                           : "derivative stays bounded; divergence fails")
               : "difference quotients grow along the grid";
  return r;
}

// Cost-vs-perturbation growth: per coordinate, h0' must be Lipschitz in its
// argument and dominate (dx~/dx)^(1+eps) on the top grid decade.
inline AuditReport check_D2(const Perturbation& p, const CostFunction& cf,
                            const std::vector<double>& grid, double eps = 0.1) {
  if (!p.separable())
    throw AuditError("check_D2: requires a separable perturbation");
  if (grid.size() < 8) throw AuditError("check_D2: grid too small");
  p.check();
  std::size_t m = cf.weights.size();
  AuditReport r;
  r.condition = "D2";
  r.threshold = eps;
  r.samples = grid.size();
  r.component_pass.assign(m, 1);
  double x_end = grid.back();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> h0p(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Vec state(m, 0.0);
      state[i] = grid[k];
      h0p[k] = cf.gradient_at(state, i);
    }
    double head_max = 0.0, tail_max = 0.0;
    bool lipschitz = detail::quotient_envelope_bounded(grid, h0p, head_max, tail_max);
    bool dominates = true;
    double margin = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] < x_end / 10.0) continue;
      Vec state(m, 0.0);
      state[i] = p.scalar(grid[k]);
      double lhs = cf.gradient_at(state, i);
      double rhs = std::pow(std::max(p.scalar_derivative(grid[k]), 0.0), 1.0 + eps);
      margin = std::max(margin, rhs - lhs);
      if (lhs < rhs) dominates = false;
    }
    r.component_pass[i] = lipschitz && dominates;
    worst = std::max(worst, margin);
  }
  r.shells.push_back({x_end, worst, true});
  r.pass = true;
  for (auto cpass : r.component_pass) r.pass = r.pass && cpass;
  r.shells.back().pass = r.pass;
  return r;
}

// Logarithmic-regret growth condition: h0'_i(x) >= eps * x_i along the grid,
// evaluated per coordinate with the other queues empty.
inline AuditReport check_cond_log(const CostFunction& cf, double eps,
                                  const std::vector<double>& grid) {
  if (grid.empty()) throw AuditError("check_cond_log: empty grid");
  std::size_t m = cf.weights.size();
  AuditReport r;
  r.condition = "CondLog";
  r.threshold = eps;
  r.samples = grid.size();
  r.component_pass.assign(m, 1);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    double margin = -std::numeric_limits<double>::infinity();
    for (double t : grid) {
      Vec state(m, 0.0);
      state[i] = t;
      margin = std::max(margin, eps * t - cf.gradient_at(state, i));
    }
    r.component_pass[i] = margin <= 0.0;
    worst = std::max(worst, margin);
  }
  r.shells.push_back({grid.back(), worst, worst <= 0.0});
  r.pass = true;
  for (auto cpass : r.component_pass) r.pass = r.pass && cpass;
  return r;
}

struct StabilityVerdict {
  bool stable = false;
  double slope = 0.0;
};

// Trailing-mean smoothing followed by a least-squares fit over the second
// half of the series; the verdict is stable iff the fitted slope stays at or
// below `tol` (Mbit per slot).
inline StabilityVerdict empirical_stability(const Vec& series,
                                            std::size_t window = 100,
                                            double tol = 1e-3) {
  if (window == 0) throw ContractError("empirical_stability: zero window");
  if (series.size() < 2 * window)
    throw ContractError("empirical_stability: series shorter than 2x window");
  Vec smooth(series.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    acc += series[t];
    if (t >= window) acc -= series[t - window];
    smooth[t] = acc / static_cast<double>(std::min(t + 1, window));
  }
  std::size_t start = series.size() / 2;
  std::size_t n = series.size() - start;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double tx = static_cast<double>(k);
    double ty = smooth[start + k];
    sx += tx;
    sy += ty;
    sxx += tx * tx;
    sxy += tx * ty;
  }
  double denom = n * sxx - sx * sx;
  double slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
  return {slope <= tol, slope};
}

}  // namespace muxw
