#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "muxw/cost.hpp"
#include "muxw/perturbation.hpp"

namespace muxw {

// Weight function mu(x) driving control selection, with an optional analytic
// Jacobian row evaluator. Fields built by build_field carry analytic
// gradients; hand-rolled fields may leave `gradient` empty and fall back to
// finite differences.
struct SchedulingField {
  std::size_t dim = 0;
  std::function<Vec(const Vec&)> value;
  std::function<Vec(const Vec&, std::size_t)> gradient;
  bool analytic = false;

  Vec operator()(const Vec& x) const { return value(x); }
};

// Central finite differences with per-coordinate step 1e-5 * (1 + |x_k|).
inline Vec finite_difference_gradient(const std::function<Vec(const Vec&)>& f,
                                      const Vec& x, std::size_t i) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double h = 1e-5 * (1.0 + std::abs(x[k]));
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    g[k] = (f(xp)[i] - f(xm)[i]) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return g;
}

// Identity field: plain backlog weights (the classical MaxWeight choice).
inline SchedulingField identity_field(std::size_t m) {
  SchedulingField f;
  f.dim = m;
  f.value = [](const Vec& x) { return x; };
  f.gradient = [](const Vec& x, std::size_t i) {
    Vec g(x.size(), 0.0);
    g[i] = 1.0;
    return g;
  };
  f.analytic = true;
  return f;
}

// Builds mu from a holding cost and a perturbation.
//   coupled:   mu(x) = P_theta(x) * grad h0(x), with the diagonal damping
//              matrix; every coordinate vanishes exactly on its boundary.
//   separable: mu(x) = grad of h0(x~) through the chain rule, i.e.
//              mu_i = h0'_i(x~) * dx~_i/dx_i.
inline SchedulingField build_field(const CostFunction& cf,
                                   const Perturbation& p) {
  p.check();
  SchedulingField f;
  f.dim = cf.weights.size();
  f.analytic = true;

  if (p.kind == PerturbationKind::coupled) {
    const double theta = p.theta;
    CostFunction cost = cf;
    f.value = [cost, theta](const Vec& x) {
      cost.check(x.size());
      Vec d = perturbation_matrix_diag(x, theta);
      Vec mu(x.size());
      for (std::size_t i = 0; i < x.size(); ++i)
        mu[i] = cost.gradient_at(x, i) * d[i];
      return mu;
    };
    f.gradient = [cost, theta](const Vec& x, std::size_t i) {
      cost.check(x.size());
      double total = 0.0;
      for (double v : x) total += v;
      double rest = total - x[i];
      double denom = theta * (1.0 + rest);
      double damp = std::exp(-x[i] / denom);
      double gi = cost.gradient_at(x, i);
      Vec g(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (k == i)
          g[k] = cost.curvature_at(i) * (1.0 - damp) + gi * damp / denom;
        else
          g[k] = -gi * x[i] * damp * theta / (denom * denom);
      }
      return g;
    };
  } else {
    Perturbation pert = p;
    CostFunction cost = cf;
    f.value = [cost, pert](const Vec& x) {
      cost.check(x.size());
      Vec mu(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        Vec xt = x;
        xt[i] = pert.scalar(x[i]);
        mu[i] = cost.gradient_at(xt, i) * pert.scalar_derivative(x[i]);
      }
      return mu;
    };
    f.gradient = [cost, pert](const Vec& x, std::size_t i) {
      cost.check(x.size());
      Vec g(x.size(), 0.0);
      Vec xt = x;
      xt[i] = pert.scalar(x[i]);
      double l = pert.scalar_derivative(x[i]);
      g[i] = cost.curvature_at(i) * l * l +
             cost.gradient_at(xt, i) * pert.scalar_second_derivative(x[i]);
      return g;
    };
  }
  return f;
}

// mu / ||mu||_1 with the absolute-value norm; signed entries pass through
// unless clip_negative floors them at zero first.
inline Vec normalize_field(const Vec& mu, bool clip_negative = false) {
  Vec v = mu;
  if (clip_negative)
    for (double& w : v) w = std::max(0.0, w);
  double n = l1_norm(v);
  if (n == 0.0)
    throw NormalizationError("normalize_field: zero weight vector");
  for (double& w : v) w /= n;
  return v;
}

}  // namespace muxw
