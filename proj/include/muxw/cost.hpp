#pragma once

#include <algorithm>

#include "muxw/types.hpp"

namespace muxw {

enum class CostKind { linear, shifted_quadratic, composite };

// Holding-cost function h0 over queue backlogs.
//   linear:             sum_i c_i * x_i
//   shifted_quadratic:  sum_i c_i * (x_i - target)^2
//   composite:          quadratic on app_buffers, linear elsewhere
struct CostFunction {
  CostKind kind = CostKind::linear;
  Vec weights;
  double target = 0.0;
  std::vector<std::size_t> app_buffers;  // quadratic set for composite

  bool is_app_buffer(std::size_t i) const {
    return std::find(app_buffers.begin(), app_buffers.end(), i) !=
           app_buffers.end();
  }

  void check(std::size_t m) const {
    if (weights.size() != m)
      throw StructuralError("cost: weight vector length " +
                            std::to_string(weights.size()) +
                            " != state dimension " + std::to_string(m));
    for (std::size_t i : app_buffers)
      if (i >= m) throw StructuralError("cost: app buffer index out of range");
  }

  double eval(const Vec& x) const {
    check(x.size());
    double s = 0.0;
    switch (kind) {
      case CostKind::linear:
        for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
        break;
      case CostKind::shifted_quadratic:
        for (std::size_t i = 0; i < x.size(); ++i) {
          double d = x[i] - target;
          s += weights[i] * d * d;
        }
        break;
      case CostKind::composite:
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (is_app_buffer(i)) {
            double d = x[i] - target;
            s += weights[i] * d * d;
          } else {
            s += weights[i] * x[i];
          }
        }
        break;
    }
    return s;
  }

  // dh0/dx_i
  double gradient_at(const Vec& x, std::size_t i) const {
    switch (kind) {
      case CostKind::linear:
        return weights[i];
      case CostKind::shifted_quadratic:
        return 2.0 * weights[i] * (x[i] - target);
      case CostKind::composite:
        return is_app_buffer(i) ? 2.0 * weights[i] * (x[i] - target)
                                : weights[i];
    }
    return 0.0;
  }

  Vec gradient(const Vec& x) const {
    check(x.size());
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = gradient_at(x, i);
    return g;
  }

  // d^2 h0 / dx_i^2 (all three kinds are separable)
  double curvature_at(std::size_t i) const {
    switch (kind) {
      case CostKind::linear:
        return 0.0;
      case CostKind::shifted_quadratic:
        return 2.0 * weights[i];
      case CostKind::composite:
        return is_app_buffer(i) ? 2.0 * weights[i] : 0.0;
    }
    return 0.0;
  }
};

inline CostFunction uniform_cost(CostKind kind, std::size_t m, double weight,
                                 double target = 0.0,
                                 std::vector<std::size_t> app_buffers = {}) {
  CostFunction cf;
  cf.kind = kind;
  cf.weights.assign(m, weight);
  cf.target = target;
  cf.app_buffers = std::move(app_buffers);
  return cf;
}

}  // namespace muxw
