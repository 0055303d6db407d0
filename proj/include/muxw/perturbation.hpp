#pragma once

#include <cmath>

#include "muxw/types.hpp"

namespace muxw {

enum class PerturbationKind { exponential, logarithmic, coupled };

// State-space perturbation x -> x~ used to flatten weight functions near the
// boundary. exponential/logarithmic act per coordinate; coupled shrinks a
// coordinate's perturbation as the rest of the network fills up.
struct Perturbation {
  PerturbationKind kind = PerturbationKind::coupled;
  double theta = 1.0;

  void check() const {
    switch (kind) {
      case PerturbationKind::exponential:
        if (theta < 1.0)
          throw ContractError("perturbation: exponential requires theta >= 1");
        break;
      case PerturbationKind::logarithmic:
      case PerturbationKind::coupled:
        if (theta <= 0.0)
          throw ContractError("perturbation: theta must be positive");
        break;
    }
  }

  bool separable() const { return kind != PerturbationKind::coupled; }

  // x~_i for the separable kinds (depends on x_i only).
  double scalar(double xi) const {
    switch (kind) {
      case PerturbationKind::exponential:
        return xi + theta * (std::exp(-xi / theta) - 1.0);
      case PerturbationKind::logarithmic:
        return xi * std::log(1.0 + xi / theta);
      case PerturbationKind::coupled:
        throw ContractError("perturbation: coupled kind is not separable");
    }
    return 0.0;
  }

  // d x~_i / d x_i for the separable kinds.
  double scalar_derivative(double xi) const {
    switch (kind) {
      case PerturbationKind::exponential:
        return 1.0 - std::exp(-xi / theta);
      case PerturbationKind::logarithmic:
        return std::log(1.0 + xi / theta) + xi / (theta + xi);
      case PerturbationKind::coupled:
        throw ContractError("perturbation: coupled kind is not separable");
    }
    return 0.0;
  }

  // d^2 x~_i / d x_i^2 for the separable kinds.
  double scalar_second_derivative(double xi) const {
    switch (kind) {
      case PerturbationKind::exponential:
        return std::exp(-xi / theta) / theta;
      case PerturbationKind::logarithmic: {
        double d = theta + xi;
        return 1.0 / d + theta / (d * d);
      }
      case PerturbationKind::coupled:
        throw ContractError("perturbation: coupled kind is not separable");
    }
    return 0.0;
  }

  Vec apply(const Vec& x) const {
    check();
    Vec y(x.size());
    if (kind == PerturbationKind::coupled) {
      double total = 0.0;
      for (double v : x) total += v;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double rest = total - x[i];
        y[i] = x[i] + std::exp(-x[i] / (theta * (1.0 + rest)));
      }
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = scalar(x[i]);
    }
    return y;
  }
};

// Diagonal damping matrix of the coupled construction; entry i vanishes when
// queue i is empty and approaches 1 as it fills relative to the rest.
inline Vec perturbation_matrix_diag(const Vec& x, double theta) {
  if (theta <= 0.0)
    throw ContractError("perturbation_matrix: theta must be positive");
  double total = 0.0;
  for (double v : x) total += v;
  Vec d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double rest = total - x[i];
    d[i] = 1.0 - std::exp(-x[i] / (theta * (1.0 + rest)));
  }
  return d;
}

}  // namespace muxw
