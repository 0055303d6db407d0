#pragma once

#include <random>

#include "muxw/crw.hpp"
#include "muxw/field.hpp"

namespace muxw {

// <mu, B*u + alpha>: the drift score a selector minimizes. The arrival term
// is control-independent but kept so scores match the defining objective.
inline double drift_score(const Vec& mu, const ControlAction& u,
                          const Matrix& mean_b, const Vec& mean_arrivals) {
  Vec served = mean_b.apply(u);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += mu[i] * (served[i] + mean_arrivals[i]);
  return s;
}

// argmin over candidates of <mu(x), B*u + alpha>. Ties keep the first
// candidate in iteration order, so lexicographically ordered candidate lists
// resolve ties toward the smallest activation vector. An all-empty network
// idles regardless of candidates.
inline ControlAction select_mu_maxweight(const SchedulingField& field,
                                         const QueueState& x,
                                         const Matrix& mean_b,
                                         const Vec& mean_arrivals,
                                         const std::vector<ControlAction>& candidates) {
  if (candidates.empty())
    throw ContractError("select: empty candidate set");
  if (all_zero(x)) return ControlAction(mean_b.cols, 0);
  Vec mu = field(x);
  if (mu.size() != x.size())
    throw StructuralError("select: field dimension mismatch");
  const ControlAction* best = &candidates.front();
  double best_score = drift_score(mu, candidates.front(), mean_b, mean_arrivals);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    double s = drift_score(mu, candidates[k], mean_b, mean_arrivals);
    if (s < best_score) {
      best_score = s;
      best = &candidates[k];
    }
  }
  return *best;
}

// Classical MaxWeight: the identity field.
inline ControlAction select_maxweight(const QueueState& x, const Matrix& mean_b,
                                      const Vec& mean_arrivals,
                                      const std::vector<ControlAction>& candidates) {
  return select_mu_maxweight(identity_field(x.size()), x, mean_b,
                             mean_arrivals, candidates);
}

// Gradient-of-h selection restricted to controls that are admissible at x
// (no draining of empty queues beyond mean replenishment).
inline ControlAction select_h_maxweight(const CostFunction& cf,
                                        const Perturbation& p,
                                        const QueueState& x,
                                        const Matrix& mean_b,
                                        const Vec& mean_arrivals,
                                        const std::vector<ControlAction>& candidates) {
  auto admissible = admissible_controls(candidates, x, mean_b, mean_arrivals);
  if (admissible.empty())
    throw AdmissibilityError("select_h_maxweight: no admissible control");
  return select_mu_maxweight(build_field(cf, p), x, mean_b, mean_arrivals,
                             admissible);
}

// One randomized improvement step: draw a uniform candidate and keep it only
// if it strictly lowers the drift score of the incumbent.
inline ControlAction pick_and_compare_step(const ControlAction& incumbent,
                                           const QueueState& x,
                                           const SchedulingField& field,
                                           const Matrix& mean_b,
                                           const Vec& mean_arrivals,
                                           const std::vector<ControlAction>& candidates,
                                           std::mt19937_64& rng) {
  if (candidates.empty())
    throw ContractError("pick_and_compare: empty candidate set");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const ControlAction& challenger = candidates[pick(rng)];
  Vec mu = field(x);
  double incumbent_score = drift_score(mu, incumbent, mean_b, mean_arrivals);
  double challenger_score = drift_score(mu, challenger, mean_b, mean_arrivals);
  return challenger_score < incumbent_score ? challenger : incumbent;
}

// k repetitions of pick_and_compare_step within one slot.
inline ControlAction pick_and_compare(const ControlAction& incumbent,
                                      const QueueState& x,
                                      const SchedulingField& field,
                                      const Matrix& mean_b,
                                      const Vec& mean_arrivals,
                                      const std::vector<ControlAction>& candidates,
                                      std::size_t reps, std::mt19937_64& rng) {
  if (candidates.empty())
    throw ContractError("pick_and_compare: empty candidate set");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  Vec mu = field(x);
  ControlAction best = incumbent;
  double best_score = drift_score(mu, best, mean_b, mean_arrivals);
  for (std::size_t r = 0; r < reps; ++r) {
    const ControlAction& challenger = candidates[pick(rng)];
    double s = drift_score(mu, challenger, mean_b, mean_arrivals);
    if (s < best_score) {
      best_score = s;
      best = challenger;
    }
  }
  return best;
}

}  // namespace muxw
