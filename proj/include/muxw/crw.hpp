#pragma once

#include <algorithm>
#include <functional>
#include <optional>

#include "muxw/types.hpp"

namespace muxw {

// Service/routing process B(t). Columns describe what one active link moves:
// one negative entry at the upstream queue, nonnegative entries downstream.
// draw_rule, when set, supplies the per-slot realization; otherwise the mean
// matrix is used every slot.
struct TopologyProcess {
  Matrix mean;
  std::function<Matrix(std::uint64_t)> draw_rule;

  Matrix realize(std::uint64_t slot) const {
    if (!draw_rule) return mean;
    Matrix b = draw_rule(slot);
    if (b.rows != mean.rows || b.cols != mean.cols)
      throw StructuralError("topology draw: realized shape differs from mean");
    return b;
  }

  // Row index of each column's unique negative entry, if the column has
  // exactly one; columns violating that shape yield nullopt.
  std::vector<std::optional<std::size_t>> source_rows() const {
    std::vector<std::optional<std::size_t>> out(mean.cols);
    for (std::size_t j = 0; j < mean.cols; ++j) {
      std::optional<std::size_t> src;
      bool ok = true;
      for (std::size_t i = 0; i < mean.rows; ++i) {
        if (mean(i, j) < 0.0) {
          if (src) ok = false;
          src = i;
        }
      }
      out[j] = ok ? src : std::nullopt;
    }
    return out;
  }
};

// Binary resource-sharing constraints: u is feasible iff C*u <= 1 per row.
struct ConstituencyMatrix {
  std::size_t num_links = 0;
  std::vector<std::vector<std::uint8_t>> rows;

  bool feasible(const ControlAction& u) const {
    if (u.size() != num_links)
      throw StructuralError("constituency: activation length mismatch");
    for (const auto& row : rows) {
      unsigned s = 0;
      for (std::size_t j = 0; j < num_links; ++j) s += row[j] & u[j];
      if (s > 1) return false;
    }
    return true;
  }
};

enum class ArrivalKind { poisson, deterministic };

// External arrivals in Mbit per slot. Poisson draws are integer packet counts
// scaled by packet_size so the empirical mean matches `means`.
struct ArrivalSpec {
  Vec means;
  ArrivalKind kind = ArrivalKind::poisson;
  double packet_size = 1.0;
};

inline Vec sample_arrivals(const ArrivalSpec& spec, std::mt19937_64& rng) {
  if (spec.packet_size <= 0.0)
    throw ContractError("sample_arrivals: packet size must be positive");
  Vec a(spec.means.size(), 0.0);
  for (std::size_t i = 0; i < spec.means.size(); ++i) {
    double mean = spec.means[i];
    if (mean < 0.0) throw ContractError("sample_arrivals: negative mean");
    if (mean == 0.0) continue;
    if (spec.kind == ArrivalKind::deterministic) {
      a[i] = mean;
    } else {
      std::poisson_distribution<long> pois(mean / spec.packet_size);
      a[i] = spec.packet_size * static_cast<double>(pois(rng));
    }
  }
  return a;
}

namespace detail {

inline void check_step_args(const QueueState& x, const ControlAction& u,
                            const Matrix& b, const Vec& arrivals) {
  if (b.rows != x.size() || b.cols != u.size() || arrivals.size() != x.size())
    throw StructuralError("step: dimension mismatch between state, control, "
                          "service matrix and arrivals");
  for (double a : arrivals)
    if (a < 0.0) throw ContractError("step: negative arrival");
}

}  // namespace detail

// One slot of the clipped queueing recursion: service is applied first, the
// result is floored at zero componentwise, then arrivals are added. Active
// columns are credited in full downstream even when the upstream queue runs
// dry ("overdraft"), matching the idealized recursion.
inline QueueState step_crw(const QueueState& x, const ControlAction& u,
                           const Matrix& b, const Vec& arrivals) {
  detail::check_step_args(x, u, b, arrivals);
  Vec served = b.apply(u);
  QueueState y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = std::max(0.0, x[i] + served[i]) + arrivals[i];
  return y;
}

// Conserving variant: each active column transfers min(upstream content,
// capacity), scaling its downstream credits by the same ratio, so a slot
// never moves more traffic than exists. Columns are processed in index order
// against the running state; like the clipped recursion, traffic credited
// downstream earlier in the slot is available to later columns. Requires
// single-negative-entry columns.
inline QueueState step_crw_conserving(const QueueState& x,
                                      const ControlAction& u, const Matrix& b,
                                      const Vec& arrivals) {
  detail::check_step_args(x, u, b, arrivals);
  QueueState y = x;
  for (std::size_t j = 0; j < b.cols; ++j) {
    if (!u[j]) continue;
    std::size_t src = b.rows;
    double cap = 0.0;
    for (std::size_t i = 0; i < b.rows; ++i) {
      if (b(i, j) < 0.0) {
        if (src != b.rows)
          throw StructuralError("conserving step: column has multiple "
                                "negative entries");
        src = i;
        cap = -b(i, j);
      }
    }
    if (src == b.rows) continue;  // pure-source column moves nothing out
    double moved = std::min(y[src], cap);
    if (moved <= 0.0) continue;
    double ratio = moved / cap;
    y[src] -= moved;
    for (std::size_t i = 0; i < b.rows; ++i)
      if (b(i, j) > 0.0) y[i] += b(i, j) * ratio;
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += arrivals[i];
  return y;
}

// Unclipped recursion x + B*u + a. Valid only inside the admissibility
// region: any link draining a zero queue must be covered by mean inflow.
inline QueueState step_meyn(const QueueState& x, const ControlAction& u,
                            const Matrix& b, const Vec& arrivals,
                            const Vec& mean_arrivals) {
  detail::check_step_args(x, u, b, arrivals);
  if (mean_arrivals.size() != x.size())
    throw StructuralError("step_meyn: mean arrival length mismatch");
  Vec served = b.apply(u);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0 && served[i] + mean_arrivals[i] < -1e-12)
      throw AdmissibilityError(
          "step_meyn: control drains empty queue " + std::to_string(i) +
          " faster than mean inflow replenishes it");
  }
  QueueState y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] + served[i] + arrivals[i];
  return y;
}

// All binary activations with C*u <= 1, in lexicographic order (u[0] most
// significant). Exhaustive enumeration is capped; larger link counts should
// use the randomized selector instead.
inline std::vector<ControlAction> feasible_controls(
    const ConstituencyMatrix& c, std::size_t num_links,
    std::size_t max_links = 20) {
  if (c.num_links != num_links)
    throw StructuralError("feasible_controls: constituency sized for " +
                          std::to_string(c.num_links) + " links, got " +
                          std::to_string(num_links));
  if (num_links > max_links)
    throw ContractError(
        "feasible_controls: " + std::to_string(num_links) +
        " links exceeds enumeration cap " + std::to_string(max_links) +
        "; use pick_and_compare for networks this large");
  std::vector<ControlAction> out;
  const std::uint64_t total = std::uint64_t{1} << num_links;
  for (std::uint64_t v = 0; v < total; ++v) {
    ControlAction u(num_links, 0);
    for (std::size_t i = 0; i < num_links; ++i)
      u[i] = static_cast<std::uint8_t>((v >> (num_links - 1 - i)) & 1u);
    if (c.feasible(u)) out.push_back(std::move(u));
  }
  return out;
}

// Subset of `candidates` admissible at state x: a control may not drain a
// zero queue faster than mean service plus mean arrivals refill it.
inline std::vector<ControlAction> admissible_controls(
    const std::vector<ControlAction>& candidates, const QueueState& x,
    const Matrix& mean_b, const Vec& mean_arrivals) {
  if (mean_b.rows != x.size() || mean_arrivals.size() != x.size())
    throw StructuralError("admissible_controls: dimension mismatch");
  std::vector<ControlAction> out;
  for (const auto& u : candidates) {
    Vec served = mean_b.apply(u);
    bool ok = true;
    for (std::size_t i = 0; i < x.size() && ok; ++i)
      if (x[i] == 0.0 && served[i] + mean_arrivals[i] < -1e-12) ok = false;
    if (ok) out.push_back(u);
  }
  return out;
}

}  // namespace muxw
