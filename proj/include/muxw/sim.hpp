#pragma once

#include <string>

#include "muxw/metrics.hpp"
#include "muxw/policy.hpp"
#include "muxw/scenario.hpp"

namespace muxw {

enum class PolicyKind { maxweight, h_maxweight, mu_maxweight, mu_maxweight_pac };

enum class PowerMode { sca, equal, high_sinr };

inline const char* policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::maxweight: return "maxweight";
    case PolicyKind::h_maxweight: return "h_maxweight";
    case PolicyKind::mu_maxweight: return "mu_maxweight";
    case PolicyKind::mu_maxweight_pac: return "mu_maxweight_pac";
  }
  return "?";
}

inline const char* power_mode_name(PowerMode p) {
  switch (p) {
    case PowerMode::sca: return "sca";
    case PowerMode::equal: return "equal";
    case PowerMode::high_sinr: return "high_sinr";
  }
  return "?";
}

struct SimOptions {
  std::size_t slots = 20000;
  std::uint64_t seed = 0;
  std::size_t pac_reps = 100;
  std::size_t smoothing_window = 100;
  double stability_tol = 1e-3;
  bool sca_warm_start = true;
  // per-slot power control favors throughput over solver precision
  ScaOptions sca{20, 1e-4, SubproblemOptions{2000, 1e-8}};
};

struct RunResult {
  std::vector<Vec> trajectory;  // post-step state per slot
  Vec cost_series;
  MetricsLedger ledger;
  StabilityVerdict stability;  // fitted on the l1-norm series
  SummaryRow summary;
  double mean_sca_outer_iterations = 0.0;

  Vec queue_series(std::size_t q) const {
    Vec s(trajectory.size());
    for (std::size_t t = 0; t < trajectory.size(); ++t) s[t] = trajectory[t][q];
    return s;
  }
};

namespace detail {

// Always-on exit columns appended after the controllable links.
inline Matrix with_drain_columns(const Matrix& b, const Vec& drains,
                                 std::size_t& extra) {
  extra = 0;
  for (double d : drains)
    if (d > 0.0) ++extra;
  Matrix full(b.rows, b.cols + extra);
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) full(i, j) = b(i, j);
  std::size_t j = b.cols;
  for (std::size_t i = 0; i < drains.size(); ++i)
    if (drains[i] > 0.0) full(i, j++) = -drains[i];
  return full;
}

inline void finish_run(RunResult& r, const NetworkSpec& spec,
                       const std::string& policy, const SimOptions& opts) {
  Vec l1(r.trajectory.size());
  for (std::size_t t = 0; t < r.trajectory.size(); ++t)
    l1[t] = l1_norm(r.trajectory[t]);
  r.stability =
      empirical_stability(l1, opts.smoothing_window, opts.stability_tol);
  r.summary.policy = policy;
  r.summary.scenario = spec.name;
  r.summary.seed = opts.seed;
  r.summary.alpha = spec.alpha;
  r.summary.avg_cost = r.ledger.avg_cost();
  r.summary.p_out = r.ledger.queue_outage_frequency();
  r.summary.underflow_freq = r.ledger.underflow_freq();
  r.summary.overflow_freq = r.ledger.overflow_freq();
  r.summary.sum_idle = r.ledger.sum_idle();
  r.summary.stable = r.stability.stable;
  r.summary.slope = r.stability.slope;
}

}  // namespace detail

// Discrete-time loop for fixed-capacity scenarios: sample arrivals, evaluate
// the field at the pre-arrival state, select a control, step the clipped (or
// conserving) recursion with drains folded in as always-on columns, record.
inline RunResult run_queueing(const NetworkSpec& spec, PolicyKind policy,
                              const SimOptions& opts) {
  if (spec.phy)
    throw ContractError("run_queueing: scenario requires the cross-layer loop");
  validate_spec(spec);
  std::size_t m = spec.queues;
  std::size_t l = spec.topology.mean.cols;

  SchedulingField field = policy == PolicyKind::maxweight
                              ? identity_field(m)
                              : build_field(spec.cost, spec.perturbation);
  std::vector<ControlAction> candidates;
  if (policy != PolicyKind::mu_maxweight_pac || l <= 20)
    candidates = feasible_controls(spec.constituency, l, 20);
  else
    throw ContractError("run_queueing: link count too large for enumeration");

  auto arrival_rng = RngHandle{opts.seed, 0}.engine();
  auto pac_rng = RngHandle{opts.seed, 1}.engine();

  std::size_t extra = 0;
  Matrix full_mean =
      detail::with_drain_columns(spec.topology.mean, spec.drain_rates, extra);
  ControlAction full_u(l + extra, 1);

  RunResult r;
  r.ledger = MetricsLedger::for_spec(spec);
  r.trajectory.reserve(opts.slots);
  r.cost_series.reserve(opts.slots);
  QueueState x(m, 0.0);
  ControlAction incumbent(l, 0);

  const bool stochastic_b = static_cast<bool>(spec.topology.draw_rule);
  for (std::size_t t = 0; t < opts.slots; ++t) {
    Vec a = sample_arrivals(spec.arrivals, arrival_rng);
    ControlAction u(l, 0);
    if (!all_zero(x)) {
      switch (policy) {
        case PolicyKind::maxweight:
          u = select_maxweight(x, spec.topology.mean, spec.arrivals.means,
                               candidates);
          break;
        case PolicyKind::mu_maxweight:
          u = select_mu_maxweight(field, x, spec.topology.mean,
                                  spec.arrivals.means, candidates);
          break;
        case PolicyKind::h_maxweight:
          u = select_mu_maxweight(
              field, x, spec.topology.mean, spec.arrivals.means,
              admissible_controls(candidates, x, spec.topology.mean,
                                  spec.arrivals.means));
          break;
        case PolicyKind::mu_maxweight_pac:
          u = pick_and_compare(incumbent, x, field, spec.topology.mean,
                               spec.arrivals.means, candidates, opts.pac_reps,
                               pac_rng);
          break;
      }
    }
    incumbent = u;

    Matrix full_b = full_mean;
    if (stochastic_b) {
      Matrix bt = spec.topology.realize(t);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < l; ++j) full_b(i, j) = bt(i, j);
    }
    for (std::size_t j = 0; j < l; ++j) full_u[j] = u[j];
    x = spec.step_mode == StepMode::literal
            ? step_crw(x, full_u, full_b, a)
            : step_crw_conserving(x, full_u, full_b, a);

    r.trajectory.push_back(x);
    r.cost_series.push_back(spec.cost.eval(x));
    r.ledger.record(x);
  }
  detail::finish_run(r, spec, policy_name(policy), opts);
  return r;
}

// Cross-layer loop: per-commodity backpressure weights from the field feed a
// per-slot power-control problem; realized Shannon rates become that slot's
// service matrix. `mask` semantics: a link may only carry commodities both
// endpoints can hold.
inline RunResult run_crosslayer(const NetworkSpec& spec, PolicyKind policy,
                                PowerMode power, const SimOptions& opts) {
  if (!spec.phy)
    throw ContractError("run_crosslayer: scenario has no radio configuration");
  if (policy != PolicyKind::maxweight && policy != PolicyKind::mu_maxweight)
    throw ContractError(
        "run_crosslayer: supports maxweight and mu_maxweight only");
  validate_spec(spec);
  const PhyConfig& phy = *spec.phy;
  std::size_t m = spec.queues;
  std::size_t nl = phy.links.size();

  SchedulingField field = policy == PolicyKind::maxweight
                              ? identity_field(m)
                              : build_field(spec.cost, spec.perturbation);

  auto arrival_rng = RngHandle{opts.seed, 0}.engine();

  Matrix mask(phy.num_nodes, phy.num_commodities);
  for (std::size_t n = 0; n < phy.num_nodes; ++n)
    for (std::size_t c = 0; c < phy.num_commodities; ++c)
      mask(n, c) = phy.queue_of[n][c] >= 0 ? 1.0 : 0.0;

  std::size_t extra = 0;
  Matrix drain_template = detail::with_drain_columns(Matrix(m, 0), spec.drain_rates, extra);

  RunResult r;
  r.ledger = MetricsLedger::for_spec(spec);
  r.trajectory.reserve(opts.slots);
  QueueState x(m, 0.0);
  ControlAction schedule(nl, 1);

  ScaState warm_state = ScaState::high_sinr(nl);
  Vec warm_power;
  double outer_total = 0.0;

  auto node_links = phy.budget.links_per_node(nl);

  for (std::size_t t = 0; t < opts.slots; ++t) {
    Vec a = sample_arrivals(spec.arrivals, arrival_rng);
    Vec mu = field(x);

    Matrix node_field(phy.num_nodes, phy.num_commodities);
    for (std::size_t n = 0; n < phy.num_nodes; ++n)
      for (std::size_t c = 0; c < phy.num_commodities; ++c) {
        long q = phy.queue_of[n][c];
        node_field(n, c) = q >= 0 ? mu[static_cast<std::size_t>(q)] : 0.0;
      }
    LinkWeightSet w = bppc_link_weights(node_field, phy.links, schedule, &mask);

    Vec p(nl, phy.budget.p_min);
    Vec rates_mbit(nl, 0.0);
    switch (power) {
      case PowerMode::sca: {
        ScaResult res = sca_power_control(
            w.weights, phy.gains, phy.noise, phy.bandwidth_hz, phy.budget,
            opts.sca, opts.sca_warm_start && t > 0 ? &warm_state : nullptr,
            opts.sca_warm_start && t > 0 ? &warm_power : nullptr);
        p = res.power;
        warm_state = res.state;
        warm_power = res.power;
        outer_total += static_cast<double>(res.outer_iterations);
        for (std::size_t l = 0; l < nl; ++l)
          rates_mbit[l] = res.rates[l] / 1e6;
        break;
      }
      case PowerMode::equal: {
        for (const auto& links : node_links) {
          std::size_t active = 0;
          for (std::size_t l : links)
            if (w.weights[l] > 0.0) ++active;
          for (std::size_t l : links)
            if (w.weights[l] > 0.0)
              p[l] = phy.budget.p_max / static_cast<double>(active);
        }
        Vec gamma = sinr(phy.gains, p, phy.noise);
        for (std::size_t l = 0; l < nl; ++l)
          rates_mbit[l] = link_rate(phy.bandwidth_hz, gamma[l]) / 1e6;
        break;
      }
      case PowerMode::high_sinr: {
        ScaState hs = ScaState::high_sinr(nl);
        SubproblemResult sub = solve_convex_subproblem(
            w.weights, hs, phy.gains, phy.noise, phy.bandwidth_hz, phy.budget,
            opts.sca_warm_start && t > 0 ? warm_power : Vec{}, opts.sca.inner);
        p = sub.power;
        warm_power = sub.power;
        Vec gamma = sinr(phy.gains, p, phy.noise);
        for (std::size_t l = 0; l < nl; ++l)
          rates_mbit[l] = link_rate(phy.bandwidth_hz, gamma[l]) / 1e6;
        break;
      }
    }

    // realize the service matrix: link l moves its chosen commodity only if
    // it carries positive weight this slot; drain columns come last
    std::vector<std::pair<std::size_t, std::size_t>> active;  // (q_src, q_dst)
    Vec active_rate;
    for (std::size_t l = 0; l < nl; ++l) {
      if (w.weights[l] <= 0.0) continue;
      std::size_t c = w.commodity[l];
      long qs = phy.queue_of[phy.links[l].first][c];
      long qd = phy.queue_of[phy.links[l].second][c];
      if (qs < 0 || qd < 0) continue;
      active.emplace_back(static_cast<std::size_t>(qs),
                          static_cast<std::size_t>(qd));
      active_rate.push_back(rates_mbit[l]);
    }
    Matrix bt(m, active.size() + drain_template.cols);
    for (std::size_t j = 0; j < active.size(); ++j) {
      bt(active[j].first, j) = -active_rate[j];
      bt(active[j].second, j) = active_rate[j];
    }
    for (std::size_t j = 0; j < drain_template.cols; ++j)
      for (std::size_t i = 0; i < m; ++i)
        bt(i, active.size() + j) = drain_template(i, j);
    ControlAction all_on(bt.cols, 1);
    x = step_crw_conserving(x, all_on, bt, a);

    r.trajectory.push_back(x);
    r.cost_series.push_back(spec.cost.eval(x));
    r.ledger.record(x);
  }
  r.mean_sca_outer_iterations =
      opts.slots ? outer_total / static_cast<double>(opts.slots) : 0.0;
  detail::finish_run(
      r, spec,
      std::string(policy_name(policy)) + "+" + power_mode_name(power), opts);
  return r;
}

}  // namespace muxw
