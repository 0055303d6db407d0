#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "muxw/audit.hpp"
#include "muxw/cost.hpp"
#include "muxw/scenario.hpp"

namespace muxw {

// Per-run occupancy counters. Underflow/overflow are slot-occupancy counts
// against the band thresholds over the app buffers; idle counts exact-empty
// slots over the configured idle set.
struct MetricsLedger {
  OutageBand band;
  CostFunction cost;
  std::vector<std::size_t> app_buffers;
  std::vector<std::size_t> idle_set;

  std::size_t slots = 0;
  std::vector<std::size_t> underflow_count;
  std::vector<std::size_t> overflow_count;
  std::vector<std::size_t> idle_count;
  double cumulative_cost = 0.0;

  static MetricsLedger for_spec(const NetworkSpec& spec) {
    MetricsLedger led;
    led.band = spec.band;
    led.cost = spec.cost;
    led.app_buffers = spec.app_buffers;
    led.idle_set = spec.idle_set;
    led.underflow_count.assign(spec.queues, 0);
    led.overflow_count.assign(spec.queues, 0);
    led.idle_count.assign(spec.queues, 0);
    return led;
  }

  void record(const Vec& x) {
    if (x.size() != underflow_count.size())
      throw StructuralError("metrics: state length mismatch");
    ++slots;
    cumulative_cost += cost.eval(x);
    for (std::size_t i : app_buffers) {
      if (x[i] < band.low) ++underflow_count[i];
      if (x[i] > band.high) ++overflow_count[i];
    }
    for (std::size_t i : idle_set)
      if (x[i] == 0.0) ++idle_count[i];
  }

  double avg_cost() const {
    return slots ? cumulative_cost / static_cast<double>(slots) : 0.0;
  }

  double underflow_freq() const {
    if (slots == 0 || app_buffers.empty()) return 0.0;
    std::size_t total = 0;
    for (std::size_t i : app_buffers) total += underflow_count[i];
    return static_cast<double>(total) /
           (static_cast<double>(slots) * static_cast<double>(app_buffers.size()));
  }

  double overflow_freq() const {
    if (slots == 0 || app_buffers.empty()) return 0.0;
    std::size_t total = 0;
    for (std::size_t i : app_buffers) total += overflow_count[i];
    return static_cast<double>(total) /
           (static_cast<double>(slots) * static_cast<double>(app_buffers.size()));
  }

  // Band-violation probability over app buffers: both counters combined.
  double queue_outage_frequency() const {
    return underflow_freq() + overflow_freq();
  }

  std::size_t sum_idle() const {
    std::size_t total = 0;
    for (std::size_t i : idle_set) total += idle_count[i];
    return total;
  }
};

// Exponentially weighted average y_t = (1 - 1/w) y_{t-1} + (1/w) x_t with
// y_0 = x_0.
inline Vec exp_average(const Vec& series, std::size_t window = 100) {
  if (window == 0) throw ContractError("exp_average: zero window");
  Vec out(series.size());
  if (series.empty()) return out;
  double lambda = 1.0 / static_cast<double>(window);
  out[0] = series[0];
  for (std::size_t t = 1; t < series.size(); ++t)
    out[t] = (1.0 - lambda) * out[t - 1] + lambda * series[t];
  return out;
}

// Shortest decimal digits that round-trip a double exactly.
inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  bool needs = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Long-format trajectory dump; one row per (slot, queue), with the smoothed
// backlog from exp_average alongside the raw value.
inline void write_trajectory_csv(const std::string& path,
                                 const std::vector<Vec>& trajectory,
                                 std::size_t window = 100) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory csv: " + path);
  out << "slot,queue_id,backlog,smoothed_backlog\n";
  if (trajectory.empty()) return;
  std::size_t m = trajectory.front().size();
  std::vector<Vec> smooth(m);
  for (std::size_t q = 0; q < m; ++q) {
    Vec series(trajectory.size());
    for (std::size_t t = 0; t < trajectory.size(); ++t)
      series[t] = trajectory[t][q];
    smooth[q] = exp_average(series, window);
  }
  for (std::size_t t = 0; t < trajectory.size(); ++t)
    for (std::size_t q = 0; q < m; ++q)
      out << t << ',' << q << ',' << csv_double(trajectory[t][q]) << ','
          << csv_double(smooth[q][t]) << '\n';
}

struct SummaryRow {
  std::string policy;
  std::string scenario;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double avg_cost = 0.0;
  double p_out = 0.0;
  double underflow_freq = 0.0;
  double overflow_freq = 0.0;
  std::size_t sum_idle = 0;
  bool stable = false;
  double slope = 0.0;
  std::string config_echo;
};

inline const char* summary_header() {
  return "policy,scenario,seed,alpha,avg_cost,p_out,underflow_freq,"
         "overflow_freq,sum_idle,stability_verdict,slope,config\n";
}

inline void append_summary_row(std::ostream& out, const SummaryRow& r) {
  out << csv_escape(r.policy) << ',' << csv_escape(r.scenario) << ','
      << r.seed << ',' << csv_double(r.alpha) << ',' << csv_double(r.avg_cost)
      << ',' << csv_double(r.p_out) << ',' << csv_double(r.underflow_freq)
      << ',' << csv_double(r.overflow_freq) << ',' << r.sum_idle << ','
      << (r.stable ? "stable" : "unstable") << ',' << csv_double(r.slope)
      << ',' << csv_escape(r.config_echo) << '\n';
}

inline void write_summary_csv(const std::string& path,
                              const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write summary csv: " + path);
  out << summary_header();
  for (const auto& r : rows) append_summary_row(out, r);
}

// Audit reports flatten to (condition, radius, worst_violation, pass); the
// secondary branch of a check lands under a suffixed condition name.
inline void write_audit_csv(const std::string& path,
                            const std::vector<AuditReport>& reports) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write audit csv: " + path);
  out << "condition,radius,worst_violation,pass\n";
  for (const auto& r : reports) {
    for (const auto& s : r.shells)
      out << r.condition << ',' << csv_double(s.radius) << ','
          << csv_double(s.worst_violation) << ','
          << (s.pass ? "true" : "false") << '\n';
    for (const auto& s : r.aux)
      out << r.condition << "_aux," << csv_double(s.radius) << ','
          << csv_double(s.worst_violation) << ','
          << (s.pass ? "true" : "false") << '\n';
  }
}

}  // namespace muxw
