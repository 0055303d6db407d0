#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "muxw/audit.hpp"
#include "muxw/config.hpp"

namespace muxw {

struct RunTask {
  RunConfig config;  // sweep value already substituted
  std::string run_id;
};

namespace detail {

inline std::string compact_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

// Expand the sweep axis (if any) into one task per value; without a sweep the
// plan is the single configured run.
inline std::vector<RunTask> materialize_plan(const RunConfig& base) {
  std::vector<RunTask> tasks;
  if (!base.sweep) {
    tasks.push_back({base, base.run_id});
    return tasks;
  }
  for (double v : base.sweep->values()) {
    RunConfig c = base;
    c.sweep.reset();
    if (base.sweep->key == "alpha")
      c.scenario_params["alpha"] = v;
    else if (base.sweep->key == "theta")
      c.theta = v;
    else
      c.seed = static_cast<std::uint64_t>(std::llround(v));
    tasks.push_back(
        {c, base.run_id + "_" + base.sweep->key + detail::compact_number(v)});
  }
  return tasks;
}

struct RunOutcome {
  std::string run_id;
  SummaryRow row;
};

inline RunOutcome execute_task(const RunTask& task) {
  NetworkSpec spec = task.config.build_spec();
  SimOptions opts = task.config.sim_options();
  RunResult r = spec.phy ? run_crosslayer(spec, task.config.policy,
                                          task.config.power, opts)
                         : run_queueing(spec, task.config.policy, opts);
  r.summary.config_echo = task.config.echo();
  std::filesystem::path dir(task.config.out_dir);
  write_trajectory_csv((dir / (task.run_id + "_trajectory.csv")).string(),
                       r.trajectory);
  write_summary_csv((dir / (task.run_id + "_summary.csv")).string(),
                    {r.summary});
  return {task.run_id, r.summary};
}

// Runs the whole plan, spreading independent tasks over a small thread pool.
// Output files and the collated sweep CSV are identical for any worker count.
inline std::vector<RunOutcome> execute_all(const RunConfig& base) {
  std::vector<RunTask> tasks = materialize_plan(base);
  std::filesystem::create_directories(base.out_dir);
  std::vector<RunOutcome> out(tasks.size());
  std::size_t workers = std::min<std::size_t>(base.workers, tasks.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = execute_task(tasks[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            out[i] = execute_task(tasks[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  if (base.sweep) {
    std::vector<SummaryRow> rows;
    rows.reserve(out.size());
    for (const auto& o : out) rows.push_back(o.row);
    std::filesystem::path dir(base.out_dir);
    write_summary_csv((dir / (base.run_id + "_sweep.csv")).string(), rows);
  }
  return out;
}

// Condition checks for the configured scenario's field and perturbation;
// thresholds here are reporting defaults, not acceptance gates.
inline std::vector<AuditReport> run_audits(const RunConfig& config) {
  NetworkSpec spec = config.build_spec();
  SchedulingField field = build_field(spec.cost, spec.perturbation);
  std::vector<double> radii = default_shell_radii();
  std::vector<double> grid = geometric_grid();
  std::vector<AuditReport> reports;
  reports.push_back(
      check_A1(field, 0.05, 5.0, radii, 200, RngHandle{config.seed, 11}));
  reports.push_back(
      check_A2(field, 0.05, 1.0, radii, 200, RngHandle{config.seed, 12}));
  reports.push_back(
      check_C1(field, 0.05, radii, 200, RngHandle{config.seed, 13}));
  reports.push_back(check_C2(field, 1000, RngHandle{config.seed, 14}));
  if (spec.perturbation.separable()) {
    reports.push_back(check_D1(spec.perturbation, grid));
    reports.push_back(check_D2(spec.perturbation, spec.cost, grid));
  }
  reports.push_back(check_cond_log(spec.cost, 0.0, grid));
  return reports;
}

inline std::string write_audits(const RunConfig& config) {
  std::vector<AuditReport> reports = run_audits(config);
  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path dir(config.out_dir);
  std::string path = (dir / (config.run_id + "_audit.csv")).string();
  write_audit_csv(path, reports);
  return path;
}

}  // namespace muxw
