#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "muxw/muxw.hpp"

namespace {

int run(const muxw::RunConfig& config) {
  if (config.audit) {
    std::string path = muxw::write_audits(config);
    std::printf("audit report: %s\n", path.c_str());
    return 0;
  }
  auto outcomes = muxw::execute_all(config);
  for (const auto& o : outcomes)
    std::printf("%s: policy=%s scenario=%s alpha=%g avg_cost=%.6g "
                "p_out=%.6g sum_idle=%zu %s (slope %.3g)\n",
                o.run_id.c_str(), o.row.policy.c_str(), o.row.scenario.c_str(),
                o.row.alpha, o.row.avg_cost, o.row.p_out, o.row.sum_idle,
                o.row.stable ? "stable" : "unstable", o.row.slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic network simulator with field-based scheduling "
               "policies, stability audits and cross-layer power control"};

  std::string config_path, scenario, policy, sweep, out_dir;
  long long slots = -1, seed = -1, workers = -1;
  bool audit = false;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--scenario", scenario,
                 "tandem | multimedia | energy | crosslayer");
  app.add_option("--policy", policy,
                 "maxweight | h_maxweight | mu_maxweight | mu_maxweight_pac");
  app.add_option("--slots", slots, "number of simulated slots");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--sweep", sweep, "KEY=A:B:STEP over alpha, theta or seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--audit", audit, "write condition-check report and exit");
  app.add_option("--workers", workers, "parallel runs during sweeps");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json j;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw muxw::ConfigError("config: cannot open '" + config_path + "'");
      try {
        in >> j;
      } catch (const std::exception& e) {
        throw muxw::ConfigError("config: parse failure in '" + config_path +
                                "': " + e.what());
      }
    } else {
      j = nlohmann::json::object();
    }
    if (!scenario.empty()) j["scenario"] = scenario;
    if (!policy.empty()) j["policy"] = policy;
    if (slots >= 0) j["slots"] = static_cast<std::size_t>(slots);
    if (seed >= 0) j["seed"] = static_cast<std::size_t>(seed);
    if (!sweep.empty()) j["sweep"] = sweep;
    if (!out_dir.empty()) j["out_dir"] = out_dir;
    if (audit) j["audit"] = true;
    if (workers >= 1) j["workers"] = static_cast<std::size_t>(workers);

    muxw::RunConfig config = muxw::config_from_json(j);
    return run(config);
  } catch (const muxw::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
