#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "muxw/sim.hpp"

namespace muxw {

struct SweepAxis {
  std::string key;  // alpha | theta | seed
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;

  void check() const {
    if (key != "alpha" && key != "theta" && key != "seed")
      throw ConfigError("sweep: key must be one of alpha, theta, seed (got '" +
                        key + "')");
    if (step <= 0.0) throw ConfigError("sweep: step must be positive");
    if (from > to) throw ConfigError("sweep: empty range, from > to");
  }

  std::vector<double> values() const {
    check();
    std::vector<double> v;
    std::size_t n =
        static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(from + step * static_cast<double>(i));
    return v;
  }
};

// "KEY=A:B:STEP", e.g. "alpha=0.1:0.5:0.1".
inline SweepAxis parse_sweep(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos)
    throw ConfigError("sweep: expected KEY=A:B:STEP, got '" + text + "'");
  SweepAxis axis;
  axis.key = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  auto c1 = rest.find(':');
  auto c2 = c1 == std::string::npos ? std::string::npos : rest.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ConfigError("sweep: expected KEY=A:B:STEP, got '" + text + "'");
  try {
    axis.from = std::stod(rest.substr(0, c1));
    axis.to = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    axis.step = std::stod(rest.substr(c2 + 1));
  } catch (const std::exception&) {
    throw ConfigError("sweep: non-numeric bound in '" + text + "'");
  }
  axis.check();
  return axis;
}

namespace detail {

inline void expect_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> allowed,
                        const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string(where) + ": unknown key '" + it.key() +
                        "'");
  }
}

inline double get_num(const nlohmann::json& j, const char* key,
                      double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(std::string("config: '") + key + "' must be numeric");
  return j[key].get<double>();
}

inline std::size_t get_count(const nlohmann::json& j, const char* key,
                             std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ConfigError(std::string("config: '") + key +
                      "' must be a nonnegative integer");
  return j[key].get<std::size_t>();
}

inline std::string get_str(const nlohmann::json& j, const char* key,
                           const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw ConfigError(std::string("config: '") + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace detail

inline PolicyKind policy_from_name(const std::string& s) {
  if (s == "maxweight") return PolicyKind::maxweight;
  if (s == "h_maxweight") return PolicyKind::h_maxweight;
  if (s == "mu_maxweight") return PolicyKind::mu_maxweight;
  if (s == "mu_maxweight_pac") return PolicyKind::mu_maxweight_pac;
  throw ConfigError("config: policy must be one of maxweight, h_maxweight, "
                    "mu_maxweight, mu_maxweight_pac (got '" + s + "')");
}

inline PowerMode power_mode_from_name(const std::string& s) {
  if (s == "sca") return PowerMode::sca;
  if (s == "equal") return PowerMode::equal;
  if (s == "high_sinr") return PowerMode::high_sinr;
  throw ConfigError(
      "config: power_mode must be one of sca, equal, high_sinr (got '" + s +
      "')");
}

inline CostKind cost_kind_from_name(const std::string& s) {
  if (s == "linear") return CostKind::linear;
  if (s == "shifted_quadratic") return CostKind::shifted_quadratic;
  if (s == "composite") return CostKind::composite;
  throw ConfigError("config: cost kind must be one of linear, "
                    "shifted_quadratic, composite (got '" + s + "')");
}

inline PerturbationKind perturbation_kind_from_name(const std::string& s) {
  if (s == "exponential") return PerturbationKind::exponential;
  if (s == "logarithmic") return PerturbationKind::logarithmic;
  if (s == "coupled") return PerturbationKind::coupled;
  throw ConfigError("config: perturbation kind must be one of exponential, "
                    "logarithmic, coupled (got '" + s + "')");
}

struct RunConfig {
  std::string scenario;
  PolicyKind policy = PolicyKind::mu_maxweight;
  PowerMode power = PowerMode::sca;
  std::size_t slots = 20000;
  std::uint64_t seed = 0;
  std::size_t pac_iterations = 100;
  std::optional<CostKind> cost_kind;
  std::optional<Vec> cost_weights;
  std::optional<double> cost_target;
  std::optional<PerturbationKind> perturbation_kind;
  std::optional<double> theta;
  std::optional<SweepAxis> sweep;
  std::string out_dir = ".";
  std::string run_id = "run";
  bool audit = false;
  std::size_t workers = 1;
  nlohmann::json scenario_params = nlohmann::json::object();

  NetworkSpec build_spec() const {
    const nlohmann::json& sp = scenario_params;
    NetworkSpec spec;
    if (scenario == "tandem") {
      detail::expect_keys(
          sp, {"stages", "alpha", "drain_rate", "link_capacity", "target"},
          "scenario_params (tandem)");
      TandemParams p;
      p.stages = detail::get_count(sp, "stages", p.stages);
      p.alpha = detail::get_num(sp, "alpha", p.alpha);
      p.drain_rate = detail::get_num(sp, "drain_rate", p.drain_rate);
      p.link_capacity = detail::get_num(sp, "link_capacity", p.link_capacity);
      p.target = detail::get_num(sp, "target", p.target);
      spec = build_tandem(p);
    } else if (scenario == "multimedia") {
      detail::expect_keys(sp,
                          {"access_points", "users_per_ap", "alpha",
                           "wired_capacity", "drain_rate", "target",
                           "outage_probability", "overlap_every", "mean_mi",
                           "var_mi"},
                          "scenario_params (multimedia)");
      MultimediaParams p;
      p.access_points = detail::get_count(sp, "access_points", p.access_points);
      p.users_per_ap = detail::get_count(sp, "users_per_ap", p.users_per_ap);
      p.alpha = detail::get_num(sp, "alpha", p.alpha);
      p.wired_capacity = detail::get_num(sp, "wired_capacity", p.wired_capacity);
      p.drain_rate = detail::get_num(sp, "drain_rate", p.drain_rate);
      p.target = detail::get_num(sp, "target", p.target);
      p.outage_probability =
          detail::get_num(sp, "outage_probability", p.outage_probability);
      p.overlap_every = detail::get_count(sp, "overlap_every", p.overlap_every);
      p.mean_mi = detail::get_num(sp, "mean_mi", p.mean_mi);
      p.var_mi = detail::get_num(sp, "var_mi", p.var_mi);
      spec = build_multimedia(p);
    } else if (scenario == "energy") {
      detail::expect_keys(
          sp, {"alpha", "cap_central", "cap_side", "cost_high", "cost_low"},
          "scenario_params (energy)");
      EnergyParams p;
      p.alpha = detail::get_num(sp, "alpha", p.alpha);
      p.cap_central = detail::get_num(sp, "cap_central", p.cap_central);
      p.cap_side = detail::get_num(sp, "cap_side", p.cap_side);
      p.cost_high = detail::get_num(sp, "cost_high", p.cost_high);
      p.cost_low = detail::get_num(sp, "cost_low", p.cost_low);
      spec = build_energy(p);
    } else if (scenario == "crosslayer") {
      detail::expect_keys(
          sp, {"alpha", "p_max", "noise", "bandwidth_hz", "pathloss_exponent"},
          "scenario_params (crosslayer)");
      CrosslayerParams p;
      p.alpha = detail::get_num(sp, "alpha", p.alpha);
      p.p_max = detail::get_num(sp, "p_max", p.p_max);
      p.noise = detail::get_num(sp, "noise", p.noise);
      p.bandwidth_hz = detail::get_num(sp, "bandwidth_hz", p.bandwidth_hz);
      p.pathloss_exponent =
          detail::get_num(sp, "pathloss_exponent", p.pathloss_exponent);
      spec = build_crosslayer(p);
    } else {
      throw ConfigError("config: scenario must be one of tandem, multimedia, "
                        "energy, crosslayer (got '" + scenario + "')");
    }
    if (cost_kind) spec.cost.kind = *cost_kind;
    if (cost_weights) spec.cost.weights = *cost_weights;
    if (cost_target) spec.cost.target = *cost_target;
    spec.cost.check(spec.queues);
    if (perturbation_kind) spec.perturbation.kind = *perturbation_kind;
    if (theta) spec.perturbation.theta = *theta;
    spec.perturbation.check();
    validate_spec(spec);
    return spec;
  }

  SimOptions sim_options() const {
    SimOptions o;
    o.slots = slots;
    o.seed = seed;
    o.pac_reps = pac_iterations;
    return o;
  }

  // canonical provenance string stored in the summary CSV
  std::string echo() const {
    nlohmann::json e;
    e["scenario"] = scenario;
    e["policy"] = policy_name(policy);
    if (scenario == "crosslayer") e["power_mode"] = power_mode_name(power);
    e["slots"] = slots;
    e["seed"] = seed;
    e["pac_iterations"] = pac_iterations;
    if (cost_kind || cost_weights || cost_target) {
      nlohmann::json c;
      if (cost_kind) {
        switch (*cost_kind) {
          case CostKind::linear: c["kind"] = "linear"; break;
          case CostKind::shifted_quadratic: c["kind"] = "shifted_quadratic"; break;
          case CostKind::composite: c["kind"] = "composite"; break;
        }
      }
      if (cost_weights) c["weights"] = *cost_weights;
      if (cost_target) c["target"] = *cost_target;
      e["cost"] = c;
    }
    if (perturbation_kind || theta) {
      nlohmann::json p;
      if (perturbation_kind) {
        switch (*perturbation_kind) {
          case PerturbationKind::exponential: p["kind"] = "exponential"; break;
          case PerturbationKind::logarithmic: p["kind"] = "logarithmic"; break;
          case PerturbationKind::coupled: p["kind"] = "coupled"; break;
        }
      }
      if (theta) p["theta"] = *theta;
      e["perturbation"] = p;
    }
    if (!scenario_params.empty()) e["scenario_params"] = scenario_params;
    return e.dump();
  }
};

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::expect_keys(j,
                      {"scenario", "policy", "power_mode", "slots", "seed",
                       "pac_iterations", "cost", "perturbation", "sweep",
                       "out_dir", "run_id", "audit", "workers",
                       "scenario_params"},
                      "config");
  RunConfig c;
  if (!j.contains("scenario"))
    throw ConfigError("config: missing required key 'scenario'");
  if (!j.contains("policy"))
    throw ConfigError("config: missing required key 'policy'");
  c.scenario = detail::get_str(j, "scenario", "");
  c.policy = policy_from_name(detail::get_str(j, "policy", ""));
  if (j.contains("power_mode"))
    c.power = power_mode_from_name(detail::get_str(j, "power_mode", ""));
  c.slots = detail::get_count(j, "slots", c.slots);
  if (c.slots < 1) throw ConfigError("config: slots must be >= 1");
  c.seed = static_cast<std::uint64_t>(detail::get_count(j, "seed", 0));
  c.pac_iterations = detail::get_count(j, "pac_iterations", c.pac_iterations);
  if (c.pac_iterations < 1)
    throw ConfigError("config: pac_iterations must be >= 1");
  if (j.contains("cost")) {
    const auto& jc = j["cost"];
    if (!jc.is_object()) throw ConfigError("config: 'cost' must be an object");
    detail::expect_keys(jc, {"kind", "weights", "target"}, "config.cost");
    if (jc.contains("kind"))
      c.cost_kind = cost_kind_from_name(detail::get_str(jc, "kind", ""));
    if (jc.contains("weights")) {
      if (!jc["weights"].is_array())
        throw ConfigError("config: cost.weights must be an array");
      c.cost_weights = jc["weights"].get<Vec>();
    }
    if (jc.contains("target"))
      c.cost_target = detail::get_num(jc, "target", 0.0);
  }
  if (j.contains("perturbation")) {
    const auto& jp = j["perturbation"];
    if (!jp.is_object())
      throw ConfigError("config: 'perturbation' must be an object");
    detail::expect_keys(jp, {"kind", "theta"}, "config.perturbation");
    if (jp.contains("kind"))
      c.perturbation_kind =
          perturbation_kind_from_name(detail::get_str(jp, "kind", ""));
    if (jp.contains("theta")) c.theta = detail::get_num(jp, "theta", 1.0);
  }
  if (j.contains("sweep")) {
    const auto& js = j["sweep"];
    if (js.is_string()) {
      c.sweep = parse_sweep(js.get<std::string>());
    } else if (js.is_object()) {
      detail::expect_keys(js, {"key", "from", "to", "step"}, "config.sweep");
      SweepAxis axis;
      axis.key = detail::get_str(js, "key", "");
      axis.from = detail::get_num(js, "from", 0.0);
      axis.to = detail::get_num(js, "to", 0.0);
      axis.step = detail::get_num(js, "step", 0.0);
      axis.check();
      c.sweep = axis;
    } else {
      throw ConfigError("config: 'sweep' must be a string or object");
    }
  }
  c.out_dir = detail::get_str(j, "out_dir", c.out_dir);
  c.run_id = detail::get_str(j, "run_id", c.run_id);
  if (j.contains("audit")) {
    if (!j["audit"].is_boolean())
      throw ConfigError("config: 'audit' must be a boolean");
    c.audit = j["audit"].get<bool>();
  }
  c.workers = detail::get_count(j, "workers", c.workers);
  if (c.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (j.contains("scenario_params")) {
    if (!j["scenario_params"].is_object())
      throw ConfigError("config: 'scenario_params' must be an object");
    c.scenario_params = j["scenario_params"];
  }
  if (c.scenario == "crosslayer" && c.policy != PolicyKind::maxweight &&
      c.policy != PolicyKind::mu_maxweight)
    throw ConfigError("config: crosslayer runs support policies maxweight and "
                      "mu_maxweight");
  c.build_spec();  // fail fast on scenario/overrides problems
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: parse failure in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace muxw
