// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line with
// the measured numbers it was judged on; the process exits nonzero if any
// criterion fails. Thresholds are fixed here, not tuned per run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "muxw/muxw.hpp"

namespace {

using namespace muxw;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int n, const char* what, bool ok, const std::string& detail) {
  std::printf("%s criterion-%d %s%s%s\n", ok ? "PASS" : "FAIL", n, what,
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean_from(const Vec& s, std::size_t from) {
  double total = 0.0;
  for (std::size_t t = from; t < s.size(); ++t) total += s[t];
  return total / static_cast<double>(s.size() - from);
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// ---- criterion 1: tandem steering ----------------------------------------

void criterion_tandem() {
  bool ok = true;
  double band_lo = 1e300, band_hi = -1e300, min_slope = 1e300, worst_s = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimOptions o;
    o.slots = 20000;
    o.seed = seed;

    // own-coordinate damping keeps the steering threshold anchored at the
    // target while the upstream queue absorbs the overload; under coupled
    // damping the threshold scales with the growing companion queue
    NetworkSpec steer = build_tandem();
    steer.perturbation = Perturbation{PerturbationKind::exponential, 1.0};
    auto t0 = Clock::now();
    RunResult comp = run_queueing(steer, PolicyKind::mu_maxweight, o);
    worst_s = std::max(worst_s, seconds_since(t0));
    Vec q2 = comp.queue_series(1);
    double avg = mean_from(q2, 10000);
    band_lo = std::min(band_lo, avg);
    band_hi = std::max(band_hi, avg);
    ok = ok && avg >= 10.0 && avg <= 30.0 && empirical_stability(q2).stable;

    NetworkSpec lin = build_tandem();
    lin.cost.kind = CostKind::linear;
    t0 = Clock::now();
    RunResult unst = run_queueing(lin, PolicyKind::mu_maxweight, o);
    worst_s = std::max(worst_s, seconds_since(t0));
    double slope = empirical_stability(unst.queue_series(1)).slope;
    min_slope = std::min(min_slope, slope);
    // the bound equals the exact fluid drift, so grant the fitted slope the
    // same 5% sampling allowance the audit criteria use
    ok = ok && slope >= 0.5 * (4.0 - 3.0) * 0.95;
  }
  ok = ok && worst_s < 10.0;
  report(1, "tandem app-buffer steering", ok,
         "composite tail mean in [" + num(band_lo) + ", " + num(band_hi) +
             "] vs [10, 30], linear min slope " + num(min_slope) +
             " vs 0.475, max run " + num(worst_s) + " s");
}

// ---- criteria 2 & 3: multimedia occupancy orderings -----------------------

struct MmPoint {
  double underflow = 0.0;
  double p_out = 0.0;
  double worst_s = 0.0;
};

MmPoint mm_point(double ratio, CostKind kind, PolicyKind policy) {
  MmPoint acc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    MultimediaParams p;
    p.alpha = ratio * p.drain_rate;
    NetworkSpec spec = build_multimedia(p);
    spec.cost.kind = kind;
    SimOptions o;
    o.slots = 50000;
    o.seed = seed;
    o.pac_reps = 100;
    auto t0 = Clock::now();
    RunResult r = run_queueing(spec, policy, o);
    acc.worst_s = std::max(acc.worst_s, seconds_since(t0));
    acc.underflow += r.summary.underflow_freq / 5.0;
    acc.p_out += r.summary.p_out / 5.0;
  }
  return acc;
}

void criteria_multimedia() {
  const PolicyKind pac = PolicyKind::mu_maxweight_pac;
  double worst_s = 0.0;
  MmPoint comp05, quad05, lin05, mw05;
  for (double ratio : {0.5, 0.8, 1.0}) {
    MmPoint c = mm_point(ratio, CostKind::composite, pac);
    MmPoint q = mm_point(ratio, CostKind::shifted_quadratic, pac);
    MmPoint l = mm_point(ratio, CostKind::linear, pac);
    MmPoint w = mm_point(ratio, CostKind::composite, PolicyKind::maxweight);
    for (const MmPoint& pt : {c, q, l, w}) worst_s = std::max(worst_s, pt.worst_s);
    if (ratio == 0.5) {
      comp05 = c;
      quad05 = q;
      lin05 = l;
      mw05 = w;
    }
  }
  bool ordered = comp05.underflow < quad05.underflow &&
                 quad05.underflow < lin05.underflow &&
                 quad05.underflow < mw05.underflow &&
                 std::abs(lin05.underflow - mw05.underflow) <= 0.05;
  bool halved = comp05.underflow <= 0.5 * mw05.underflow;
  bool ok = ordered && halved && worst_s < 120.0;
  report(2, "multimedia underflow ordering in light traffic", ok,
         "underflow composite " + num(comp05.underflow) + " < quadratic " +
             num(quad05.underflow) + " < linear " + num(lin05.underflow) +
             " ~ maxweight " + num(mw05.underflow) + "; halving ratio " +
             num(comp05.underflow / std::max(mw05.underflow, 1e-12)) +
             " vs 0.5, max run " + num(worst_s) + " s");

  bool crossover = true;
  std::string detail;
  for (double ratio : {1.2, 1.4}) {
    MmPoint c = mm_point(ratio, CostKind::composite, pac);
    MmPoint l = mm_point(ratio, CostKind::linear, pac);
    MmPoint w = mm_point(ratio, CostKind::composite, PolicyKind::maxweight);
    crossover = crossover && c.p_out < l.p_out && c.p_out < w.p_out;
    detail += (detail.empty() ? "" : "; ") + std::string("x") + num(ratio) +
              " p_out composite " + num(c.p_out) + " linear " + num(l.p_out) +
              " maxweight " + num(w.p_out);
  }
  report(3, "multimedia queue-outage crossover in overload", crossover, detail);
}

// ---- criterion 4: energy idling -------------------------------------------

struct EnergyPoint {
  double idle = 0.0;
  bool stable = true;
};

EnergyPoint energy_point(double alpha, PolicyKind policy) {
  EnergyPoint acc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EnergyParams p;
    p.alpha = alpha;
    SimOptions o;
    o.slots = 50000;
    o.seed = seed;
    RunResult r = run_queueing(build_energy(p), policy, o);
    acc.idle += static_cast<double>(r.summary.sum_idle) / 5.0;
    acc.stable = acc.stable && r.summary.stable;
  }
  return acc;
}

void criterion_energy() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.1, 0.2, 0.3}) {
    EnergyPoint mu = energy_point(alpha, PolicyKind::mu_maxweight);
    EnergyPoint mw = energy_point(alpha, PolicyKind::maxweight);
    double ratio = mu.idle / std::max(mw.idle, 1.0);
    ok = ok && ratio >= 1.2 && mu.stable && mw.stable;
    detail += "a" + num(alpha) + " ratio " + num(ratio) + "; ";
  }
  EnergyPoint mu = energy_point(0.45, PolicyKind::mu_maxweight);
  EnergyPoint mw = energy_point(0.45, PolicyKind::maxweight);
  double near = mu.idle / std::max(mw.idle, 1.0);
  ok = ok && near >= 1.0;
  report(4, "energy relay idling advantage", ok,
         detail + "a0.45 ratio " + num(near) + " vs 1.0");
}

// ---- criterion 5: power-control numerics ----------------------------------

void criterion_sca() {
  auto t0 = Clock::now();
  bool tight = true, bound = true;
  std::vector<double> z_grid = geometric_grid(1e-4, 1e6, 200);
  std::vector<double> probes = geometric_grid(1e-4, 1e6, 60);
  for (double z0 : z_grid) {
    ScaParams sp = sca_params(z0);
    tight = tight &&
            std::abs(sp.alpha * std::log(z0) + sp.beta - std::log1p(z0)) <= 1e-12;
    for (double z : probes)
      bound = bound && sp.alpha * std::log(z) + sp.beta <= std::log1p(z) + 1e-12;
  }

  auto rng = RngHandle{501, 0}.engine();
  std::uniform_real_distribution<double> udir(0.5, 2.0), ucross(0.0, 0.3),
      uw(0.0, 2.0);
  bool ascent = true;
  for (int trial = 0; trial < 50; ++trial) {
    GainMatrix gains;
    gains.g = Matrix(4, 4);
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t l = 0; l < 4; ++l)
        gains.g(j, l) = j == l ? udir(rng) : ucross(rng);
    Vec noise(4, 0.1), weights(4);
    for (double& w : weights) w = uw(rng);
    PowerBudget budget;
    budget.p_max = 1.0;
    budget.p_min = 1e-6;
    budget.node_of_link = {0, 0, 1, 1};
    budget.num_nodes = 2;
    ScaResult res =
        sca_power_control(weights, gains, noise, 20e6, budget, ScaOptions{});
    ascent = ascent && res.outer_iterations >= 1 && res.outer_iterations <= 20;
    const Vec& trace = res.weighted_sum_rate_trace;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k)
      ascent = ascent &&
               trace[k + 1] >= trace[k] - 1e-6 * std::max(1.0, std::abs(trace[k]));
  }

  std::uniform_real_distribution<double> uw2(0.2, 2.0), ucross2(0.0, 0.5);
  int qualified = 0;
  bool oracle = true;
  for (int trial = 0; trial < 50; ++trial) {
    GainMatrix gains;
    gains.g = Matrix(2, 2);
    gains.g(0, 0) = udir(rng);
    gains.g(1, 1) = udir(rng);
    gains.g(0, 1) = ucross2(rng);
    gains.g(1, 0) = ucross2(rng);
    Vec noise(2, 0.1), weights = {uw2(rng), uw2(rng)};
    PowerBudget budget;
    budget.p_max = 1.0;
    budget.p_min = 1e-6;
    budget.node_of_link = {0, 1};
    budget.num_nodes = 2;

    auto wsr = [&](double p0, double p1) {
      Vec gamma = sinr(gains, {p0, p1}, noise);
      return weights[0] * link_rate(20e6, gamma[0]) +
             weights[1] * link_rate(20e6, gamma[1]);
    };
    double best = -1.0, second = -1.0;
    const int n = 200;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        double span = budget.p_max - budget.p_min;
        double v = wsr(budget.p_min + span * i / n, budget.p_min + span * j / n);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
    // only clearly separated grid optima count as an oracle
    if (best - second <= 1e-3 * best) continue;
    ++qualified;
    ScaResult res =
        sca_power_control(weights, gains, noise, 20e6, budget, ScaOptions{});
    double achieved = res.weighted_sum_rate_trace.back();
    oracle = oracle && std::abs(achieved - best) <= 1e-3 * best;
  }
  double elapsed = seconds_since(t0);
  bool ok =
      tight && bound && ascent && qualified >= 5 && oracle && elapsed < 60.0;
  report(5, "surrogate power-control numerics", ok,
         std::string("tightness ") + (tight ? "ok" : "VIOLATED") +
             ", lower bound " + (bound ? "ok" : "VIOLATED") + ", ascent " +
             (ascent ? "ok" : "VIOLATED") + ", oracle " +
             std::to_string(qualified) + "/50 usable " +
             (oracle ? "agree" : "DISAGREE") + ", " + num(elapsed) + " s");
}

// ---- criteria 6 & 7: cross-layer stability split and cost ordering --------

// Arrival rate sitting between the equal-power and optimized-power capacity
// regions of the 9-node mesh; chosen empirically once and fixed.  3.6 also
// exceeds what the high-SINR approximation can carry, so the cost ordering
// below separates cleanly.
constexpr double kCrosslayerAlpha = 3.6;

void criteria_crosslayer() {
  CrosslayerParams cp;
  cp.alpha = kCrosslayerAlpha;
  NetworkSpec spec = build_crosslayer(cp);
  SimOptions o;
  o.slots = 10000;

  bool split = true;
  double worst_s = 0.0;
  double cost_mu = 0.0, cost_mw = 0.0, cost_hs = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    o.seed = seed;
    auto t0 = Clock::now();
    RunResult eq =
        run_crosslayer(spec, PolicyKind::mu_maxweight, PowerMode::equal, o);
    worst_s = std::max(worst_s, seconds_since(t0));
    bool any_divergent = false;
    for (std::size_t q = 0; q < spec.queues; ++q) {
      StabilityVerdict v = empirical_stability(eq.queue_series(q));
      if (!v.stable && v.slope > 0.01) any_divergent = true;
    }

    t0 = Clock::now();
    RunResult sca =
        run_crosslayer(spec, PolicyKind::mu_maxweight, PowerMode::sca, o);
    worst_s = std::max(worst_s, seconds_since(t0));
    bool all_stable = true;
    for (std::size_t q = 0; q < spec.queues; ++q)
      all_stable = all_stable && empirical_stability(sca.queue_series(q)).stable;

    split = split && any_divergent && all_stable;
    cost_mu += mean_from(sca.cost_series, o.slots / 2) / 3.0;

    RunResult mw =
        run_crosslayer(spec, PolicyKind::maxweight, PowerMode::sca, o);
    cost_mw += mean_from(mw.cost_series, o.slots / 2) / 3.0;
    RunResult hs = run_crosslayer(spec, PolicyKind::mu_maxweight,
                                  PowerMode::high_sinr, o);
    cost_hs += mean_from(hs.cost_series, o.slots / 2) / 3.0;
  }
  bool ok6 = split && worst_s < 300.0;
  report(6, "crosslayer stability needs optimized power", ok6,
         "alpha " + num(kCrosslayerAlpha) + ", equal-power diverges / sca holds " +
             (split ? "on all seeds" : "FAILED") + ", max run " + num(worst_s) +
             " s");

  bool ok7 = cost_mu <= cost_mw && cost_mu <= 0.5 * cost_hs &&
             cost_mw <= 0.5 * cost_hs;
  report(7, "crosslayer steady-state cost ordering", ok7,
         "avg backlog cost mu-maxweight " + num(cost_mu) + " <= maxweight " +
             num(cost_mw) + ", both vs high-sinr " + num(cost_hs) +
             " (factor 0.5)");
}

// ---- criterion 8: selector oracle and randomized search hit rate ----------

void criterion_selector() {
  auto rng = RngHandle{9090, 0}.engine();
  std::uniform_int_distribution<std::size_t> ulinks(1, 12), udim(2, 6);
  std::uniform_real_distribution<double> ucap(0.5, 3.0), ux(0.5, 50.0),
      ua(0.0, 2.0), uprob(0.0, 1.0);
  int agree = 0, hits = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::size_t l = ulinks(rng), m = udim(rng);
    Matrix b(m, l);
    for (std::size_t j = 0; j < l; ++j) {
      double cap = ucap(rng);
      std::size_t from = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
      b(from, j) = -cap;
      std::size_t to = std::uniform_int_distribution<std::size_t>(0, m)(rng);
      if (to < m && to != from) b(to, j) = cap;
    }
    ConstituencyMatrix cons;
    cons.num_links = l;
    if (uprob(rng) < 0.7) {
      std::vector<std::uint8_t> row(l, 0);
      for (std::size_t j = 0; j < l; ++j) row[j] = uprob(rng) < 0.5 ? 1 : 0;
      cons.rows.push_back(row);
    }
    std::vector<ControlAction> candidates = feasible_controls(cons, l);

    Vec x(m), arr(m);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = ux(rng);
      arr[i] = ua(rng);
    }
    SchedulingField field =
        build_field(uniform_cost(CostKind::composite, m, 1.0, 20.0, {m - 1}),
                    Perturbation{PerturbationKind::coupled, 1.0});

    ControlAction picked = select_mu_maxweight(field, x, b, arr, candidates);

    Vec mu = field(x);
    double best = 1e300;
    ControlAction ref;
    for (const ControlAction& u : candidates) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double bu = arr[i];
        for (std::size_t j = 0; j < l; ++j)
          if (u[j]) bu += b(i, j);
        s += mu[i] * bu;
      }
      if (s < best) {
        best = s;
        ref = u;
      }
    }
    if (picked == ref) ++agree;

    ControlAction start(l, 0);
    ControlAction found = pick_and_compare(start, x, field, b, arr, candidates,
                                           10 * (std::size_t{1} << l), rng);
    if (found == ref) ++hits;
  }
  bool ok = agree == trials && hits >= 198;
  report(8, "control selector matches exhaustive search", ok,
         "exact " + std::to_string(agree) + "/200, randomized search hit " +
             std::to_string(hits) + "/200 (need 198)");
}

// ---- criterion 9: field-condition audits ----------------------------------

void criterion_audits() {
  SchedulingField field =
      build_field(uniform_cost(CostKind::composite, 2, 1.0, 20.0, {1}),
                  Perturbation{PerturbationKind::coupled, 1.0});
  bool c2 = check_C2(field, 1000, RngHandle{5, 14}).pass;

  AuditReport c1 = check_C1(field, 0.05, default_shell_radii(), 200,
                            RngHandle{5, 13});
  bool decay = true;
  for (std::size_t k = 0; k + 1 < c1.shells.size(); ++k) {
    double here = c1.shells[k].worst_violation + c1.threshold;
    double next = c1.shells[k + 1].worst_violation + c1.threshold;
    decay = decay && next <= 1.05 * here;
  }

  std::vector<double> grid = geometric_grid();
  Perturbation logp{PerturbationKind::logarithmic, 1.0};
  bool d1 = check_D1(logp, grid).pass;
  bool d2_quad =
      check_D2(logp, uniform_cost(CostKind::shifted_quadratic, 2, 1.0), grid)
          .pass;
  bool d2_lin =
      check_D2(logp, uniform_cost(CostKind::linear, 2, 1.0), grid).pass;

  bool ok = c2 && decay && d1 && d2_quad && !d2_lin;
  report(9, "field-condition audit separations", ok,
         std::string("C2 ") + (c2 ? "exact" : "FAILED") + ", C1 decay " +
             (decay ? "monotone" : "BROKEN") + ", D1(log) " +
             (d1 ? "pass" : "FAIL") + ", D2 quad/log " +
             (d2_quad ? "pass" : "FAIL") + ", D2 linear/log " +
             (d2_lin ? "UNEXPECTED PASS" : "fails as required"));
}

// ---- criterion 10: bitwise determinism ------------------------------------

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool rerun_identical(const char* config_text,
                     const std::filesystem::path& root) {
  RunConfig c = config_from_json(nlohmann::json::parse(config_text));
  bool same = true;
  c.out_dir = (root / "a").string();
  std::filesystem::create_directories(c.out_dir);
  execute_task({c, c.run_id});
  c.out_dir = (root / "b").string();
  std::filesystem::create_directories(c.out_dir);
  execute_task({c, c.run_id});
  for (const char* suffix : {"_summary.csv", "_trajectory.csv"}) {
    std::string a = file_bytes(root / "a" / (c.run_id + suffix));
    std::string b = file_bytes(root / "b" / (c.run_id + suffix));
    same = same && !a.empty() && a == b;
  }
  return same;
}

void criterion_determinism() {
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / "muxw_acceptance_det";
  fs::remove_all(root);
  bool queueing = rerun_identical(
      R"({"scenario":"tandem","policy":"mu_maxweight","slots":5000,"seed":3,
          "run_id":"rep_q"})",
      root);
  bool radio = rerun_identical(
      R"({"scenario":"crosslayer","policy":"mu_maxweight","slots":200,"seed":1,
          "run_id":"rep_x"})",
      root);
  fs::remove_all(root);
  report(10, "same-seed reruns are byte-identical", queueing && radio,
         std::string("queueing ") + (queueing ? "ok" : "DIFFERS") + ", radio " +
             (radio ? "ok" : "DIFFERS"));
}

}  // namespace

int main() {
  criterion_tandem();
  criteria_multimedia();
  criterion_energy();
  criterion_sca();
  criteria_crosslayer();
  criterion_selector();
  criterion_audits();
  criterion_determinism();
  if (failures)
    std::printf("%d criterion(s) failed\n", failures);
  else
    std::printf("all criteria passed\n");
  return failures ? 1 : 0;
}
