#pragma once

#include <optional>
#include <string>
#include <utility>

#include "muxw/cost.hpp"
#include "muxw/crw.hpp"
#include "muxw/perturbation.hpp"
#include "muxw/phy.hpp"

namespace muxw {

enum class StepMode { literal, conserving };

// Occupancy band for app buffers; the steering target sits at its midpoint.
struct OutageBand {
  double low = 10.0;
  double high = 30.0;

  double target() const { return 0.5 * (low + high); }

  void check() const {
    if (!(low < high)) throw StructuralError("outage band: need low < high");
  }
};

// Per-commodity routing and radio data for scenarios whose link rates come
// from power control rather than fixed capacities.
struct PhyConfig {
  GainMatrix gains;
  Vec noise;
  double bandwidth_hz = 20e6;
  PowerBudget budget;
  std::vector<std::pair<std::size_t, std::size_t>> links;  // node endpoints
  std::size_t num_nodes = 0;
  std::size_t num_commodities = 0;
  // queue index per (node, commodity); -1 where a node never holds that flow
  std::vector<std::vector<long>> queue_of;
  std::vector<std::pair<std::size_t, std::size_t>> queue_site;  // queue -> (node, commodity)
};

struct NetworkSpec {
  std::string name;
  double alpha = 0.0;  // headline arrival-rate knob, echoed into summaries
  std::size_t queues = 0;
  TopologyProcess topology;  // controllable columns only
  ConstituencyMatrix constituency;
  ArrivalSpec arrivals;
  Vec drain_rates;  // uncontrolled per-queue exit rates
  CostFunction cost;
  Perturbation perturbation;
  std::vector<std::size_t> app_buffers;
  std::vector<std::size_t> idle_set;
  OutageBand band;
  StepMode step_mode = StepMode::literal;
  std::optional<PhyConfig> phy;

  std::size_t num_links() const {
    return phy ? phy->links.size() : topology.mean.cols;
  }
};

// Shared structural audit every builder output must satisfy.
inline void validate_spec(const NetworkSpec& spec) {
  std::size_t m = spec.queues;
  if (m == 0) throw StructuralError(spec.name + ": no queues");
  if (spec.arrivals.means.size() != m)
    throw StructuralError(spec.name + ": arrival vector length mismatch");
  for (double a : spec.arrivals.means)
    if (a < 0.0) throw StructuralError(spec.name + ": negative arrival mean");
  if (spec.drain_rates.size() != m)
    throw StructuralError(spec.name + ": drain vector length mismatch");
  spec.cost.check(m);
  spec.perturbation.check();
  spec.band.check();
  for (std::size_t i : spec.app_buffers)
    if (i >= m) throw StructuralError(spec.name + ": app buffer out of range");
  for (std::size_t i : spec.idle_set)
    if (i >= m) throw StructuralError(spec.name + ": idle queue out of range");

  if (!spec.phy) {
    const Matrix& b = spec.topology.mean;
    if (b.rows != m)
      throw StructuralError(spec.name + ": service matrix row count");
    if (spec.constituency.num_links != b.cols)
      throw StructuralError(spec.name + ": constituency link count");
    for (const auto& row : spec.constituency.rows)
      if (row.size() != b.cols)
        throw StructuralError(spec.name + ": constituency row length");
    for (std::size_t j = 0; j < b.cols; ++j) {
      std::size_t negatives = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (b(i, j) < 0.0) ++negatives;
      if (negatives != 1)
        throw StructuralError(spec.name + ": column " + std::to_string(j) +
                              " must have exactly one negative entry");
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (spec.drain_rates[i] <= 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        if (b(i, j) < 0.0)
          throw StructuralError(spec.name +
                                ": drain on a queue with outgoing links");
    }
  } else {
    const PhyConfig& phy = *spec.phy;
    phy.gains.check();
    if (phy.gains.links() != phy.links.size())
      throw StructuralError(spec.name + ": gain matrix size mismatch");
    if (phy.noise.size() != phy.links.size())
      throw StructuralError(spec.name + ": noise vector mismatch");
    phy.budget.check(phy.links.size());
    if (phy.queue_site.size() != m)
      throw StructuralError(spec.name + ": queue site map mismatch");
    for (const auto& [src, dst] : phy.links)
      if (src >= phy.num_nodes || dst >= phy.num_nodes)
        throw StructuralError(spec.name + ": link endpoint out of range");
    for (std::size_t node = 0; node < phy.num_nodes; ++node)
      for (std::size_t c = 0; c < phy.num_commodities; ++c) {
        long q = phy.queue_of[node][c];
        if (q >= 0 && (static_cast<std::size_t>(q) >= m ||
                       phy.queue_site[q] != std::make_pair(node, c)))
          throw StructuralError(spec.name + ": inconsistent queue map");
      }
  }
}

// ---- serial line of queues ------------------------------------------------

struct TandemParams {
  std::size_t stages = 2;
  double alpha = 4.0;       // external arrivals into the first queue
  double drain_rate = 3.0;  // application drain at the last queue
  double link_capacity = 6.0;
  double target = 20.0;
};

// Chain Q1 -> Q2 -> ... -> Qm with one controllable link per stage (identity
// constituency), arrivals at the head and an uncontrolled drain at the tail,
// which doubles as the app buffer.
inline NetworkSpec build_tandem(const TandemParams& prm = {}) {
  if (prm.stages < 2) throw StructuralError("tandem: need at least 2 stages");
  std::size_t m = prm.stages;
  std::size_t l = m - 1;
  NetworkSpec spec;
  spec.name = "tandem";
  spec.alpha = prm.alpha;
  spec.queues = m;
  spec.topology.mean = Matrix(m, l);
  for (std::size_t j = 0; j < l; ++j) {
    spec.topology.mean(j, j) = -prm.link_capacity;
    spec.topology.mean(j + 1, j) = prm.link_capacity;
  }
  spec.constituency.num_links = l;
  for (std::size_t j = 0; j < l; ++j) {
    std::vector<std::uint8_t> row(l, 0);
    row[j] = 1;
    spec.constituency.rows.push_back(std::move(row));
  }
  spec.arrivals.means.assign(m, 0.0);
  spec.arrivals.means[0] = prm.alpha;
  spec.drain_rates.assign(m, 0.0);
  spec.drain_rates[m - 1] = prm.drain_rate;
  spec.app_buffers = {m - 1};
  spec.band = {prm.target - 10.0, prm.target + 10.0};
  spec.cost = uniform_cost(CostKind::composite, m, 1.0, prm.target, {m - 1});
  validate_spec(spec);
  return spec;
}

// ---- streaming distribution network ---------------------------------------

struct MultimediaParams {
  std::size_t access_points = 1;
  std::size_t users_per_ap = 3;
  double alpha = 1.5;            // per-user arrival at the server
  double wired_capacity = 100.0;
  double drain_rate = 3.0;
  double target = 20.0;
  double outage_probability = 0.01;
  std::size_t overlap_every = 5;  // every k-th user also sees the next AP
  double mean_mi = 20.0;          // mutual-information mean, Mbit/s
  double var_mi = 9.0;            // defaults to (0.15 * mean)^2
};

// Server -> access points -> user terminals. Per-user queues at the server,
// at each covering AP and at the terminal (the app buffer). One wired link
// per AP shared by its users, one radio per AP serving one user per slot at
// the epsilon-outage capacity. Conserving stepping: a 100 Mbit wired slot
// must not mint traffic out of a 2 Mbit backlog.
inline NetworkSpec build_multimedia(const MultimediaParams& prm = {}) {
  if (prm.access_points == 0 || prm.users_per_ap == 0)
    throw StructuralError("multimedia: empty deployment");
  std::size_t users = prm.access_points * prm.users_per_ap;
  double radio_capacity =
      outage_capacity(prm.mean_mi, prm.var_mi, prm.outage_probability);
  if (radio_capacity <= 0.0)
    throw StructuralError("multimedia: outage capacity vanished");

  NetworkSpec spec;
  spec.name = "multimedia";
  spec.alpha = prm.alpha;
  spec.step_mode = StepMode::conserving;
  spec.band = {prm.target - 10.0, prm.target + 10.0};

  std::vector<std::size_t> server_q(users), terminal_q(users);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> relay_q(users);
  std::size_t next = 0;
  for (std::size_t u = 0; u < users; ++u) server_q[u] = next++;
  for (std::size_t u = 0; u < users; ++u) {
    std::size_t home = u / prm.users_per_ap;
    relay_q[u].push_back({home, next++});
    bool overlap = prm.access_points >= 2 && prm.overlap_every > 0 &&
                   (u + 1) % prm.overlap_every == 0;
    if (overlap)
      relay_q[u].push_back({(home + 1) % prm.access_points, next++});
  }
  for (std::size_t u = 0; u < users; ++u) terminal_q[u] = next++;
  std::size_t m = next;
  spec.queues = m;

  struct Link {
    std::size_t from, to, ap;
    double cap;
    bool wired;
  };
  std::vector<Link> links;
  for (std::size_t u = 0; u < users; ++u)
    for (const auto& [ap, rq] : relay_q[u])
      links.push_back({server_q[u], rq, ap, prm.wired_capacity, true});
  for (std::size_t u = 0; u < users; ++u)
    for (const auto& [ap, rq] : relay_q[u])
      links.push_back({rq, terminal_q[u], ap, radio_capacity, false});

  std::size_t l = links.size();
  spec.topology.mean = Matrix(m, l);
  for (std::size_t j = 0; j < l; ++j) {
    spec.topology.mean(links[j].from, j) = -links[j].cap;
    spec.topology.mean(links[j].to, j) = links[j].cap;
  }
  spec.constituency.num_links = l;
  for (std::size_t ap = 0; ap < prm.access_points; ++ap) {
    std::vector<std::uint8_t> wired_row(l, 0), radio_row(l, 0);
    for (std::size_t j = 0; j < l; ++j) {
      if (links[j].ap != ap) continue;
      (links[j].wired ? wired_row : radio_row)[j] = 1;
    }
    spec.constituency.rows.push_back(std::move(wired_row));
    spec.constituency.rows.push_back(std::move(radio_row));
  }

  spec.arrivals.means.assign(m, 0.0);
  for (std::size_t u = 0; u < users; ++u)
    spec.arrivals.means[server_q[u]] = prm.alpha;
  spec.drain_rates.assign(m, 0.0);
  for (std::size_t u = 0; u < users; ++u)
    spec.drain_rates[terminal_q[u]] = prm.drain_rate;
  spec.app_buffers.assign(terminal_q.begin(), terminal_q.end());
  spec.cost = uniform_cost(CostKind::composite, m, 1.0, prm.target,
                           spec.app_buffers);
  validate_spec(spec);
  return spec;
}

// ---- energy-saving relay ladder -------------------------------------------

struct EnergyParams {
  double alpha = 0.3;         // arrivals at the source node's queue
  double cap_central = 0.5;   // route through nodes 3 and 6
  double cap_side = 0.5;      // routes through 2->5 and 4->7
  double cost_high = 100.0;   // battery-limited side relays
  double cost_low = 1.0;
};

// Eight-node ladder: node 1 feeds three disjoint two-hop relay routes into a
// sink. Queues 0..6 map to nodes 1..7; the sink holds no queue. The source
// radio serves one outgoing link per slot, which caps system throughput at
// the per-link capacity. Side relays carry the high holding cost so control
// can park traffic on the cheap central route and let them sleep.
inline NetworkSpec build_energy(const EnergyParams& prm = {}) {
  NetworkSpec spec;
  spec.name = "energy";
  spec.alpha = prm.alpha;
  spec.queues = 7;
  spec.step_mode = StepMode::conserving;
  struct Hop {
    std::size_t from;
    long to;  // -1 exits to the sink
    double cap;
  };
  const std::vector<Hop> hops = {
      {0, 1, prm.cap_side},    {0, 2, prm.cap_central}, {0, 3, prm.cap_side},
      {1, 4, prm.cap_side},    {2, 5, prm.cap_central}, {3, 6, prm.cap_side},
      {4, -1, prm.cap_side},   {5, -1, prm.cap_central}, {6, -1, prm.cap_side}};
  std::size_t l = hops.size();
  spec.topology.mean = Matrix(7, l);
  for (std::size_t j = 0; j < l; ++j) {
    spec.topology.mean(hops[j].from, j) = -hops[j].cap;
    if (hops[j].to >= 0) spec.topology.mean(hops[j].to, j) = hops[j].cap;
  }
  spec.constituency.num_links = l;
  std::vector<std::uint8_t> source_row(l, 0);
  source_row[0] = source_row[1] = source_row[2] = 1;
  spec.constituency.rows.push_back(std::move(source_row));

  spec.arrivals.means.assign(7, 0.0);
  spec.arrivals.means[0] = prm.alpha;
  spec.drain_rates.assign(7, 0.0);
  spec.idle_set = {1, 2, 3, 4, 5, 6};
  Vec weights = {prm.cost_low,  prm.cost_high, prm.cost_low, prm.cost_high,
                 prm.cost_high, prm.cost_low,  prm.cost_high};
  spec.cost = {CostKind::linear, weights, 0.0, {}};
  validate_spec(spec);
  return spec;
}

// ---- interference-limited multihop mesh -----------------------------------

struct CrosslayerParams {
  double alpha = 2.5;        // per-commodity arrivals at the source, Mbit/s
  double p_max = 1.0;
  double noise = 0.1;
  double bandwidth_hz = 20e6;
  double pathloss_exponent = 4.0;
};

// Nine nodes on a layered grid: one source, three relays, five destinations;
// ten directed links and one commodity per destination. Queues exist per
// (node, reachable commodity): five at the source, seven across the relays,
// five at the destinations (drained on arrival), 17 in total. Link rates are
// set per slot by power control over the cross-gain matrix.
inline NetworkSpec build_crosslayer(const CrosslayerParams& prm = {}) {
  NetworkSpec spec;
  spec.name = "crosslayer";
  spec.alpha = prm.alpha;
  spec.step_mode = StepMode::conserving;

  const std::vector<std::pair<double, double>> pos = {
      {0.0, 0.0},  {1.0, -1.0}, {1.0, 0.0}, {1.0, 1.0}, {2.0, -2.0},
      {2.0, -1.0}, {2.0, 0.0},  {2.0, 1.0}, {2.0, 2.0}};
  const std::size_t num_nodes = pos.size();
  const std::vector<std::pair<std::size_t, std::size_t>> links = {
      {0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5},
      {2, 5}, {2, 6}, {2, 7}, {3, 7}, {3, 8}};
  const std::size_t num_commodities = 5;  // commodity c terminates at node 4+c

  // commodities each node can carry toward their destinations
  std::vector<std::vector<std::size_t>> carries(num_nodes);
  carries[0] = {0, 1, 2, 3, 4};
  carries[1] = {0, 1};
  carries[2] = {1, 2, 3};
  carries[3] = {3, 4};
  for (std::size_t c = 0; c < num_commodities; ++c) carries[4 + c] = {c};

  PhyConfig phy;
  phy.links = links;
  phy.num_nodes = num_nodes;
  phy.num_commodities = num_commodities;
  phy.bandwidth_hz = prm.bandwidth_hz;
  phy.noise.assign(links.size(), prm.noise);
  phy.budget.p_max = prm.p_max;
  phy.budget.p_min = 1e-6 * prm.p_max;
  phy.budget.num_nodes = num_nodes;
  phy.budget.node_of_link.resize(links.size());
  for (std::size_t l = 0; l < links.size(); ++l)
    phy.budget.node_of_link[l] = links[l].first;

  phy.gains.g = Matrix(links.size(), links.size());
  auto dist = [&](std::size_t a, std::size_t b) {
    double dx = pos[a].first - pos[b].first;
    double dy = pos[a].second - pos[b].second;
    return std::sqrt(dx * dx + dy * dy);
  };
  // cross gain = pathloss from the transmitter of j to the receiver of l; a
  // node interfering with its own reception counts at the direct-link spacing
  for (std::size_t j = 0; j < links.size(); ++j)
    for (std::size_t l = 0; l < links.size(); ++l) {
      double d = links[j].first == links[l].second
                     ? dist(links[l].first, links[l].second)
                     : dist(links[j].first, links[l].second);
      phy.gains.g(j, l) = path_gain(d, prm.pathloss_exponent);
    }

  phy.queue_of.assign(num_nodes, std::vector<long>(num_commodities, -1));
  std::size_t next = 0;
  for (std::size_t node = 0; node < num_nodes; ++node)
    for (std::size_t c : carries[node]) {
      phy.queue_of[node][c] = static_cast<long>(next);
      phy.queue_site.push_back({node, c});
      ++next;
    }
  spec.queues = next;
  spec.phy = std::move(phy);

  spec.arrivals.means.assign(spec.queues, 0.0);
  for (std::size_t c = 0; c < num_commodities; ++c)
    spec.arrivals.means[static_cast<std::size_t>(spec.phy->queue_of[0][c])] =
        prm.alpha;
  spec.drain_rates.assign(spec.queues, 0.0);
  for (std::size_t c = 0; c < num_commodities; ++c) {
    long q = spec.phy->queue_of[4 + c][c];
    spec.drain_rates[static_cast<std::size_t>(q)] = 1e4;
  }
  spec.cost = uniform_cost(CostKind::linear, spec.queues, 1.0);
  validate_spec(spec);
  return spec;
}

}  // namespace muxw
