#include "lrp/electric.h"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "lrp/errors.h"
#include "lrp/parallel.h"

namespace lrp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t size) : parent_(size) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

void CheckConductance(double c) {
  if (!(c >= 0.0)) {
    throw DomainError("conductance must lie in [0,inf], got " + FormatReal(c));
  }
}

}  // namespace

Network Network::Assemble(std::vector<Site> sites,
                          const std::vector<std::size_t>& label_of_site,
                          std::vector<std::size_t> edge_u,
                          std::vector<std::size_t> edge_v,
                          std::vector<double> edge_c) {
  Network net;
  net.sites_ = std::move(sites);
  net.node_of_site_.resize(net.sites_.size());

  std::vector<std::pair<std::size_t, NodeId>> label_to_node;
  auto node_of_label = [&](std::size_t label) {
    const auto it = std::lower_bound(
        label_to_node.begin(), label_to_node.end(), label,
        [](const auto& entry, std::size_t key) { return entry.first < key; });
    return it->second;
  };
  {
    // Nodes are numbered in order of their smallest site.
    std::vector<std::size_t> labels = label_of_site;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::vector<NodeId> assigned(labels.size(), -1);
    NodeId next = 0;
    for (std::size_t i = 0; i < net.sites_.size(); ++i) {
      const std::size_t slot =
          std::lower_bound(labels.begin(), labels.end(), label_of_site[i]) -
          labels.begin();
      if (assigned[slot] < 0) assigned[slot] = next++;
      net.node_of_site_[i] = assigned[slot];
    }
    net.num_nodes_ = static_cast<std::size_t>(next);
    label_to_node.reserve(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
      label_to_node.emplace_back(labels[k], assigned[k]);
    }
  }

  std::vector<Edge> raw;
  raw.reserve(edge_c.size());
  for (std::size_t k = 0; k < edge_c.size(); ++k) {
    NodeId u = node_of_label(edge_u[k]);
    NodeId v = node_of_label(edge_v[k]);
    if (u == v || edge_c[k] == 0.0) continue;
    if (u > v) std::swap(u, v);
    raw.push_back({u, v, edge_c[k]});
  }
  std::sort(raw.begin(), raw.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  for (const Edge& e : raw) {
    if (!net.edges_.empty() && net.edges_.back().u == e.u &&
        net.edges_.back().v == e.v) {
      net.edges_.back().conductance += e.conductance;
    } else {
      net.edges_.push_back(e);
    }
  }

  // Adjacency in CSR form.
  std::vector<std::size_t> degree(net.num_nodes_, 0);
  for (const Edge& e : net.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  net.offsets_.assign(net.num_nodes_ + 1, 0);
  for (std::size_t i = 0; i < net.num_nodes_; ++i) {
    net.offsets_[i + 1] = net.offsets_[i] + degree[i];
  }
  net.neighbors_.resize(net.offsets_.back());
  net.total_.assign(net.num_nodes_, 0.0);
  std::vector<std::size_t> cursor(net.offsets_.begin(), net.offsets_.end() - 1);
  for (const Edge& e : net.edges_) {
    net.neighbors_[cursor[e.u]++] = {e.v, e.conductance};
    net.neighbors_[cursor[e.v]++] = {e.u, e.conductance};
    net.total_[e.u] += e.conductance;
    net.total_[e.v] += e.conductance;
  }
  return net;
}

Network Network::Build(std::vector<Site> sites,
                       std::span<const WeightedEdge> edges) {
  for (const auto& e : edges) {
    CheckConductance(e.conductance);
    sites.push_back(e.u);
    sites.push_back(e.v);
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

  auto index_of = [&](Site s) {
    return static_cast<std::size_t>(
        std::lower_bound(sites.begin(), sites.end(), s) - sites.begin());
  };
  DisjointSets sets(sites.size());
  for (const auto& e : edges) {
    if (std::isinf(e.conductance)) sets.Union(index_of(e.u), index_of(e.v));
  }
  std::vector<std::size_t> label(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) label[i] = sets.Find(i);

  std::vector<std::size_t> eu, ev;
  std::vector<double> ec;
  for (const auto& e : edges) {
    if (e.conductance == 0.0 || std::isinf(e.conductance)) continue;
    eu.push_back(label[index_of(e.u)]);
    ev.push_back(label[index_of(e.v)]);
    ec.push_back(e.conductance);
  }
  return Assemble(std::move(sites), label, std::move(eu), std::move(ev),
                  std::move(ec));
}

bool Network::Contains(Site site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

Network::NodeId Network::NodeOf(Site site) const {
  const auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
  if (it == sites_.end() || *it != site) {
    throw DomainError("unknown vertex " + std::to_string(site));
  }
  return node_of_site_[it - sites_.begin()];
}

std::vector<Site> Network::Members(NodeId node) const {
  std::vector<Site> out;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (node_of_site_[i] == node) out.push_back(sites_[i]);
  }
  return out;
}

std::vector<bool> Network::Component(NodeId node) const {
  std::vector<bool> seen(num_nodes_, false);
  std::vector<NodeId> stack{node};
  seen[node] = true;
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    for (const auto& nb : Neighbors(x)) {
      if (!seen[nb.node]) {
        seen[nb.node] = true;
        stack.push_back(nb.node);
      }
    }
  }
  return seen;
}

Network Contract(const Network& net, std::span<const Site> set) {
  if (set.empty()) throw DomainError("contract: empty vertex set");
  DisjointSets sets(net.num_nodes());
  const auto first = static_cast<std::size_t>(net.NodeOf(set.front()));
  for (Site s : set) sets.Union(first, static_cast<std::size_t>(net.NodeOf(s)));

  std::vector<std::size_t> label(net.num_sites());
  for (std::size_t i = 0; i < net.num_sites(); ++i) {
    label[i] = sets.Find(static_cast<std::size_t>(net.NodeOfIndex(i)));
  }
  std::vector<std::size_t> eu, ev;
  std::vector<double> ec;
  for (const auto& e : net.edges()) {
    eu.push_back(sets.Find(static_cast<std::size_t>(e.u)));
    ev.push_back(sets.Find(static_cast<std::size_t>(e.v)));
    ec.push_back(e.conductance);
  }
  return Network::Assemble({net.sites().begin(), net.sites().end()}, label,
                           std::move(eu), std::move(ev), std::move(ec));
}

double SeriesChainConductance(std::span<const double> conductances) {
  if (conductances.empty()) throw DomainError("series chain: empty sequence");
  double resistance = 0.0;
  for (double c : conductances) {
    CheckConductance(c);
    resistance += 1.0 / c;  // 1/0 = inf, 1/inf = 0
  }
  return 1.0 / resistance;
}

HarmonicSolution SolveHarmonic(const Network& net,
                               const TerminalPair& terminals) {
  if (terminals.sources.empty() || terminals.sinks.empty()) {
    throw DomainError("terminal sets must be nonempty");
  }
  for (Site s : terminals.sources) {
    if (std::find(terminals.sinks.begin(), terminals.sinks.end(), s) !=
        terminals.sinks.end()) {
      throw DomainError("terminal sets must be disjoint");
    }
  }
  HarmonicSolution out;
  out.network = Contract(Contract(net, terminals.sources), terminals.sinks);
  const Network& g = out.network;
  out.source = g.NodeOf(terminals.sources.front());
  out.sink = g.NodeOf(terminals.sinks.front());
  if (out.source == out.sink) {
    out.current = kInf;
    return out;
  }

  const std::vector<bool> component = g.Component(out.source);
  out.potential.assign(g.num_nodes(), 0.0);
  if (!component[out.sink]) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      out.potential[i] = component[i] ? 1.0 : 0.0;
    }
    out.current = 0.0;
    return out;
  }

  // Kirchhoff equations on the interior nodes of the source component:
  //   sum_j c_ij (phi_i - phi_j) = 0,  phi_source = 1, phi_sink = 0.
  std::vector<int> index(g.num_nodes(), -1);
  int interior = 0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto node = static_cast<Network::NodeId>(i);
    if (component[i] && node != out.source && node != out.sink) {
      index[i] = interior++;
    }
  }
  out.potential[out.source] = 1.0;
  if (interior > 0) {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(interior);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      if (index[i] < 0) continue;
      const auto node = static_cast<Network::NodeId>(i);
      triplets.emplace_back(index[i], index[i], g.TotalConductance(node));
      for (const auto& nb : g.Neighbors(node)) {
        if (index[nb.node] >= 0) {
          triplets.emplace_back(index[i], index[nb.node], -nb.conductance);
        } else if (nb.node == out.source) {
          rhs[index[i]] += nb.conductance;
        }
      }
    }
    Eigen::SparseMatrix<double> laplacian(interior, interior);
    laplacian.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(laplacian);
    if (solver.info() != Eigen::Success) {
      throw InternalError("Laplacian factorization failed");
    }
    Eigen::VectorXd phi = solver.solve(rhs);
    // One step of iterative refinement.
    const Eigen::VectorXd residual = rhs - laplacian * phi;
    phi += solver.solve(residual);
    if (solver.info() != Eigen::Success || !phi.allFinite()) {
      throw InternalError("Laplacian solve failed");
    }
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      if (index[i] >= 0) out.potential[i] = phi[index[i]];
    }
  }

  // Current arriving at the sink; every term is nonnegative.
  double current = 0.0;
  for (const auto& nb : g.Neighbors(out.sink)) {
    current += nb.conductance * out.potential[nb.node];
  }
  out.current = current;
  return out;
}

double EffectiveConductance(const Network& net, const TerminalPair& terminals) {
  return SolveHarmonic(net, terminals).current;
}

double DirichletEnergy(const Network& net, std::span<const double> potential) {
  double energy = 0.0;
  for (const auto& e : net.edges()) {
    const double gap = potential[e.u] - potential[e.v];
    energy += e.conductance * gap * gap;
  }
  return energy;
}

double ConductanceToBoundary(const Network& net, Site origin, Site radius) {
  if (radius < 1) throw DomainError("boundary radius must be >= 1");
  Site window = 0;
  for (Site s : net.sites()) window = std::max(window, s < 0 ? -s : s);
  if (radius > window) {
    throw DomainError("boundary radius " + std::to_string(radius) +
                      " exceeds window radius " + std::to_string(window));
  }
  if (std::llabs(origin) >= radius) {
    throw DomainError("origin must lie strictly inside the boundary radius");
  }
  const Network::NodeId root = net.NodeOf(origin);
  const std::vector<bool> cluster = net.Component(root);
  std::vector<Site> boundary;
  for (std::size_t i = 0; i < net.num_sites(); ++i) {
    const Site s = net.sites()[i];
    if (std::llabs(s) >= radius && cluster[net.NodeOfIndex(i)]) {
      if (net.NodeOfIndex(i) == root) return kInf;
      boundary.push_back(s);
    }
  }
  if (boundary.empty()) return 0.0;
  return EffectiveConductance(net, {{origin}, std::move(boundary)});
}

Network::NodeId WalkStep(const Network& net, Network::NodeId node, Rng& rng) {
  const double total = net.TotalConductance(node);
  if (!(total > 0.0)) {
    throw UndefinedWalkError("walk undefined: vertex has no incident edge");
  }
  if (!std::isfinite(total)) {
    throw UndefinedWalkError(
        "walk undefined: infinite incident conductance, cluster declared "
        "transient");
  }
  const auto neighbors = net.Neighbors(node);
  const double target = rng.Uniform01() * total;
  double cumulative = 0.0;
  for (const auto& nb : neighbors) {
    cumulative += nb.conductance;
    if (target < cumulative) return nb.node;
  }
  return neighbors.back().node;
}

EscapeEstimate EscapeProbabilityMc(const Network& net,
                                   const TerminalPair& terminals,
                                   std::uint64_t replicas,
                                   std::uint64_t max_steps, std::uint64_t seed,
                                   int workers) {
  if (replicas == 0) throw DomainError("replicas must be positive");
  if (max_steps == 0) throw DomainError("max_steps must be positive");
  const Network g =
      Contract(Contract(net, terminals.sources), terminals.sinks);
  const Network::NodeId a = g.NodeOf(terminals.sources.front());
  const Network::NodeId b = g.NodeOf(terminals.sinks.front());
  if (a == b) throw DomainError("source and sink coincide after contraction");

  enum Outcome : std::uint8_t { kEscaped, kReturned, kCensored };
  std::vector<std::uint8_t> outcome(replicas);
  ParallelFor(replicas, workers, [&](std::size_t r) {
    Rng rng(DeriveSeed(seed, r));
    Network::NodeId x = WalkStep(g, a, rng);
    std::uint64_t steps = 1;
    while (x != a && x != b && steps < max_steps) {
      x = WalkStep(g, x, rng);
      ++steps;
    }
    outcome[r] = x == b ? kEscaped : x == a ? kReturned : kCensored;
  });

  EscapeEstimate est;
  for (std::uint8_t o : outcome) {
    if (o == kEscaped) ++est.escaped;
    if (o == kReturned) ++est.returned;
    if (o == kCensored) ++est.censored;
  }
  const auto decided = static_cast<double>(est.escaped + est.returned);
  if (decided > 0) {
    est.probability = static_cast<double>(est.escaped) / decided;
    est.standard_error =
        std::sqrt(est.probability * (1.0 - est.probability) / decided);
  }
  est.censored_rate =
      static_cast<double>(est.censored) / static_cast<double>(replicas);
  est.source_conductance = g.TotalConductance(a);
  est.conductance = est.source_conductance * est.probability;
  est.conductance_stderr = est.source_conductance * est.standard_error;
  return est;
}

Network NetworkFromSample(const GraphSample& sample) {
  const Site n = sample.window_radius();
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(2 * n + 1));
  for (Site z = -n; z <= n; ++z) sites.push_back(z);
  std::vector<WeightedEdge> edges;
  edges.reserve(sample.edges.size());
  for (const auto& e : sample.edges) edges.push_back({e.u, e.v, e.conductance});
  return Network::Build(std::move(sites), edges);
}

}  // namespace lrp
