#ifndef LRP_ELECTRIC_H_
#define LRP_ELECTRIC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "lrp/graph_model.h"
#include "lrp/rng.h"

namespace lrp {

// An edge between two original vertices with conductance in [0, inf].
struct WeightedEdge {
  Site u;
  Site v;
  double conductance;
};

// A finite electrical network in normal form.
//
// The original vertices (sites) are partitioned into classes; each class is
// one network node. Edges of infinite conductance force their endpoints into
// the same class, zero-conductance edges are dropped, self-loops are removed
// and parallel edges are summed. Node ids are 0..num_nodes()-1, ordered by
// the smallest site of each class.
//
// Instances are immutable and safe to share between threads.
class Network {
 public:
  using NodeId = std::int32_t;

  struct Edge {
    NodeId u;  // u < v
    NodeId v;
    double conductance;  // in (0, inf)
  };

  struct Neighbor {
    NodeId node;
    double conductance;
  };

  Network() = default;

  // `sites` may be empty; every edge endpoint is added to the vertex set.
  // Throws DomainError on negative or NaN conductances.
  static Network Build(std::vector<Site> sites,
                       std::span<const WeightedEdge> edges);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_sites() const { return sites_.size(); }
  std::span<const Site> sites() const { return sites_; }
  std::span<const Edge> edges() const { return edges_; }

  bool Contains(Site site) const;
  // Throws DomainError for unknown sites.
  NodeId NodeOf(Site site) const;
  // Class of the i-th site in sites().
  NodeId NodeOfIndex(std::size_t index) const { return node_of_site_[index]; }
  std::vector<Site> Members(NodeId node) const;

  std::span<const Neighbor> Neighbors(NodeId node) const {
    return {neighbors_.data() + offsets_[node],
            neighbors_.data() + offsets_[node + 1]};
  }
  // Sum of conductances incident to `node`.
  double TotalConductance(NodeId node) const { return total_[node]; }

  // Nodes reachable from `node` (including itself), as a membership mask.
  std::vector<bool> Component(NodeId node) const;

 private:
  friend Network Contract(const Network& net, std::span<const Site> set);

  // Builds the normal form from a site partition given as arbitrary class
  // labels per site and edges between class labels.
  static Network Assemble(std::vector<Site> sites,
                          const std::vector<std::size_t>& label_of_site,
                          std::vector<std::size_t> edge_u,
                          std::vector<std::size_t> edge_v,
                          std::vector<double> edge_c);

  std::vector<Site> sites_;  // sorted, unique
  std::vector<NodeId> node_of_site_;
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> neighbors_;
  std::vector<double> total_;
};

// Identifies every site of `set` with a single node. Self-loops created by the
// identification are removed and parallel edges summed. Throws DomainError
// when `set` is empty or contains unknown sites.
Network Contract(const Network& net, std::span<const Site> set);

struct TerminalPair {
  std::vector<Site> sources;
  std::vector<Site> sinks;
};

// (sum 1/c)^-1 with 1/inf = 0, 1/0 = inf and 1/inf = 0 for the result.
// Throws DomainError on an empty sequence or negative/NaN entries.
double SeriesChainConductance(std::span<const double> conductances);

// The unit-gap harmonic potential on the network obtained by contracting the
// sources to one node and the sinks to another.
struct HarmonicSolution {
  Network network;  // the contracted network
  Network::NodeId source = 0;
  Network::NodeId sink = 0;
  // Potential per node of `network`: 1 at source, 0 at sink, harmonic
  // elsewhere on the source component and 0 off it. Empty when source and
  // sink coincide.
  std::vector<double> potential;
  // Total current leaving the source; inf when source == sink.
  double current = 0.0;
};

HarmonicSolution SolveHarmonic(const Network& net, const TerminalPair& terminals);

// Effective conductance C(A <-> B): 0 when A and B are disconnected, inf when
// contraction merges them.
double EffectiveConductance(const Network& net, const TerminalPair& terminals);

// sum over edges of c (phi_u - phi_v)^2.
double DirichletEnergy(const Network& net, std::span<const double> potential);

// C(origin <-> {z in cluster(origin) : |z| >= radius}). The window radius is
// the largest |site| of the network; radius must lie in [1, window] and
// |origin| < radius. Returns 0 when the boundary set is empty.
double ConductanceToBoundary(const Network& net, Site origin, Site radius);

// One step of the conductance-biased walk from `node`. Throws
// UndefinedWalkError when `node` has zero or infinite total conductance (the
// cluster is then declared transient).
Network::NodeId WalkStep(const Network& net, Network::NodeId node, Rng& rng);

struct EscapeEstimate {
  std::uint64_t escaped = 0;
  std::uint64_t returned = 0;
  std::uint64_t censored = 0;
  // escaped / (escaped + returned); censored walks are excluded.
  double probability = 0.0;
  double standard_error = 0.0;
  double censored_rate = 0.0;
  // Total conductance incident to the contracted source.
  double source_conductance = 0.0;
  // source_conductance * probability and its standard error.
  double conductance = 0.0;
  double conductance_stderr = 0.0;
};

// Monte Carlo estimate of P(walk from the contracted source hits the sink
// before returning). Replica r uses DeriveSeed(seed, r), so the result does
// not depend on `workers`.
EscapeEstimate EscapeProbabilityMc(const Network& net,
                                   const TerminalPair& terminals,
                                   std::uint64_t replicas,
                                   std::uint64_t max_steps, std::uint64_t seed,
                                   int workers = 1);

// Network of a sampled graph over all sites of its window.
Network NetworkFromSample(const GraphSample& sample);

}  // namespace lrp

#endif  // LRP_ELECTRIC_H_
