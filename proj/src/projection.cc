#include "lrp/projection.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "lrp/errors.h"

namespace lrp {

void SpatialNetwork::Validate() const {
  std::vector<double> sorted = positions;
  for (double x : sorted) {
    if (!std::isfinite(x)) throw DomainError("positions must be finite");
  }
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("positions must be distinct");
  }
  for (const Edge& e : edges) {
    if (e.u >= positions.size() || e.v >= positions.size()) {
      throw DomainError("edge endpoint out of range");
    }
    if (e.u == e.v) throw DomainError("self-loop in spatial network");
    if (!(e.conductance > 0.0)) {
      throw DomainError("spatial edge conductance must lie in (0,inf]");
    }
  }
}

Network LineNetwork::ToNetwork() const {
  std::vector<Site> sites;
  std::vector<WeightedEdge> edges;
  for (Site z = first; z <= last(); ++z) sites.push_back(z);
  for (std::size_t i = 0; i < conductance.size(); ++i) {
    const Site z = first + static_cast<Site>(i);
    edges.push_back({z, z + 1, conductance[i]});
  }
  return Network::Build(std::move(sites), edges);
}

Site MergedSite(double position) {
  return static_cast<Site>(std::floor(position));
}

LineNetwork ProjectToZnn(const SpatialNetwork& g) {
  g.Validate();
  LineNetwork out;
  if (g.positions.empty()) return out;

  std::vector<Site> merged(g.positions.size());
  for (std::size_t i = 0; i < g.positions.size(); ++i) {
    merged[i] = MergedSite(g.positions[i]);
  }
  const auto [lo, hi] = std::minmax_element(merged.begin(), merged.end());
  out.first = *lo;
  out.conductance.assign(static_cast<std::size_t>(*hi - *lo), 0.0);

  for (const auto& e : g.edges) {
    Site a = merged[e.u];
    Site b = merged[e.v];
    if (a == b) continue;  // self-loop after merging
    if (a > b) std::swap(a, b);
    const double length = std::abs(g.positions[e.u] - g.positions[e.v]);
    const double path_edges = std::ceil(length);
    // ceil(length) >= b - a always; surplus path edges are dropped.
    const double per_edge = path_edges * e.conductance;
    for (Site z = a; z < b; ++z) {
      out.conductance[static_cast<std::size_t>(z - out.first)] += per_edge;
    }
  }
  return out;
}

SpatialNetwork SpatialNetworkFromEdgeList(const EdgeList& list) {
  SpatialNetwork g;
  std::map<Site, std::size_t> index;
  for (const auto& [id, position] : list.positions) {
    if (!index.emplace(id, g.positions.size()).second) {
      throw DomainError("duplicate vertex id " + std::to_string(id));
    }
    g.positions.push_back(position);
  }
  for (const auto& e : list.edges) {
    const auto u = index.find(e.u);
    const auto v = index.find(e.v);
    if (u == index.end() || v == index.end()) {
      throw DomainError("edge references a vertex without a position line");
    }
    if (e.conductance == 0.0) continue;
    g.edges.push_back({u->second, v->second, e.conductance});
  }
  g.Validate();
  return g;
}

Network SpatialToNetwork(const SpatialNetwork& g) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < g.positions.size(); ++i) {
    sites.push_back(static_cast<Site>(i));
  }
  std::vector<WeightedEdge> edges;
  for (const auto& e : g.edges) {
    edges.push_back(
        {static_cast<Site>(e.u), static_cast<Site>(e.v), e.conductance});
  }
  return Network::Build(std::move(sites), edges);
}

}  // namespace lrp
