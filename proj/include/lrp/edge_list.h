#ifndef LRP_EDGE_LIST_H_
#define LRP_EDGE_LIST_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrp/electric.h"

namespace lrp {

// Plain-text edge list shared by the sampler, the solver and the projection.
//
//   # n=<window_radius> seed=<seed>     optional header
//   # anything                          other comments are ignored
//   m <z> <mark>                        vertex of a marked sample
//   v <id> <position>                   vertex of a spatial network
//   <u> <v> <conductance>               edge; "inf" means infinite
struct EdgeList {
  std::optional<Site> window_radius;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<Site, double>> marks;
  std::vector<std::pair<Site, double>> positions;
  std::vector<WeightedEdge> edges;
};

// Throws DomainError with the offending line number on malformed input.
EdgeList ParseEdgeList(std::istream& in);
EdgeList ReadEdgeList(const std::string& path);

// Vertices are the header window (when present), the marked vertices and all
// edge endpoints.
Network NetworkFromEdgeList(const EdgeList& list);

void WriteEdges(std::ostream& out, const std::vector<std::string>& header,
                const std::vector<WeightedEdge>& edges);

}  // namespace lrp

#endif  // LRP_EDGE_LIST_H_
