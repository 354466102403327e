#ifndef LRP_PROJECTION_H_
#define LRP_PROJECTION_H_

#include <cstddef>
#include <vector>

#include "lrp/edge_list.h"
#include "lrp/electric.h"

namespace lrp {

// Electrical network whose vertices sit at distinct real positions.
struct SpatialNetwork {
  struct Edge {
    std::size_t u;  // indices into positions
    std::size_t v;
    double conductance;  // in (0, inf]
  };

  std::vector<double> positions;
  std::vector<Edge> edges;

  // Throws DomainError: non-finite or repeated positions, self-loops,
  // out-of-range indices, conductances outside (0, inf].
  void Validate() const;
};

// A network on the consecutive integers first..last whose only edges are the
// nearest-neighbour edges (z, z+1).
struct LineNetwork {
  Site first = 0;
  // conductance[i] sits on edge (first + i, first + i + 1); 0 means absent.
  std::vector<double> conductance;

  Site last() const { return first + static_cast<Site>(conductance.size()); }
  double EdgeConductance(Site z) const { return conductance.at(z - first); }
  Network ToNetwork() const;
};

// The vertex of Z that a real position merges into: floor(x).
Site MergedSite(double position);

// Projects a spatial network onto the nearest-neighbour line:
//   1. vertices in [z, z+1) merge into z;
//   2. self-loops are removed;
//   3. an edge of original length l becomes a path of ceil(l) edges of
//      conductance ceil(l) * c;
//   4. the path is shortened (from its far end) to the distance of its merged
//      endpoints;
//   5. path edges are laid onto the integer edges they cover and summed.
// Effective conductances between matched cuts never decrease.
LineNetwork ProjectToZnn(const SpatialNetwork& g);

// Spatial network from an edge list with "v <id> <position>" vertex lines.
SpatialNetwork SpatialNetworkFromEdgeList(const EdgeList& list);

// The original network with sites 0..k-1 (vertex indices); edges keep their
// conductances.
Network SpatialToNetwork(const SpatialNetwork& g);

}  // namespace lrp

#endif  // LRP_PROJECTION_H_
