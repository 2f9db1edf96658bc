#include <algorithm>
#include <fstream>
#include <limits>

#include "corrnet/csv.hpp"
#include "corrnet/error.hpp"
#include "corrnet/topology.hpp"

namespace corrnet {

bool TopologyGraph::has_edge(int j, int m) const {
  const auto& nb = neighbors.at(static_cast<std::size_t>(j));
  return std::binary_search(nb.begin(), nb.end(), m);
}

std::vector<std::pair<int, int>> TopologyGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < size(); ++j) {
    for (int m : neighbors[j]) {
      if (j < m) out.emplace_back(j, m);
    }
  }
  return out;
}

const char* to_string(RadiusMode mode) {
  return mode == RadiusMode::SvmMinEdge ? "svm-min-edge" : "snn-mean-distance";
}

double adaptive_radius(const TopologyGraph& graph, const VoxelLayout& layout, int j, RadiusMode mode) {
  if (j < 0 || j >= layout.size() || graph.size() != layout.size()) {
    throw InvalidArgument("voxel index out of range");
  }
  if (mode == RadiusMode::SvmMinEdge) {
    const auto& nb = graph.neighbors[j];
    if (nb.empty()) throw InternalError("voxel " + std::to_string(j) + " has no Delaunay neighbor");
    double best = std::numeric_limits<double>::infinity();
    for (int m : nb) best = std::min(best, layout.distance(j, m));
    return best;
  }
  double sum = 0.0;
  for (int l = 0; l < layout.size(); ++l) sum += layout.distance(j, l);
  return sum / layout.size();
}

std::vector<double> adaptive_radii(const TopologyGraph& graph, const VoxelLayout& layout, RadiusMode mode) {
  std::vector<double> radii(static_cast<std::size_t>(layout.size()));
  for (int j = 0; j < layout.size(); ++j) radii[j] = adaptive_radius(graph, layout, j, mode);
  return radii;
}

NeighborhoodSet topological_neighborhood(const TopologyGraph& graph, const VoxelLayout& layout,
                                         const std::vector<double>& radii, RadiusMode mode) {
  const int d1 = layout.size();
  if (graph.size() != d1 || static_cast<int>(radii.size()) != d1) {
    throw InvalidArgument("graph, layout and radii sizes differ");
  }
  NeighborhoodSet out;
  out.mode = mode;
  out.radius = radii;
  out.members.resize(static_cast<std::size_t>(d1));
  for (int j = 0; j < d1; ++j) {
    auto& members = out.members[j];
    const auto& nb = graph.neighbors[j];
    // Both sources are produced in index order; merge into a sorted set.
    std::size_t e = 0;
    for (int l = 0; l < d1; ++l) {
      while (e < nb.size() && nb[e] < l) ++e;
      const bool edge = e < nb.size() && nb[e] == l;
      if (edge || l == j || layout.distance(j, l) <= radii[j]) members.push_back(l);
    }
  }
  return out;
}

BinaryMatrix position_prior(const NeighborhoodSet& neigh) {
  const int d1 = neigh.size();
  BinaryMatrix prior = BinaryMatrix::Zero(d1, d1);
  for (int j = 0; j < d1; ++j) {
    for (int m : neigh.members[j]) prior(j, m) = 1;
  }
  return prior;
}

void write_topology_dump(const std::filesystem::path& dir, const TopologyGraph& graph,
                         const NeighborhoodSet& neigh) {
  std::filesystem::create_directories(dir);
  std::ofstream edges(dir / "edges.csv", std::ios::binary);
  if (!edges) throw IoError("cannot write " + (dir / "edges.csv").string());
  for (const auto& [j, m] : graph.edges()) edges << j << ',' << m << '\n';
  std::ofstream radii(dir / "radii.csv", std::ios::binary);
  if (!radii) throw IoError("cannot write " + (dir / "radii.csv").string());
  for (int j = 0; j < neigh.size(); ++j) radii << j << ',' << csv::format_double(neigh.radius[j]) << '\n';
}

}  // namespace corrnet
