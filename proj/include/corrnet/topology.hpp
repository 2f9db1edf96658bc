#pragma once

#include <array>
#include <filesystem>
#include <utility>
#include <vector>

#include "corrnet/dataset.hpp"
#include "corrnet/types.hpp"

namespace corrnet {

// Delaunay tetrahedralization of a voxel layout and the edge graph it induces.
struct TopologyGraph {
  // Finite tetrahedra, each with ascending vertex indices; list sorted.
  std::vector<std::array<int, 4>> tetrahedra;
  // Sorted Delaunay neighbors per voxel (symmetric, irreflexive).
  std::vector<IndexSet> neighbors;

  int size() const { return static_cast<int>(neighbors.size()); }
  bool has_edge(int j, int m) const;
  // Each edge once, as (j, m) with j < m, lexicographically sorted.
  std::vector<std::pair<int, int>> edges() const;
};

// Incremental Bowyer-Watson insertion with ghost tetrahedra on the hull.
// Predicates run on coordinates offset by a tiny per-index perturbation so
// grid-like (cospherical, coplanar) layouts still give a valid triangulation.
// Throws DegenerateGeometry when all points are collinear or coplanar, and
// InvalidArgument for fewer than 4 points.
TopologyGraph delaunay3d(const VoxelLayout& layout);

namespace geometry {
// (b-a) . ((c-a) x (d-a)); positive for the reference orientation of the
// tetrahedron (0,0,0), (1,0,0), (0,1,0), (0,0,1).
double orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
// Positive iff e is strictly inside the circumsphere of a positively oriented
// (a, b, c, d).
double insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e);
}  // namespace geometry

enum class RadiusMode {
  SvmMinEdge,       // shortest incident Delaunay edge
  SnnMeanDistance,  // mean distance to all voxels, self term included
};

const char* to_string(RadiusMode mode);

double adaptive_radius(const TopologyGraph& graph, const VoxelLayout& layout, int j, RadiusMode mode);
std::vector<double> adaptive_radii(const TopologyGraph& graph, const VoxelLayout& layout, RadiusMode mode);

struct NeighborhoodSet {
  RadiusMode mode = RadiusMode::SvmMinEdge;
  std::vector<double> radius;
  // Tbin_j: Delaunay neighbors of j, voxels within radius[j] of j, and j.
  std::vector<IndexSet> members;

  int size() const { return static_cast<int>(members.size()); }
};

NeighborhoodSet topological_neighborhood(const TopologyGraph& graph, const VoxelLayout& layout,
                                         const std::vector<double>& radii,
                                         RadiusMode mode = RadiusMode::SvmMinEdge);

// Row j has ones exactly at Tbin_j. Not symmetric in general.
BinaryMatrix position_prior(const NeighborhoodSet& neigh);

// edges.csv (j,m with j<m) and radii.csv (j,radius).
void write_topology_dump(const std::filesystem::path& dir, const TopologyGraph& graph,
                         const NeighborhoodSet& neigh);

}  // namespace corrnet
