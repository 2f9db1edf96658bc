#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "corrnet/error.hpp"
#include "corrnet/rng.hpp"
#include "corrnet/topology.hpp"

namespace corrnet {

namespace geometry {

double orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  return (b - a).dot((c - a).cross(d - a));
}

double insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e) {
  Eigen::Matrix4d m;
  const Point3* pts[4] = {&a, &b, &c, &d};
  for (int r = 0; r < 4; ++r) {
    const Point3 q = *pts[r] - e;
    m.row(r) << q.x(), q.y(), q.z(), q.squaredNorm();
  }
  return -m.determinant();
}

}  // namespace geometry

namespace {

using Real = long double;
using RPoint = std::array<Real, 3>;

Real orient(const RPoint& a, const RPoint& b, const RPoint& c, const RPoint& d) {
  const Real ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const Real vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const Real wx = d[0] - a[0], wy = d[1] - a[1], wz = d[2] - a[2];
  return ux * (vy * wz - vz * wy) - uy * (vx * wz - vz * wx) + uz * (vx * wy - vy * wx);
}

// Sign convention matches geometry::insphere.
Real in_sphere(const RPoint& a, const RPoint& b, const RPoint& c, const RPoint& d, const RPoint& e) {
  Real m[4][4];
  const RPoint* pts[4] = {&a, &b, &c, &d};
  for (int r = 0; r < 4; ++r) {
    const Real x = (*pts[r])[0] - e[0], y = (*pts[r])[1] - e[1], z = (*pts[r])[2] - e[2];
    m[r][0] = x;
    m[r][1] = y;
    m[r][2] = z;
    m[r][3] = x * x + y * y + z * z;
  }
  auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
    return m[r0][c0] * (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) -
           m[r0][c1] * (m[r1][c0] * m[r2][c2] - m[r1][c2] * m[r2][c0]) +
           m[r0][c2] * (m[r1][c0] * m[r2][c1] - m[r1][c1] * m[r2][c0]);
  };
  // Laplace expansion along the lifted column.
  const Real det = -m[0][3] * det3(1, 2, 3, 0, 1, 2) + m[1][3] * det3(0, 2, 3, 0, 1, 2) -
                   m[2][3] * det3(0, 1, 3, 0, 1, 2) + m[3][3] * det3(0, 1, 2, 0, 1, 2);
  return -det;
}

struct Tet {
  std::array<int, 4> v{};
  std::array<int, 4> nb{-1, -1, -1, -1};
  bool alive = true;
};

std::uint64_t content_hash(const std::vector<Point3>& pts) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (const auto& p : pts) {
    for (int a = 0; a < 3; ++a) {
      h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p[a]));
    }
  }
  return h;
}

class Triangulator {
 public:
  explicit Triangulator(const std::vector<Point3>& pts) : n_(static_cast<int>(pts.size())), inf_(n_) {
    Eigen::AlignedBox3d box;
    for (const auto& p : pts) box.extend(p);
    const double diag = box.diagonal().norm();
    scale_ = diag > 0 ? diag : 1.0;
    // Characteristic spacing; perturbations are 1e-8 of it.
    const double spacing = scale_ / std::cbrt(static_cast<double>(std::max(n_, 1)));
    coords_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      std::uint64_t s = splitmix64(0x5eed0000ULL + static_cast<std::uint64_t>(i));
      for (int a = 0; a < 3; ++a) {
        s = splitmix64(s);
        const double u = static_cast<double>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        coords_[i][a] = static_cast<Real>(pts[i][a]) + static_cast<Real>(1e-8 * spacing * u);
      }
    }
    original_ = &pts;
  }

  TopologyGraph run();

 private:
  bool is_ghost(const Tet& t) const {
    return t.v[0] == inf_ || t.v[1] == inf_ || t.v[2] == inf_ || t.v[3] == inf_;
  }
  int inf_slot(const Tet& t) const {
    for (int i = 0; i < 4; ++i) {
      if (t.v[i] == inf_) return i;
    }
    return -1;
  }
  // Orientation of t with vertex slot i replaced by point q.
  Real orient_replaced(const Tet& t, int i, int q) const {
    std::array<const RPoint*, 4> p;
    for (int a = 0; a < 4; ++a) p[a] = &coords_[a == i ? q : t.v[a]];
    return orient(*p[0], *p[1], *p[2], *p[3]);
  }
  bool finite_conflict(const Tet& t, int q) const {
    return in_sphere(coords_[t.v[0]], coords_[t.v[1]], coords_[t.v[2]], coords_[t.v[3]], coords_[q]) > 0;
  }
  bool conflict(int ti, int q) const {
    const Tet& t = tets_[ti];
    const int g = inf_slot(t);
    if (g < 0) return finite_conflict(t, q);
    const Real o = orient_replaced(t, g, q);
    if (o > 0) return true;
    if (o < 0) return false;
    return finite_conflict(tets_[t.nb[g]], q);
  }

  int new_tet(const std::array<int, 4>& v) {
    Tet t;
    t.v = v;
    if (!free_.empty()) {
      const int id = free_.back();
      free_.pop_back();
      tets_[id] = t;
      return id;
    }
    tets_.push_back(t);
    return static_cast<int>(tets_.size()) - 1;
  }

  void initial_simplex(const std::vector<int>& order, std::array<int, 4>& chosen);
  int locate(int q);
  void insert(int q);

  int n_;
  int inf_;
  double scale_ = 1.0;
  const std::vector<Point3>* original_ = nullptr;
  std::vector<RPoint> coords_;
  std::vector<Tet> tets_;
  std::vector<int> free_;
  int last_ = 0;

  // Scratch for insertion.
  std::vector<int> cavity_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
};

void Triangulator::initial_simplex(const std::vector<int>& order, std::array<int, 4>& chosen) {
  const auto& pts = *original_;
  const int p0 = order.front();
  int p1 = -1, p2 = -1, p3 = -1;
  double best = -1.0;
  for (int q : order) {
    const double d = (pts[q] - pts[p0]).norm();
    if (d > best) best = d, p1 = q;
  }
  best = -1.0;
  for (int q : order) {
    const double a = (pts[p1] - pts[p0]).cross(pts[q] - pts[p0]).norm();
    if (a > best) best = a, p2 = q;
  }
  if (!(best > 1e-9 * scale_ * scale_)) throw DegenerateGeometry("all voxel positions are collinear");
  best = -1.0;
  for (int q : order) {
    const double v = std::abs(geometry::orient3d(pts[p0], pts[p1], pts[p2], pts[q]));
    if (v > best) best = v, p3 = q;
  }
  if (!(best > 1e-9 * scale_ * scale_ * scale_)) {
    throw DegenerateGeometry("all voxel positions are coplanar");
  }
  chosen = {p0, p1, p2, p3};
  if (orient(coords_[p0], coords_[p1], coords_[p2], coords_[p3]) < 0) std::swap(chosen[0], chosen[1]);
}

int Triangulator::locate(int q) {
  int t = last_;
  if (!tets_[t].alive) {
    t = 0;
    while (!tets_[t].alive) ++t;
  }
  if (is_ghost(tets_[t])) t = tets_[t].nb[inf_slot(tets_[t])];

  const int max_steps = 4 * static_cast<int>(tets_.size()) + 16;
  for (int step = 0; step < max_steps; ++step) {
    const Tet& cur = tets_[t];
    int next = -1;
    for (int k = 0; k < 4; ++k) {
      const int i = (k + step) & 3;
      if (orient_replaced(cur, i, q) < 0) {
        next = cur.nb[i];
        break;
      }
    }
    if (next < 0) return t;
    if (is_ghost(tets_[next])) return next;
    t = next;
  }
  // The walk cannot cycle on a Delaunay triangulation with consistent
  // predicates; a scan keeps the insertion going if it ever does.
  for (int i = 0; i < static_cast<int>(tets_.size()); ++i) {
    if (tets_[i].alive && conflict(i, q)) return i;
  }
  throw InternalError("delaunay3d: no conflicting tetrahedron for point " + std::to_string(q));
}

void Triangulator::insert(int q) {
  const int root = locate(q);
  mark_.resize(tets_.size(), 0);

  auto grow = [&](const std::vector<char>* allowed) {
    ++stamp_;
    cavity_.clear();
    cavity_.push_back(root);
    mark_[root] = stamp_;
    for (std::size_t head = 0; head < cavity_.size(); ++head) {
      const Tet& t = tets_[cavity_[head]];
      for (int i = 0; i < 4; ++i) {
        const int nb = t.nb[i];
        if (mark_[nb] == stamp_) continue;
        const bool ok = allowed ? (*allowed)[nb] != 0 : conflict(nb, q);
        if (ok) {
          mark_[nb] = stamp_;
          cavity_.push_back(nb);
        }
      }
    }
  };
  grow(nullptr);

  // Shrink until every boundary face is visible from q (star-shaped cavity).
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<char> keep(tets_.size(), 0);
    for (int c : cavity_) keep[c] = 1;
    for (int c : cavity_) {
      if (c == root) continue;
      const Tet& t = tets_[c];
      for (int i = 0; i < 4; ++i) {
        if (keep[t.nb[i]]) continue;
        const bool ghost_new = t.v[i] != inf_ && is_ghost(t);
        if (!ghost_new && orient_replaced(t, i, q) <= 0) {
          keep[c] = 0;
          changed = true;
          break;
        }
      }
    }
    if (changed) grow(&keep);
  }

  ++stamp_;
  for (int c : cavity_) mark_[c] = stamp_;
  const std::uint32_t in_cavity = stamp_;

  std::unordered_map<std::uint64_t, std::pair<int, int>> open_faces;
  auto edge_key = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n_ + 1) + static_cast<std::uint64_t>(b);
  };
  int created = -1;
  for (int c : cavity_) {
    for (int i = 0; i < 4; ++i) {
      const int outside = tets_[c].nb[i];
      if (outside < static_cast<int>(mark_.size()) && mark_[outside] == in_cavity) continue;
      std::array<int, 4> v = tets_[c].v;
      v[i] = q;
      const int nt = new_tet(v);
      if (static_cast<std::size_t>(nt) >= mark_.size()) mark_.resize(tets_.size(), 0);
      created = nt;
      tets_[nt].nb[i] = outside;
      for (int k = 0; k < 4; ++k) {
        if (tets_[outside].nb[k] == c) {
          tets_[outside].nb[k] = nt;
          break;
        }
      }
      for (int l = 0; l < 4; ++l) {
        if (l == i) continue;
        int e[2], m = 0;
        for (int a = 0; a < 4; ++a) {
          if (a != i && a != l) e[m++] = v[a];
        }
        const auto key = edge_key(e[0], e[1]);
        auto it = open_faces.find(key);
        if (it == open_faces.end()) {
          open_faces.emplace(key, std::make_pair(nt, l));
        } else {
          tets_[nt].nb[l] = it->second.first;
          tets_[it->second.first].nb[it->second.second] = nt;
          open_faces.erase(it);
        }
      }
    }
  }
  if (!open_faces.empty()) throw InternalError("delaunay3d: cavity boundary is not closed");
  for (int c : cavity_) {
    // New tets may reuse freed slots only after this loop, so free last.
    tets_[c].alive = false;
    free_.push_back(c);
  }
  last_ = created;
}

TopologyGraph Triangulator::run() {
  std::vector<int> order(static_cast<std::size_t>(n_));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(content_hash(*original_));
  rng.shuffle(order);

  std::array<int, 4> s{};
  initial_simplex(order, s);
  tets_.reserve(static_cast<std::size_t>(8 * n_ + 16));
  const int t0 = new_tet(s);
  for (int i = 0; i < 4; ++i) {
    std::array<int, 4> v = s;
    v[i] = inf_;
    std::swap(v[(i + 1) & 3], v[(i + 2) & 3]);
    new_tet(v);
  }
  // Link the five initial cells through their shared faces.
  std::unordered_map<std::uint64_t, std::pair<int, int>> faces;
  for (int t = 0; t < 5; ++t) {
    for (int i = 0; i < 4; ++i) {
      std::array<int, 3> f;
      int m = 0;
      for (int a = 0; a < 4; ++a) {
        if (a != i) f[m++] = tets_[t].v[a];
      }
      std::sort(f.begin(), f.end());
      const std::uint64_t key = (static_cast<std::uint64_t>(f[0]) * (n_ + 1) + f[1]) * (n_ + 1) + f[2];
      auto it = faces.find(key);
      if (it == faces.end()) {
        faces.emplace(key, std::make_pair(t, i));
      } else {
        tets_[t].nb[i] = it->second.first;
        tets_[it->second.first].nb[it->second.second] = t;
      }
    }
  }
  last_ = t0;

  for (int q : order) {
    if (q == s[0] || q == s[1] || q == s[2] || q == s[3]) continue;
    insert(q);
  }

  TopologyGraph g;
  g.neighbors.assign(static_cast<std::size_t>(n_), {});
  for (const auto& t : tets_) {
    if (!t.alive || is_ghost(t)) continue;
    std::array<int, 4> v = t.v;
    std::sort(v.begin(), v.end());
    g.tetrahedra.push_back(v);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        if (a != b) g.neighbors[v[a]].push_back(v[b]);
      }
    }
  }
  std::sort(g.tetrahedra.begin(), g.tetrahedra.end());
  for (auto& nb : g.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

}  // namespace

TopologyGraph delaunay3d(const VoxelLayout& layout) {
  if (layout.size() < 4) throw InvalidArgument("delaunay3d needs at least 4 voxels");
  Triangulator tri(layout.positions());
  return tri.run();
}

}  // namespace corrnet
