#include "ocflow/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace ocflow::geom {

double Branch::radius_at(double t) const {
  if (radius_bins.empty()) throw Error("Branch::radius_at: no radius bins");
  const int n = static_cast<int>(radius_bins.size());
  int b = static_cast<int>(t * n);
  b = std::clamp(b, 0, n - 1);
  return radius_bins[static_cast<std::size_t>(b)];
}

LocateResult Centerline::locate(const Point& x) const {
  if (branches.empty()) throw Error("Centerline::locate: no branches");
  LocateResult best;
  best.dist = std::numeric_limits<double>::infinity();
  for (int bi = 0; bi < static_cast<int>(branches.size()); ++bi) {
    const Branch& br = branches[static_cast<std::size_t>(bi)];
    const Point ab = sub(br.b, br.a);
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(sub(x, br.a), ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point p = add(br.a, scale(t, ab));
    const double d = norm(sub(x, p));
    if (d < best.dist) {  // strict: ties keep the lowest branch index
      best.branch = bi;
      best.t = t;
      best.dist = d;
      best.point = p;
      best.tangent = br.tangent();
      best.radius = br.radius_at(t);
    }
  }
  return best;
}

double Mesh::cell_signed_measure(int c) const {
  const auto& k = cells[static_cast<std::size_t>(c)];
  const Point& p0 = vertices[static_cast<std::size_t>(k[0])];
  const Point& p1 = vertices[static_cast<std::size_t>(k[1])];
  const Point& p2 = vertices[static_cast<std::size_t>(k[2])];
  if (dim == 2) {
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                  (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
  const Point& p3 = vertices[static_cast<std::size_t>(k[3])];
  const Point d1 = sub(p1, p0), d2 = sub(p2, p0), d3 = sub(p3, p0);
  return dot(d1, cross(d2, d3)) / 6.0;
}

double Mesh::total_measure() const {
  double s = 0.0;
  for (int c = 0; c < n_cells(); ++c) s += cell_measure(c);
  return s;
}

double Mesh::facet_measure(const Facet& f) const {
  const Point& p0 = vertices[static_cast<std::size_t>(f.v[0])];
  const Point& p1 = vertices[static_cast<std::size_t>(f.v[1])];
  if (dim == 2) return norm(sub(p1, p0));
  const Point& p2 = vertices[static_cast<std::size_t>(f.v[2])];
  return 0.5 * norm(cross(sub(p1, p0), sub(p2, p0)));
}

Point Mesh::facet_centroid(const Facet& f) const {
  const int nv = vertices_per_facet();
  Point c{0, 0, 0};
  for (int i = 0; i < nv; ++i)
    c = add(c, vertices[static_cast<std::size_t>(f.v[i])]);
  return scale(1.0 / nv, c);
}

namespace {

std::array<int, 3> sorted_key(std::array<int, 3> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

void Mesh::validate() const {
  if (dim != 2 && dim != 3) throw Error("Mesh::validate: dim must be 2 or 3");
  const int nvc = vertices_per_cell();
  const int nvf = vertices_per_facet();

  std::vector<char> used(vertices.size(), 0);
  for (int c = 0; c < n_cells(); ++c) {
    const auto& k = cells[static_cast<std::size_t>(c)];
    for (int i = 0; i < nvc; ++i) {
      if (k[i] < 0 || k[i] >= n_vertices()) {
        std::ostringstream os;
        os << "Mesh::validate: cell " << c << " references bad vertex " << k[i];
        throw Error(os.str());
      }
      used[static_cast<std::size_t>(k[i])] = 1;
    }
    if (dim == 2 && k[3] != -1)
      throw Error("Mesh::validate: 2D cell with four vertices");
    if (cell_signed_measure(c) <= 0.0) {
      std::ostringstream os;
      os << "Mesh::validate: cell " << c << " has non-positive orientation";
      throw Error(os.str());
    }
  }
  for (std::size_t v = 0; v < used.size(); ++v)
    if (!used[v]) {
      std::ostringstream os;
      os << "Mesh::validate: vertex " << v << " is not used by any cell";
      throw Error(os.str());
    }

  // Sub-facets of cells appearing exactly once == boundary; they must match
  // the tagged facet list one-to-one.
  std::map<std::array<int, 3>, int> count;
  for (int c = 0; c < n_cells(); ++c) {
    const auto& k = cells[static_cast<std::size_t>(c)];
    if (dim == 2) {
      ++count[sorted_key({k[0], k[1], -1})];
      ++count[sorted_key({k[1], k[2], -1})];
      ++count[sorted_key({k[2], k[0], -1})];
    } else {
      ++count[sorted_key({k[1], k[2], k[3]})];
      ++count[sorted_key({k[0], k[2], k[3]})];
      ++count[sorted_key({k[0], k[1], k[3]})];
      ++count[sorted_key({k[0], k[1], k[2]})];
    }
  }
  std::set<std::array<int, 3>> boundary;
  for (const auto& [key, n] : count) {
    if (n > 2) throw Error("Mesh::validate: facet shared by >2 cells");
    if (n == 1) boundary.insert(key);
  }
  std::set<std::array<int, 3>> tagged;
  for (const auto& f : facets) {
    std::array<int, 3> key = f.v;
    if (dim == 2) key[2] = -1;
    key = sorted_key(key);
    if (!boundary.count(key))
      throw Error("Mesh::validate: tagged facet is not on the boundary");
    if (!tagged.insert(key).second)
      throw Error("Mesh::validate: duplicate tagged facet");
    (void)nvf;
  }
  if (tagged.size() != boundary.size()) {
    std::ostringstream os;
    os << "Mesh::validate: " << boundary.size() - tagged.size()
       << " boundary facet(s) carry no tag";
    throw Error(os.str());
  }
}

WallBandReport wall_band_report(const Mesh& m) {
  WallBandReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  std::set<int> wall_vertices;
  for (const auto& f : m.facets) {
    if (f.tag != kWall) continue;
    if (m.dim == 3) {
      // Extruded caps (constant-z facets) have no meaningful in-plane radius;
      // the band applies to the duct side walls.
      const double z0 = m.vertices[static_cast<std::size_t>(f.v[0])][2];
      const double z1 = m.vertices[static_cast<std::size_t>(f.v[1])][2];
      const double z2 = m.vertices[static_cast<std::size_t>(f.v[2])][2];
      if (z0 == z1 && z1 == z2) continue;
    }
    for (int i = 0; i < m.vertices_per_facet(); ++i) wall_vertices.insert(f.v[i]);
  }
  for (int v : wall_vertices) {
    Point p = m.vertices[static_cast<std::size_t>(v)];
    if (m.dim == 3) p[2] = 0.0;  // extruded duct: in-plane projection
    const LocateResult loc = m.centerline.locate(p);
    const double ratio = loc.dist / loc.radius;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.n_wall_vertices;
  }
  if (rep.n_wall_vertices == 0) {
    rep.min_ratio = rep.max_ratio = 1.0;
  }
  return rep;
}

}  // namespace ocflow::geom
