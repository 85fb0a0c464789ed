/// @file mesh.hpp
/// Simplicial mesh container (triangles in 2D, tetrahedra in 3D) with tagged
/// boundary facets and a piecewise-linear duct centerline.
///
/// The centerline is a list of straight branches; each branch carries a
/// binned local duct radius R(s) so that every wall vertex sits within a few
/// percent of R of its nearest centerline point.  Axial queries return the
/// closest branch (ties resolved toward the lowest branch index), the local
/// downstream tangent, and the local radius.

#pragma once

#include "ocflow/core/linalg.hpp"

#include <array>
#include <vector>

namespace ocflow::geom {

/// Boundary facet tags.  Inlet indices beyond the second extend the pattern.
inline constexpr int kWall = 0;
inline constexpr int kInlet1 = 1;
inline constexpr int kInlet2 = 2;
inline constexpr int kOutlet = 3;

using Point = std::array<double, 3>;

inline Point sub(const Point& a, const Point& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point add(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point scale(double s, const Point& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

struct Facet {
  std::array<int, 3> v{-1, -1, -1};  ///< vertex ids; v[2] == -1 in 2D
  int tag = kWall;
};

/// One straight centerline branch from `a` to `b` (downstream direction),
/// with the local duct radius stored in uniform bins along the axis.
struct Branch {
  Point a{};
  Point b{};
  std::vector<double> radius_bins;

  double length() const { return norm(sub(b, a)); }
  Point tangent() const { return scale(1.0 / length(), sub(b, a)); }
  double radius_at(double t) const;
};

struct LocateResult {
  int branch = -1;
  double t = 0.0;       ///< clamped axial parameter in [0, 1]
  double dist = 0.0;    ///< distance from the query to the closest point
  double radius = 0.0;  ///< local duct radius R(s)
  Point point{};        ///< closest point on the centerline
  Point tangent{};      ///< unit downstream tangent of the owning branch
};

struct Centerline {
  std::vector<Branch> branches;

  /// Closest branch (ties -> lowest index) and local axis data.
  LocateResult locate(const Point& x) const;
};

struct Mesh {
  int dim = 2;
  std::vector<Point> vertices;
  std::vector<std::array<int, 4>> cells;  ///< [a,b,c,-1] for triangles
  std::vector<Facet> facets;              ///< tagged boundary facets
  Centerline centerline;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int vertices_per_cell() const { return dim == 2 ? 3 : 4; }
  int vertices_per_facet() const { return dim == 2 ? 2 : 3; }

  /// Signed measure: area (2D, positive when counter-clockwise) or volume.
  double cell_signed_measure(int c) const;
  double cell_measure(int c) const { return std::abs(cell_signed_measure(c)); }
  double total_measure() const;
  double facet_measure(const Facet& f) const;
  Point facet_centroid(const Facet& f) const;

  /// Throws unless the mesh is structurally sound: positive cell orientation,
  /// facets matching the cell-boundary, every boundary facet tagged, no
  /// unused vertices.
  void validate() const;
};

struct WallBandReport {
  double min_ratio = 1.0;   ///< min over wall vertices of dist / R(s)
  double max_ratio = 1.0;   ///< max of the same ratio
  int n_wall_vertices = 0;
};

/// Distance-to-centerline over local radius for every wall-facet vertex.
/// The generators in generate.hpp keep this within [0.95, 1.05] for planar
/// meshes; extruded meshes report the in-plane projection ratio.
WallBandReport wall_band_report(const Mesh& m);

}  // namespace ocflow::geom
