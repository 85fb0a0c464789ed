#include "ocflow/geometry/generate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace ocflow::geom {

namespace {

int segments(double length, double target_h, int minimum = 2) {
  return std::max(minimum, static_cast<int>(std::lround(length / target_h)));
}

void fix_orientation(Mesh& m) {
  for (int c = 0; c < m.n_cells(); ++c)
    if (m.cell_signed_measure(c) < 0.0) {
      auto& k = m.cells[static_cast<std::size_t>(c)];
      std::swap(k[1], k[2]);
    }
}

/// Populates per-branch radius bins from the wall vertices assigned to each
/// branch, then verifies the 5% wall band.  Bin values are midpoints of the
/// per-bin [min, max] distance range; empty bins copy the nearest filled one.
void fit_radius_bins(Mesh& m, const std::vector<int>& bins_per_branch) {
  std::set<int> wall_vertices;
  for (const auto& f : m.facets)
    if (f.tag == kWall)
      for (int i = 0; i < m.vertices_per_facet(); ++i)
        wall_vertices.insert(f.v[i]);

  auto& branches = m.centerline.branches;
  const int nb = static_cast<int>(branches.size());
  std::vector<std::vector<double>> lo(nb), hi(nb);
  for (int b = 0; b < nb; ++b) {
    const int n = bins_per_branch[static_cast<std::size_t>(b)];
    lo[b].assign(n, std::numeric_limits<double>::infinity());
    hi[b].assign(n, 0.0);
    // Provisional one-bin radius so locate() works during the fit; the
    // closest-point search itself never reads the radius.
    branches[static_cast<std::size_t>(b)].radius_bins.assign(1, 1.0);
  }
  for (int v : wall_vertices) {
    const LocateResult loc =
        m.centerline.locate(m.vertices[static_cast<std::size_t>(v)]);
    const int n = bins_per_branch[static_cast<std::size_t>(loc.branch)];
    int bin = std::clamp(static_cast<int>(loc.t * n), 0, n - 1);
    lo[loc.branch][bin] = std::min(lo[loc.branch][bin], loc.dist);
    hi[loc.branch][bin] = std::max(hi[loc.branch][bin], loc.dist);
  }
  for (int b = 0; b < nb; ++b) {
    const int n = bins_per_branch[static_cast<std::size_t>(b)];
    std::vector<double> r(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      if (hi[b][i] > 0.0) r[static_cast<std::size_t>(i)] = 0.5 * (lo[b][i] + hi[b][i]);
    for (int i = 0; i < n; ++i) {  // fill gaps from the nearest filled bin
      if (r[static_cast<std::size_t>(i)] > 0.0) continue;
      for (int d = 1; d < n; ++d) {
        if (i - d >= 0 && r[static_cast<std::size_t>(i - d)] > 0.0) {
          r[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i - d)];
          break;
        }
        if (i + d < n && r[static_cast<std::size_t>(i + d)] > 0.0) {
          r[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i + d)];
          break;
        }
      }
      if (r[static_cast<std::size_t>(i)] <= 0.0)
        throw Error("mesh generation: centerline branch saw no wall vertex");
    }
    branches[static_cast<std::size_t>(b)].radius_bins = std::move(r);
  }
}

void require_wall_band(const Mesh& m) {
  const WallBandReport rep = wall_band_report(m);
  if (rep.min_ratio < 0.95 || rep.max_ratio > 1.05) {
    std::ostringstream os;
    os << "mesh generation: wall vertices fall outside the radius band "
       << "(min ratio " << rep.min_ratio << ", max ratio " << rep.max_ratio
       << ")";
    throw Error(os.str());
  }
}

}  // namespace

Mesh make_channel(const ChannelSpec& spec) {
  if (spec.half_width <= 0 || spec.length <= 0 || spec.target_h <= 0)
    throw Error("make_channel: dimensions must be positive");
  const double H = spec.half_width, L = spec.length;
  const int nx = segments(L, spec.target_h);
  const int ny = 2 * std::max(1, static_cast<int>(std::lround(H / spec.target_h)));

  Mesh m;
  m.dim = 2;
  // Mirror-symmetric rows: build the upper half and reflect it exactly.
  std::vector<double> ys(static_cast<std::size_t>(ny + 1));
  for (int j = ny / 2; j <= ny; ++j)
    ys[static_cast<std::size_t>(j)] =
        j == ny / 2 ? 0.0 : H * (2.0 * j / ny - 1.0);
  for (int j = 0; j < ny / 2; ++j)
    ys[static_cast<std::size_t>(j)] = -ys[static_cast<std::size_t>(ny - j)];

  auto vid = [&](int i, int j) { return i * (ny + 1) + j; };
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      m.vertices.push_back({L * i / nx, ys[static_cast<std::size_t>(j)], 0.0});
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1),
                v01 = vid(i, j + 1);
      m.cells.push_back({v00, v10, v11, -1});
      m.cells.push_back({v00, v11, v01, -1});
    }
  for (int j = 0; j < ny; ++j) {
    m.facets.push_back({{vid(0, j), vid(0, j + 1), -1}, kInlet1});
    m.facets.push_back({{vid(nx, j), vid(nx, j + 1), -1}, kOutlet});
  }
  for (int i = 0; i < nx; ++i) {
    m.facets.push_back({{vid(i, 0), vid(i + 1, 0), -1}, kWall});
    m.facets.push_back({{vid(i, ny), vid(i + 1, ny), -1}, kWall});
  }
  fix_orientation(m);

  Branch trunk;
  trunk.a = {0.0, 0.0, 0.0};
  trunk.b = {L, 0.0, 0.0};
  trunk.radius_bins = {H};
  m.centerline.branches = {trunk};

  m.validate();
  require_wall_band(m);
  return m;
}

Mesh make_bifurcation_2d(const BifurcationSpec& spec) {
  const double R = spec.inlet_half_width, theta = spec.branch_angle;
  const double Lbr = spec.branch_length, Lout = spec.outlet_length;
  if (R <= 0 || Lbr <= 0 || Lout <= 0 || spec.target_h <= 0)
    throw Error("make_bifurcation_2d: dimensions must be positive");
  if (!(theta > 0.0 && theta < 0.7853981633974483))
    throw Error("make_bifurcation_2d: branch angle must lie in (0, pi/4)");

  const double ell = 2.0 * R;               // branch width == junction side
  const double h = ell * std::cos(theta);   // trunk half-width
  const double a = ell * std::sin(theta);   // junction apex depth
  const double xstar = (h * h - a * a) / (2.0 * a);  // axis meeting point
  if (Lout <= xstar + R)
    throw Error("make_bifurcation_2d: outlet trunk too short for the junction");

  const Point p_apex{-a, 0.0, 0.0};       // junction apex (on the axis)
  const Point p_up{0.0, h, 0.0};          // upper junction/trunk corner
  const Point s_hat{a / ell, h / ell, 0.0};   // along the upper junction side
  const Point n_hat{-h / ell, a / ell, 0.0};  // outward normal of that side

  const int n_c = segments(ell, spec.target_h);
  const int n_ax = segments(Lbr, spec.target_h);
  const int nx = segments(Lout, spec.target_h);
  const int ny = 2 * std::max(1, static_cast<int>(std::lround(h / spec.target_h)));

  Mesh m;
  m.dim = 2;
  auto add_vertex = [&](const Point& p) {
    m.vertices.push_back(p);
    return m.n_vertices() - 1;
  };
  auto reflect_of = [&](int id) {
    const Point& p = m.vertices[static_cast<std::size_t>(id)];
    return add_vertex({p[0], -p[1], 0.0});
  };

  // --- upper branch grid: i along the axis (0 = inlet, n_ax = junction),
  //     j across the section (0 = apex-side wall, n_c = outer wall).
  std::vector<std::vector<int>> up(static_cast<std::size_t>(n_ax + 1),
                                   std::vector<int>(static_cast<std::size_t>(n_c + 1)));
  for (int i = 0; i <= n_ax; ++i)
    for (int j = 0; j <= n_c; ++j) {
      const double off = Lbr * (n_ax - i) / n_ax;  // 0 on the junction side
      const double cross = ell * j / n_c;
      Point p = add(p_apex, add(scale(off, n_hat), scale(cross, s_hat)));
      if (i == n_ax && j == 0) p = p_apex;  // exact apex
      up[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = add_vertex(p);
    }

  // --- lower branch: exact reflection; the apex vertex is shared.
  std::vector<std::vector<int>> lo(static_cast<std::size_t>(n_ax + 1),
                                   std::vector<int>(static_cast<std::size_t>(n_c + 1)));
  for (int i = 0; i <= n_ax; ++i)
    for (int j = 0; j <= n_c; ++j)
      lo[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          (i == n_ax && j == 0)
              ? up[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
              : reflect_of(up[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

  // --- trunk grid: i along x (col 0 on the junction), j from -h to +h.
  // Column 0 endpoints are the shared junction corners.
  std::vector<std::vector<int>> tr(static_cast<std::size_t>(nx + 1),
                                   std::vector<int>(static_cast<std::size_t>(ny + 1)));
  for (int i = 0; i <= nx; ++i) {
    const double x = Lout * i / nx;
    for (int j = ny; j >= 0; --j) {
      auto& slot = tr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (i == 0 && j == ny) {
        slot = up[static_cast<std::size_t>(n_ax)][static_cast<std::size_t>(n_c)];
      } else if (i == 0 && j == 0) {
        slot = lo[static_cast<std::size_t>(n_ax)][static_cast<std::size_t>(n_c)];
      } else if (j > ny / 2) {
        slot = add_vertex({x, h * (2.0 * j / ny - 1.0), 0.0});
      } else if (j == ny / 2) {
        slot = add_vertex({x, 0.0, 0.0});
      } else {
        slot = reflect_of(tr[static_cast<std::size_t>(i)][static_cast<std::size_t>(ny - j)]);
      }
    }
  }

  // --- junction triangle: fan from its centroid to the three sides.
  const int fan = add_vertex({-a / 3.0, 0.0, 0.0});
  auto add_quad_cells = [&](const std::vector<std::vector<int>>& grid, int ni,
                            int nj) {
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < nj; ++j) {
        const int v00 = grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const int v10 = grid[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)];
        const int v11 = grid[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)];
        const int v01 = grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)];
        m.cells.push_back({v00, v10, v11, -1});
        m.cells.push_back({v00, v11, v01, -1});
      }
  };
  add_quad_cells(up, n_ax, n_c);
  add_quad_cells(lo, n_ax, n_c);
  add_quad_cells(tr, nx, ny);
  for (int j = 0; j < n_c; ++j) {
    m.cells.push_back({fan,
                       up[static_cast<std::size_t>(n_ax)][static_cast<std::size_t>(j)],
                       up[static_cast<std::size_t>(n_ax)][static_cast<std::size_t>(j + 1)],
                       -1});
    m.cells.push_back({fan,
                       lo[static_cast<std::size_t>(n_ax)][static_cast<std::size_t>(j)],
                       lo[static_cast<std::size_t>(n_ax)][static_cast<std::size_t>(j + 1)],
                       -1});
  }
  for (int j = 0; j < ny; ++j)
    m.cells.push_back({fan, tr[0][static_cast<std::size_t>(j)],
                       tr[0][static_cast<std::size_t>(j + 1)], -1});

  // --- boundary facets.
  for (int j = 0; j < n_c; ++j) {
    m.facets.push_back({{up[0][static_cast<std::size_t>(j)],
                         up[0][static_cast<std::size_t>(j + 1)], -1},
                        kInlet1});
    m.facets.push_back({{lo[0][static_cast<std::size_t>(j)],
                         lo[0][static_cast<std::size_t>(j + 1)], -1},
                        kInlet2});
  }
  for (int i = 0; i < n_ax; ++i)
    for (int j : {0, n_c}) {
      m.facets.push_back({{up[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                           up[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)],
                           -1},
                          kWall});
      m.facets.push_back({{lo[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                           lo[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)],
                           -1},
                          kWall});
    }
  for (int j = 0; j < ny; ++j)
    m.facets.push_back({{tr[static_cast<std::size_t>(nx)][static_cast<std::size_t>(j)],
                         tr[static_cast<std::size_t>(nx)][static_cast<std::size_t>(j + 1)],
                         -1},
                        kOutlet});
  for (int i = 0; i < nx; ++i)
    for (int j : {0, ny})
      m.facets.push_back({{tr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                           tr[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)],
                           -1},
                          kWall});

  fix_orientation(m);

  // --- centerline: two branch axes meeting the trunk axis at x*.
  const Point side_mid{-a / 2.0, h / 2.0, 0.0};
  const Point inlet_center = add(side_mid, scale(Lbr, n_hat));
  Branch b1, b2, b3;
  b1.a = inlet_center;
  b1.b = {xstar, 0.0, 0.0};
  b2.a = {inlet_center[0], -inlet_center[1], 0.0};
  b2.b = b1.b;
  b3.a = b1.b;
  b3.b = {Lout, 0.0, 0.0};
  m.centerline.branches = {b1, b2, b3};

  const double bin_h = std::max(R / 10.0, 1e-6);
  std::vector<int> bins;
  for (const Branch& br : m.centerline.branches)
    bins.push_back(std::max(8, static_cast<int>(std::ceil(br.length() / bin_h))));
  fit_radius_bins(m, bins);

  m.validate();
  require_wall_band(m);
  return m;
}

Mesh make_bifurcation_3d(const BifurcationSpec& spec) {
  const Mesh flat = make_bifurcation_2d(spec);
  const double w = spec.inlet_half_width;
  const int nz =
      2 * std::max(1, static_cast<int>(std::lround(w / spec.target_h)));
  const int nv2 = flat.n_vertices();

  Mesh m;
  m.dim = 3;
  m.centerline = flat.centerline;
  m.vertices.reserve(static_cast<std::size_t>(nv2) * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    const double z = k == nz / 2 ? 0.0 : w * (2.0 * k / nz - 1.0);
    for (const Point& p : flat.vertices) m.vertices.push_back({p[0], p[1], z});
  }
  auto lift = [&](int v2, int layer) { return layer * nv2 + v2; };

  // Prism -> 3 tets with face-consistent quad diagonals: every quad face is
  // split by the diagonal through its smallest global vertex id.
  auto split_prism = [&](std::array<int, 6> w6) {
    int pos = 0;
    for (int i = 1; i < 6; ++i)
      if (w6[static_cast<std::size_t>(i)] < w6[static_cast<std::size_t>(pos)]) pos = i;
    if (pos >= 3) {  // swap decks so the minimum sits on the bottom
      std::swap(w6[0], w6[3]);
      std::swap(w6[1], w6[4]);
      std::swap(w6[2], w6[5]);
      pos -= 3;
    }
    while (pos != 0) {  // rotate bottom (and top in step) until min is first
      std::array<int, 6> r{w6[1], w6[2], w6[0], w6[4], w6[5], w6[3]};
      w6 = r;
      --pos;
    }
    std::array<std::array<int, 4>, 3> tets;
    if (std::min(w6[1], w6[5]) < std::min(w6[2], w6[4])) {
      tets = {{{w6[0], w6[1], w6[2], w6[5]},
               {w6[0], w6[1], w6[5], w6[4]},
               {w6[0], w6[4], w6[5], w6[3]}}};
    } else {
      tets = {{{w6[0], w6[1], w6[2], w6[4]},
               {w6[0], w6[4], w6[2], w6[5]},
               {w6[0], w6[4], w6[5], w6[3]}}};
    }
    return tets;
  };

  for (int k = 0; k < nz; ++k)
    for (const auto& cell : flat.cells) {
      const std::array<int, 6> w6{lift(cell[0], k),     lift(cell[1], k),
                                  lift(cell[2], k),     lift(cell[0], k + 1),
                                  lift(cell[1], k + 1), lift(cell[2], k + 1)};
      for (const auto& t : split_prism(w6)) m.cells.push_back(t);
    }

  // Side facets: each 2D boundary edge sweeps a quad per layer, split by the
  // same smallest-id diagonal rule so triangles match the tet faces.
  for (int k = 0; k < nz; ++k)
    for (const auto& f : flat.facets) {
      const int pk = lift(f.v[0], k), qk = lift(f.v[1], k);
      const int pk1 = lift(f.v[0], k + 1), qk1 = lift(f.v[1], k + 1);
      if (std::min(pk, qk1) < std::min(qk, pk1)) {
        m.facets.push_back({{pk, qk, qk1}, f.tag});
        m.facets.push_back({{pk, qk1, pk1}, f.tag});
      } else {
        m.facets.push_back({{qk, qk1, pk1}, f.tag});
        m.facets.push_back({{qk, pk1, pk}, f.tag});
      }
    }
  // Extrusion caps are rigid walls.
  for (const auto& cell : flat.cells) {
    m.facets.push_back({{lift(cell[0], 0), lift(cell[1], 0), lift(cell[2], 0)}, kWall});
    m.facets.push_back(
        {{lift(cell[0], nz), lift(cell[1], nz), lift(cell[2], nz)}, kWall});
  }

  for (auto& cell : m.cells) {  // positive orientation
    const Point& p0 = m.vertices[static_cast<std::size_t>(cell[0])];
    const Point d1 = sub(m.vertices[static_cast<std::size_t>(cell[1])], p0);
    const Point d2 = sub(m.vertices[static_cast<std::size_t>(cell[2])], p0);
    const Point d3 = sub(m.vertices[static_cast<std::size_t>(cell[3])], p0);
    if (dot(d1, cross(d2, d3)) < 0.0) std::swap(cell[2], cell[3]);
  }

  m.validate();
  return m;
}

}  // namespace ocflow::geom
