#include "ocflow/fem/space.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace ocflow::fem {

namespace {

/// Cell-local edges as vertex-index pairs, matching eval_p2 node order.
constexpr int kTriEdges[3][2] = {{0, 1}, {1, 2}, {2, 0}};
constexpr int kTetEdges[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                 {1, 2}, {1, 3}, {2, 3}};

}  // namespace

void eval_p2(int dim, const std::array<double, 4>& bary, double* values) {
  const int nv = dim + 1;
  for (int i = 0; i < nv; ++i) values[i] = bary[i] * (2.0 * bary[i] - 1.0);
  if (dim == 2) {
    for (int e = 0; e < 3; ++e)
      values[3 + e] = 4.0 * bary[kTriEdges[e][0]] * bary[kTriEdges[e][1]];
  } else {
    for (int e = 0; e < 6; ++e)
      values[4 + e] = 4.0 * bary[kTetEdges[e][0]] * bary[kTetEdges[e][1]];
  }
}

void eval_p2_dL(int dim, const std::array<double, 4>& bary,
                std::array<std::array<double, 4>, 10>& out) {
  const int nv = dim + 1;
  for (auto& row : out) row = {0, 0, 0, 0};
  for (int i = 0; i < nv; ++i) out[i][i] = 4.0 * bary[i] - 1.0;
  if (dim == 2) {
    for (int e = 0; e < 3; ++e) {
      const int a = kTriEdges[e][0], b = kTriEdges[e][1];
      out[3 + e][a] = 4.0 * bary[b];
      out[3 + e][b] = 4.0 * bary[a];
    }
  } else {
    for (int e = 0; e < 6; ++e) {
      const int a = kTetEdges[e][0], b = kTetEdges[e][1];
      out[4 + e][a] = 4.0 * bary[b];
      out[4 + e][b] = 4.0 * bary[a];
    }
  }
}

VectorSpaces build_spaces(const geom::Mesh& mesh) {
  mesh.validate();
  VectorSpaces vs;
  vs.mesh = &mesh;
  vs.dim = mesh.dim;
  vs.n_linear = mesh.n_vertices();

  // --- edge enumeration: unique sorted pairs in lexicographic order.
  std::map<std::array<int, 2>, int> edge_id;
  auto note_edge = [&](int a, int b) {
    edge_id.emplace(std::array<int, 2>{std::min(a, b), std::max(a, b)}, -1);
  };
  const int n_local_edges = mesh.dim == 2 ? 3 : 6;
  for (const auto& c : mesh.cells)
    for (int e = 0; e < n_local_edges; ++e) {
      const auto* le = mesh.dim == 2 ? kTriEdges[e] : kTetEdges[e];
      note_edge(c[le[0]], c[le[1]]);
    }
  vs.edges.reserve(edge_id.size());
  for (auto& [key, id] : edge_id) {  // std::map iterates lexicographically
    id = mesh.n_vertices() + static_cast<int>(vs.edges.size());
    vs.edges.push_back(key);
  }
  vs.n_scalar = mesh.n_vertices() + static_cast<int>(vs.edges.size());

  // --- node coordinates.
  vs.node_xyz.resize(static_cast<std::size_t>(vs.n_scalar));
  for (int v = 0; v < mesh.n_vertices(); ++v)
    vs.node_xyz[static_cast<std::size_t>(v)] = mesh.vertices[static_cast<std::size_t>(v)];
  for (std::size_t e = 0; e < vs.edges.size(); ++e) {
    const auto& [a, b] = vs.edges[e];
    vs.node_xyz[static_cast<std::size_t>(mesh.n_vertices()) + e] = geom::scale(
        0.5, geom::add(mesh.vertices[static_cast<std::size_t>(a)],
                       mesh.vertices[static_cast<std::size_t>(b)]));
  }

  // --- per-cell node lists.
  vs.cell_nodes.resize(static_cast<std::size_t>(mesh.n_cells()));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& k = mesh.cells[static_cast<std::size_t>(c)];
    auto& nodes = vs.cell_nodes[static_cast<std::size_t>(c)];
    nodes.fill(-1);
    const int nv = mesh.vertices_per_cell();
    for (int i = 0; i < nv; ++i) nodes[static_cast<std::size_t>(i)] = k[i];
    for (int e = 0; e < n_local_edges; ++e) {
      const auto* le = mesh.dim == 2 ? kTriEdges[e] : kTetEdges[e];
      const std::array<int, 2> key{std::min(k[le[0]], k[le[1]]),
                                   std::max(k[le[0]], k[le[1]])};
      nodes[static_cast<std::size_t>(nv + e)] = edge_id.at(key);
    }
  }

  // --- facet ownership: match sorted facet vertices to cell sub-facets.
  std::map<std::array<int, 3>, int> owner;
  auto face_key = [&](std::array<int, 3> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& k = mesh.cells[static_cast<std::size_t>(c)];
    if (mesh.dim == 2) {
      for (int e = 0; e < 3; ++e)
        owner[face_key({k[kTriEdges[e][0]], k[kTriEdges[e][1]], -1})] = c;
    } else {
      owner[face_key({k[1], k[2], k[3]})] = c;
      owner[face_key({k[0], k[2], k[3]})] = c;
      owner[face_key({k[0], k[1], k[3]})] = c;
      owner[face_key({k[0], k[1], k[2]})] = c;
    }
  }
  // (interior faces get overwritten twice; boundary facets are hit once and
  //  that is the id we need -- Mesh::validate has already checked uniqueness)

  vs.node_bc.assign(static_cast<std::size_t>(vs.n_scalar), NodeBoundary{});
  vs.facets.resize(mesh.facets.size());
  for (std::size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const geom::Facet& f = mesh.facets[fi];
    FacetInfo info;
    info.tag = f.tag;
    info.measure = mesh.facet_measure(f);
    std::array<int, 3> key = f.v;
    if (mesh.dim == 2) key[2] = -1;
    info.cell = owner.at(face_key(key));
    const auto& k = mesh.cells[static_cast<std::size_t>(info.cell)];
    const int nv = mesh.vertices_per_facet();

    // cell-local index of each facet vertex
    for (int i = 0; i < nv; ++i) {
      int loc = -1;
      for (int j = 0; j < mesh.vertices_per_cell(); ++j)
        if (k[j] == f.v[i]) loc = j;
      if (loc < 0) throw Error("build_spaces: facet vertex not in owner cell");
      info.cell_local_vertex[static_cast<std::size_t>(i)] = loc;
    }

    // quadratic facet nodes: vertices then facet-edge midpoints
    info.n_nodes = mesh.dim == 2 ? 3 : 6;
    for (int i = 0; i < nv; ++i) info.nodes[static_cast<std::size_t>(i)] = f.v[i];
    if (mesh.dim == 2) {
      const std::array<int, 2> key2{std::min(f.v[0], f.v[1]),
                                    std::max(f.v[0], f.v[1])};
      info.nodes[2] = edge_id.at(key2);
    } else {
      // edge order matching a 2D P2 triangle on (v0, v1, v2)
      const int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
      for (int e = 0; e < 3; ++e) {
        const std::array<int, 2> key2{
            std::min(f.v[pairs[e][0]], f.v[pairs[e][1]]),
            std::max(f.v[pairs[e][0]], f.v[pairs[e][1]])};
        info.nodes[static_cast<std::size_t>(3 + e)] = edge_id.at(key2);
      }
    }

    // outward unit normal
    const geom::Point& p0 = mesh.vertices[static_cast<std::size_t>(f.v[0])];
    const geom::Point& p1 = mesh.vertices[static_cast<std::size_t>(f.v[1])];
    geom::Point n{};
    if (mesh.dim == 2) {
      const geom::Point d = geom::sub(p1, p0);
      n = {d[1], -d[0], 0.0};
    } else {
      const geom::Point& p2 = mesh.vertices[static_cast<std::size_t>(f.v[2])];
      n = geom::cross(geom::sub(p1, p0), geom::sub(p2, p0));
    }
    const double nn = geom::norm(n);
    if (nn <= 0.0) throw Error("build_spaces: degenerate facet");
    n = geom::scale(1.0 / nn, n);
    // orient away from the cell centroid
    geom::Point cc{0, 0, 0};
    for (int j = 0; j < mesh.vertices_per_cell(); ++j)
      cc = geom::add(cc, mesh.vertices[static_cast<std::size_t>(k[j])]);
    cc = geom::scale(1.0 / mesh.vertices_per_cell(), cc);
    if (geom::dot(n, geom::sub(mesh.facet_centroid(f), cc)) < 0.0)
      n = geom::scale(-1.0, n);
    info.normal = n;

    // boundary flags for all facet nodes
    for (int i = 0; i < info.n_nodes; ++i) {
      NodeBoundary& bc = vs.node_bc[static_cast<std::size_t>(info.nodes[static_cast<std::size_t>(i)])];
      if (f.tag == geom::kWall) bc.wall = true;
      else if (f.tag == geom::kOutlet) bc.outlet = true;
      else bc.inlet = f.tag;  // inlet tags are 1, 2, ...
    }
    vs.facets[fi] = info;
  }

  // --- control slots: all quadratic nodes on outflow facets, in node order.
  vs.ctrl_slot.assign(static_cast<std::size_t>(vs.n_scalar), -1);
  for (int n = 0; n < vs.n_scalar; ++n)
    if (vs.node_bc[static_cast<std::size_t>(n)].outlet) {
      vs.ctrl_slot[static_cast<std::size_t>(n)] =
          static_cast<int>(vs.ctrl_nodes.size());
      vs.ctrl_nodes.push_back(n);
    }
  if (vs.ctrl_nodes.empty())
    throw Error("build_spaces: mesh has no outflow facets");
  return vs;
}

}  // namespace ocflow::fem
