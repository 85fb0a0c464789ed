/// @file space.hpp
/// Taylor-Hood function spaces on a simplicial mesh: continuous quadratic
/// velocity (per component), continuous linear pressure, and a quadratic
/// boundary-trace space on the outflow for the control.
///
/// Scalar quadratic nodes are numbered vertices-first, then one node per
/// edge with edges sorted lexicographically by their (min, max) vertex pair.
/// A velocity degree of freedom is node * dim + component.

#pragma once

#include "ocflow/geometry/mesh.hpp"

#include <array>
#include <vector>

namespace ocflow::fem {

/// Boundary flags per quadratic node.
struct NodeBoundary {
  bool wall = false;
  bool outlet = false;
  int inlet = 0;  ///< 0 = none, otherwise the inlet tag (1, 2, ...)
  bool dirichlet() const { return wall || inlet != 0; }
};

struct FacetInfo {
  int cell = -1;                  ///< owning cell
  int tag = geom::kWall;
  double measure = 0.0;
  geom::Point normal{};           ///< unit outward normal
  std::array<int, 6> nodes{};     ///< quadratic nodes (3 in 2D, 6 in 3D)
  int n_nodes = 0;
  /// Cell-local index of each facet vertex, for mapping facet quadrature
  /// points into the owning cell's reference coordinates.
  std::array<int, 3> cell_local_vertex{};
};

struct VectorSpaces {
  const geom::Mesh* mesh = nullptr;
  int dim = 2;
  int n_scalar = 0;  ///< quadratic scalar nodes (vertices + edges)
  int n_linear = 0;  ///< linear scalar nodes (vertices)

  std::vector<std::array<int, 2>> edges;        ///< sorted (vmin, vmax) pairs
  std::vector<std::array<int, 10>> cell_nodes;  ///< quadratic nodes per cell
  std::vector<geom::Point> node_xyz;            ///< quadratic node positions
  std::vector<NodeBoundary> node_bc;
  std::vector<FacetInfo> facets;  ///< parallel to mesh->facets

  std::vector<int> ctrl_nodes;      ///< control slot -> quadratic node
  std::vector<int> ctrl_slot;       ///< quadratic node -> slot or -1

  int nodes_per_cell() const { return dim == 2 ? 6 : 10; }
  int n_vel() const { return n_scalar * dim; }
  int n_pr() const { return n_linear; }
  int n_ctrl() const { return static_cast<int>(ctrl_nodes.size()) * dim; }
  int vel_dof(int node, int comp) const { return node * dim + comp; }
  int ctrl_dof(int slot, int comp) const { return slot * dim + comp; }

  /// Total coupled unknown count of the one-shot system:
  /// state + adjoint velocity/pressure pairs plus the control.
  int n_oneshot() const { return 2 * (n_vel() + n_pr()) + n_ctrl(); }
};

VectorSpaces build_spaces(const geom::Mesh& mesh);

/// Quadratic basis values on the reference simplex at barycentric `bary`.
void eval_p2(int dim, const std::array<double, 4>& bary, double* values);

/// Derivatives of the quadratic basis w.r.t. the barycentric coordinates:
/// out[i][k] = dN_i / dL_k (row-major, nodes_per_cell x (dim+1)).
void eval_p2_dL(int dim, const std::array<double, 4>& bary,
                std::array<std::array<double, 4>, 10>& out);

}  // namespace ocflow::fem
