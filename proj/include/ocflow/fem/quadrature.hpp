/// @file quadrature.hpp
/// Simplex quadrature rules, exact for all polynomial integrands appearing in
/// the Taylor-Hood assembly (degree <= 5: mass terms are degree 4, the
/// trilinear convection terms degree 5).
///
/// Points are stored in barycentric coordinates; weights sum to one and are
/// multiplied by the physical cell measure at assembly time.

#pragma once

#include <array>
#include <vector>

namespace ocflow::fem {

struct QuadratureRule {
  int n_bary = 0;  ///< barycentric components per point (dim + 1)
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;  ///< sum to 1
};

/// Degree-5 rule on the unit interval (3-point Gauss-Legendre), barycentric
/// in (1-t, t).
const QuadratureRule& edge_rule();

/// Degree-5 rule on the triangle (7 points).
const QuadratureRule& triangle_rule();

/// Degree-5 rule on the tetrahedron (Grundmann-Moller index 2, 15 points).
const QuadratureRule& tet_rule();

const QuadratureRule& cell_rule(int dim);   ///< triangle_rule / tet_rule
const QuadratureRule& facet_rule(int dim);  ///< edge_rule / triangle_rule

}  // namespace ocflow::fem
