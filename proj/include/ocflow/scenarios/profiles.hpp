/// @file profiles.hpp
/// Boundary and target velocity profiles.
///
/// Inflow: each inlet carries a parabolic profile directed along the inward
/// normal, shaped so that a unit coefficient corresponds to a unit Reynolds
/// number at peak inflow scale:
///   shape(x) = -(nu / R_in) (1 - r^2 / R_in^2) n_out   on inlet nodes,
/// modulated in time by  g(t; Re) = Re * (0.02 + 0.02 sin(pi t))  for t > 0
/// and g(0) = 0 (the flow starts from rest).
///
/// Target: a piecewise-parabolic axial field following the duct centerline,
///   v_d(x) = v_const (1 - r(x)^2 / R(s)^2) t_hat(s),
/// interpolated at the quadratic velocity nodes.

#pragma once

#include "ocflow/fem/space.hpp"

#include <vector>

namespace ocflow::scen {

struct InletShape {
  int tag = 0;   ///< inlet boundary tag (1, 2, ...)
  Vec shape;     ///< velocity-sized lift shape vector
};

/// One shape per inlet tag present in the mesh, ordered by tag.  Nodes shared
/// with walls stay zero, so every shape satisfies homogeneous wall values.
std::vector<InletShape> inlet_lift_shapes(const fem::VectorSpaces& vs,
                                          double nu, double r_in);

/// Time modulation g(t; re): zero at t = 0, re*(0.02 + 0.02 sin(pi t)) after.
double inlet_coefficient(double re, double t);

/// Combined Dirichlet lift at time t for parameter mu (one Reynolds number
/// per inlet; with a single parameter both inlets share it).
Vec lift_field(const std::vector<InletShape>& shapes, const Vec& mu, double t);

/// Reynolds number assigned to inlet index `i` (0-based) for parameter mu.
double inlet_reynolds(const Vec& mu, int i);

/// Tracking target interpolated at the quadratic nodes.
Vec target_field(const fem::VectorSpaces& vs, double v_const);

}  // namespace ocflow::scen
