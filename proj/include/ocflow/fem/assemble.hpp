/// @file assemble.hpp
/// Finite-element operator assembly on Taylor-Hood spaces.
///
/// Fixed operators (assembled once per mesh):
///   M   velocity mass            (phi_i . phi_j)
///   Md  observation mass         (equal to M: the tracking target is
///                                 defined over the whole domain)
///   K1  velocity stiffness       (grad phi_i : grad phi_j)
///   A   viscous operator         nu * K1
///   B   divergence               -(psi_i, div phi_j)     [n_pr x n_vel]
///   Mp  pressure mass
///   R   control trace mass       (zeta_i . zeta_j) on the outflow
///   Mg  trace coupling           (zeta_i . phi_j) on the outflow
///                                                        [n_ctrl x n_vel]
/// The control enters the momentum balance as C u with C = -Mg^T.
///
/// Convection matrices (reassembled per linearization point f):
///   E(f)   [(f . grad) phi_j] . phi_i
///   X(f)   [(phi_j . grad) f] . phi_i
///   Phi(f) [(phi_m . grad) phi_i] . f      (rows i, columns m)
/// so that N(v) = E(v) v, the residual adjoint term is (E(v)+X(v))^T w, and
/// d/dv [(E(v)+X(v))^T w] = Phi(w) + Phi(w)^T.

#pragma once

#include "ocflow/fem/space.hpp"

namespace ocflow::fem {

struct Operators {
  SpMat M, Md, A, K1, B, Mp, R, Mg;
  double nu = 0.0;
};

Operators assemble_operators(const VectorSpaces& vs, double nu);

SpMat conv_advection(const VectorSpaces& vs, const Vec& f);
SpMat conv_gradient(const VectorSpaces& vs, const Vec& f);
SpMat conv_outer(const VectorSpaces& vs, const Vec& f);

/// Trilinear convection form e(a, b, c) = ((a . grad) b, c), evaluated by
/// direct quadrature (independent of the matrix assembly paths).
double trilinear(const VectorSpaces& vs, const Vec& a, const Vec& b,
                 const Vec& c);

/// Velocity gradient tensors (dim x dim, row = component, col = direction)
/// of the FE field `f` at every quadrature point of boundary facet `fi`,
/// evaluated from the owning cell, plus the matching quadrature weights
/// (already scaled by the facet measure).
struct FacetGradients {
  std::vector<Mat> grad;
  std::vector<double> weight;
};
FacetGradients facet_velocity_gradients(const VectorSpaces& vs, int fi,
                                        const Vec& f);

}  // namespace ocflow::fem
