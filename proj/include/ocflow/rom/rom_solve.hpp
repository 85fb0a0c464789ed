/// @file rom_solve.hpp
/// Online stage: dense Newton time-marching of the reduced coupled system,
/// reconstruction back to full-order fields, and cost evaluation straight
/// from the reduced blocks.
///
/// The reduced unknown per step is (vhat, phat, uhat, what, qhat) packed in
/// that order; the residual rows are packed adjoint-momentum,
/// adjoint-continuity, optimality, state-momentum, state-continuity.  The
/// solver mirrors the full-order march: implicit Euler in time, exact
/// Jacobian, convergence measured against the residual of the
/// zero-coefficient (inflow-only) state of the same step.

#pragma once

#include "ocflow/fom/kkt.hpp"
#include "ocflow/post/post.hpp"
#include "ocflow/rom/reduced.hpp"

#include <vector>

namespace ocflow::rom {

struct RomProblem {
  const ReducedOperators* red = nullptr;
  Vec mu;
  double alpha = 1e-3;
  double dt = 0.01;
  int n_steps = 100;
  int stride = 5;
  double tol = 1e-10;
  int max_iter = 25;
  bool convection = true;
};

/// Reduced coefficients stored as a trajectory: states hold coefficient
/// vectors instead of nodal fields.
struct RomRunResult {
  fom::Trajectory coeffs;
  std::vector<fom::StepStats> stats;
};

RomRunResult solve_reduced_unsteady(const RomProblem& prob);

/// Expands a reduced coefficient trajectory to full-order fields,
/// re-adding the inflow lift to the velocity.
fom::Trajectory reconstruct(const fom::Trajectory& coeffs,
                            const ReducedBasisSet& basis);

/// Tracking cost evaluated from the projected cost blocks only (no
/// full-order object is touched).
post::CostReport reduced_cost(const fom::Trajectory& coeffs,
                              const ReducedOperators& red, double alpha);

}  // namespace ocflow::rom
