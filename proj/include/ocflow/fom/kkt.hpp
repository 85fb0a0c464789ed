/// @file kkt.hpp
/// Monolithic (one-shot) solution of the discrete optimality system for
/// boundary-controlled incompressible flow, marched over an implicit-Euler
/// time grid.  At every step the coupled unknown
///     X = (v, p, u, w, q)
/// (state velocity/pressure, outflow traction control, adjoint
/// velocity/pressure) solves the five coupled blocks
///
///   Md (v - vd) - (1/dt) M (w - w_prev) - A w - (E(v)+X(v))^T w - B^T q = 0
///   B w = 0
///   alpha R u + Mg w = 0
///   (1/dt) M (v - v_prev) + A v + E(v) v + B^T p - Mg^T u = 0
///   B v = 0
///
/// with Dirichlet data on walls and inlets for v (the adjoint velocity w is
/// pinned to zero there), solved by an exact Newton iteration on the full
/// coupled system.  Both time-derivative couplings march forward from rest
/// (v(0) = w(0) = 0); the terminal adjoint norm is reported so the distance
/// from the ideal transversality condition can be monitored.
///
/// Dropping the time terms yields the steady optimality system; dropping the
/// convection terms as well yields its Stokes limit, which is linear and must
/// converge in a single Newton correction.

#pragma once

#include "ocflow/fem/assemble.hpp"
#include "ocflow/fom/state.hpp"
#include "ocflow/scenarios/profiles.hpp"

#include <functional>

namespace ocflow::fom {

/// Interior/constrained bookkeeping for the coupled unknown ordering
/// [v_interior, p, u, w_interior, q].
struct OneShotIndex {
  std::vector<int> int_of_dof;  ///< velocity dof -> interior index or -1
  std::vector<int> dof_of_int;  ///< interior index -> velocity dof
  int n_vi = 0, n_pr = 0, n_ctrl = 0;
  int off_v = 0, off_p = 0, off_u = 0, off_w = 0, off_q = 0, total = 0;
};

OneShotIndex build_oneshot_index(const fem::VectorSpaces& vs);

struct StepStats {
  double t = 0.0;
  int iters = 0;
  double scale = 1.0;  ///< load norm used to relativize residuals
  std::vector<double> residual_history;  ///< absolute norms, initial first
  double opt_rel = 0.0;        ///< ||alpha R u + Mg w|| / scale at the solution
  double div_state_rel = 0.0;  ///< ||B v|| / scale
  double div_adjoint_rel = 0.0;  ///< ||B w|| / scale
};

struct OneShotProblem {
  const fem::VectorSpaces* vs = nullptr;
  const fem::Operators* ops = nullptr;
  double alpha = 1e-3;
  Vec vd;  ///< tracking target (velocity layout)
  std::vector<scen::InletShape> lift;
  Vec mu;  ///< Reynolds number per inlet (or shared single value)
  double dt = 0.01;
  int n_steps = 100;
  int stride = 5;
  double tol = 1e-9;
  int max_iter = 25;
  bool convection = true;  ///< false solves the linear (Stokes) limit

  /// Optional resumable-run support: called after each step.
  std::function<void(int step, const FlowFields&, const Trajectory&)>
      on_step;
};

struct FomRunResult {
  Trajectory traj;
  std::vector<StepStats> stats;
  double terminal_adjoint_norm = 0.0;  ///< M-norm of w at the final time
};

/// Marches the coupled system from rest (resuming after `start_step` steps
/// from `start_state` when start_step > 0).
FomRunResult solve_oneshot_unsteady(const OneShotProblem& prob,
                                    int start_step = 0,
                                    const FlowFields* start_state = nullptr,
                                    const Trajectory* partial = nullptr);

/// Steady optimality system (time terms dropped).  `dirichlet_v` supplies
/// inflow/wall values on its Dirichlet entries; `convection` toggles the
/// nonlinear terms (off = Stokes limit, converges in one correction).
FlowFields solve_oneshot_steady(const fem::VectorSpaces& vs,
                                const fem::Operators& ops, double alpha,
                                const Vec& vd, const Vec& dirichlet_v,
                                bool convection, double tol, int max_iter,
                                StepStats* stats = nullptr);

/// Plain (uncontrolled) steady flow with the same boundary data.
struct PlainFlow {
  Vec v, p;
  StepStats stats;
};
PlainFlow solve_flow_steady(const fem::VectorSpaces& vs,
                            const fem::Operators& ops, const Vec& dirichlet_v,
                            bool convection, double tol, int max_iter);

/// Plain (uncontrolled) unsteady flow from rest; states carry empty u, w, q.
Trajectory solve_flow_unsteady(const fem::VectorSpaces& vs,
                               const fem::Operators& ops,
                               const std::vector<scen::InletShape>& lift,
                               const Vec& mu, double dt, int n_steps,
                               int stride, double tol, int max_iter);

}  // namespace ocflow::fom
