#include "ocflow/fom/kkt.hpp"

#include <cmath>
#include <sstream>

namespace ocflow::fom {

OneShotIndex build_oneshot_index(const fem::VectorSpaces& vs) {
  OneShotIndex idx;
  idx.int_of_dof.assign(static_cast<std::size_t>(vs.n_vel()), -1);
  for (int n = 0; n < vs.n_scalar; ++n) {
    if (vs.node_bc[static_cast<std::size_t>(n)].dirichlet()) continue;
    for (int c = 0; c < vs.dim; ++c) {
      idx.int_of_dof[static_cast<std::size_t>(vs.vel_dof(n, c))] =
          static_cast<int>(idx.dof_of_int.size());
      idx.dof_of_int.push_back(vs.vel_dof(n, c));
    }
  }
  idx.n_vi = static_cast<int>(idx.dof_of_int.size());
  idx.n_pr = vs.n_pr();
  idx.n_ctrl = vs.n_ctrl();
  idx.off_v = 0;
  idx.off_p = idx.n_vi;
  idx.off_u = idx.off_p + idx.n_pr;
  idx.off_w = idx.off_u + idx.n_ctrl;
  idx.off_q = idx.off_w + idx.n_vi;
  idx.total = idx.off_q + idx.n_pr;
  return idx;
}

namespace {

/// Appends `factor * m` (optionally transposed) into the triplet list, with
/// rows/columns remapped (entries mapping to -1 are dropped) and offset.
void add_block(std::vector<Triplet>& out, const SpMat& m, double factor,
               bool transpose, const std::vector<int>* row_map, int row_off,
               const std::vector<int>* col_map, int col_off) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
      int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
      if (row_map) {
        r = (*row_map)[static_cast<std::size_t>(r)];
        if (r < 0) continue;
      }
      if (col_map) {
        c = (*col_map)[static_cast<std::size_t>(c)];
        if (c < 0) continue;
      }
      out.emplace_back(row_off + r, col_off + c, factor * it.value());
    }
}

struct ResidualParts {
  Vec packed;
  double norm = 0.0;
  double opt = 0.0;        ///< optimality row norm
  double div_state = 0.0;  ///< state continuity row norm
  double div_adj = 0.0;    ///< adjoint continuity row norm
};

struct StepContext {
  const fem::VectorSpaces* vs;
  const fem::Operators* ops;
  const OneShotIndex* idx;
  double alpha = 0.0;
  const Vec* vd = nullptr;
  double dt_inv = 0.0;  ///< zero for steady problems
  bool convection = true;
};

ResidualParts oneshot_residual(const StepContext& cx, const FlowFields& cur,
                               const FlowFields& prev, const SpMat* e,
                               const SpMat* x) {
  const fem::Operators& o = *cx.ops;
  const OneShotIndex& idx = *cx.idx;

  Vec r1 = o.Md * (cur.v - *cx.vd) - o.A * cur.w - o.B.transpose() * cur.q;
  Vec r4 = o.A * cur.v + o.B.transpose() * cur.p - o.Mg.transpose() * cur.u;
  if (cx.dt_inv != 0.0) {
    r1 -= cx.dt_inv * (o.M * (cur.w - prev.w));
    r4 += cx.dt_inv * (o.M * (cur.v - prev.v));
  }
  if (cx.convection) {
    r1 -= e->transpose() * cur.w + x->transpose() * cur.w;
    r4 += *e * cur.v;
  }
  const Vec r2 = o.B * cur.w;
  const Vec r3 = cx.alpha * (o.R * cur.u) + o.Mg * cur.w;
  const Vec r5 = o.B * cur.v;

  ResidualParts res;
  res.packed = Vec::Zero(idx.total);
  for (int i = 0; i < idx.n_vi; ++i) {
    const int dof = idx.dof_of_int[static_cast<std::size_t>(i)];
    res.packed[idx.off_v + i] = r1[dof];
    res.packed[idx.off_w + i] = r4[dof];
  }
  res.packed.segment(idx.off_p, idx.n_pr) = r2;
  res.packed.segment(idx.off_u, idx.n_ctrl) = r3;
  res.packed.segment(idx.off_q, idx.n_pr) = r5;
  res.norm = res.packed.norm();
  res.opt = r3.norm();
  res.div_state = r5.norm();
  res.div_adj = r2.norm();
  return res;
}

SpMat oneshot_jacobian(const StepContext& cx, const FlowFields& cur,
                       const SpMat* e, const SpMat* x) {
  const fem::Operators& o = *cx.ops;
  const OneShotIndex& idx = *cx.idx;
  const std::vector<int>* vmap = &idx.int_of_dof;

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(o.M.nonZeros()) * 12);

  // rows r1 (target/adjoint momentum), at off_v
  add_block(t, o.Md, 1.0, false, vmap, idx.off_v, vmap, idx.off_v);
  add_block(t, o.A, -1.0, false, vmap, idx.off_v, vmap, idx.off_w);
  if (cx.dt_inv != 0.0)
    add_block(t, o.M, -cx.dt_inv, false, vmap, idx.off_v, vmap, idx.off_w);
  add_block(t, o.B, -1.0, true, vmap, idx.off_v, nullptr, idx.off_q);
  if (cx.convection) {
    add_block(t, *e, -1.0, true, vmap, idx.off_v, vmap, idx.off_w);
    add_block(t, *x, -1.0, true, vmap, idx.off_v, vmap, idx.off_w);
    const SpMat phi = fem::conv_outer(*cx.vs, cur.w);
    add_block(t, phi, -1.0, false, vmap, idx.off_v, vmap, idx.off_v);
    add_block(t, phi, -1.0, true, vmap, idx.off_v, vmap, idx.off_v);
  }

  // rows r2 (adjoint continuity), at off_p
  add_block(t, o.B, 1.0, false, nullptr, idx.off_p, vmap, idx.off_w);

  // rows r3 (optimality), at off_u
  add_block(t, o.R, cx.alpha, false, nullptr, idx.off_u, nullptr, idx.off_u);
  add_block(t, o.Mg, 1.0, false, nullptr, idx.off_u, vmap, idx.off_w);

  // rows r4 (state momentum), at off_w
  add_block(t, o.A, 1.0, false, vmap, idx.off_w, vmap, idx.off_v);
  if (cx.dt_inv != 0.0)
    add_block(t, o.M, cx.dt_inv, false, vmap, idx.off_w, vmap, idx.off_v);
  add_block(t, o.B, 1.0, true, vmap, idx.off_w, nullptr, idx.off_p);
  add_block(t, o.Mg, -1.0, true, vmap, idx.off_w, nullptr, idx.off_u);
  if (cx.convection) {
    add_block(t, *e, 1.0, false, vmap, idx.off_w, vmap, idx.off_v);
    add_block(t, *x, 1.0, false, vmap, idx.off_w, vmap, idx.off_v);
  }

  // rows r5 (state continuity), at off_q
  add_block(t, o.B, 1.0, false, nullptr, idx.off_q, vmap, idx.off_v);

  SpMat j(idx.total, idx.total);
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

/// Exact-Newton solve of one coupled system.  `cur` enters with boundary
/// values applied and is updated in place (interior unknowns only).
void oneshot_newton(const StepContext& cx, const FlowFields& prev,
                    FlowFields& cur, double tol, int max_iter,
                    StepStats& st) {
  const fem::VectorSpaces& vs = *cx.vs;
  const OneShotIndex& idx = *cx.idx;

  // Load norm: residual of the boundary-data-only state (zero interior),
  // used as the relative-convergence scale for this step.
  {
    FlowFields load;
    load.v = Vec::Zero(vs.n_vel());
    for (int n = 0; n < vs.n_scalar; ++n)
      if (vs.node_bc[static_cast<std::size_t>(n)].dirichlet())
        for (int c = 0; c < vs.dim; ++c)
          load.v[vs.vel_dof(n, c)] = cur.v[vs.vel_dof(n, c)];
    load.p = Vec::Zero(vs.n_pr());
    load.u = Vec::Zero(vs.n_ctrl());
    load.w = Vec::Zero(vs.n_vel());
    load.q = Vec::Zero(vs.n_pr());
    SpMat e, x;
    if (cx.convection) {
      e = fem::conv_advection(vs, load.v);
      x = fem::conv_gradient(vs, load.v);
    }
    const ResidualParts r0 = oneshot_residual(cx, load, prev, &e, &x);
    st.scale = std::max(r0.norm, 1e-30);
  }

  SpMat e, x;
  auto refresh_conv = [&] {
    if (cx.convection) {
      e = fem::conv_advection(vs, cur.v);
      x = fem::conv_gradient(vs, cur.v);
    }
  };
  refresh_conv();
  ResidualParts r = oneshot_residual(cx, cur, prev, &e, &x);
  st.residual_history = {r.norm};
  st.iters = 0;

  while (r.norm > tol * st.scale) {
    if (st.iters >= max_iter) {
      std::ostringstream os;
      os << "one-shot Newton stalled: residual " << r.norm << " vs bound "
         << tol * st.scale << " after " << st.iters << " iterations";
      throw Error(os.str());
    }
    const SpMat j = oneshot_jacobian(cx, cur, &e, &x);
    const Vec delta = linalg::SparseLu(j).solve(-r.packed);
    for (int i = 0; i < idx.n_vi; ++i) {
      const int dof = idx.dof_of_int[static_cast<std::size_t>(i)];
      cur.v[dof] += delta[idx.off_v + i];
      cur.w[dof] += delta[idx.off_w + i];
    }
    cur.p += delta.segment(idx.off_p, idx.n_pr);
    cur.u += delta.segment(idx.off_u, idx.n_ctrl);
    cur.q += delta.segment(idx.off_q, idx.n_pr);
    ++st.iters;
    refresh_conv();
    r = oneshot_residual(cx, cur, prev, &e, &x);
    st.residual_history.push_back(r.norm);
  }
  st.opt_rel = r.opt / st.scale;
  st.div_state_rel = r.div_state / st.scale;
  st.div_adjoint_rel = r.div_adj / st.scale;
}

FlowFields zero_fields(const fem::VectorSpaces& vs) {
  FlowFields f;
  f.v = Vec::Zero(vs.n_vel());
  f.p = Vec::Zero(vs.n_pr());
  f.u = Vec::Zero(vs.n_ctrl());
  f.w = Vec::Zero(vs.n_vel());
  f.q = Vec::Zero(vs.n_pr());
  return f;
}

void apply_dirichlet(const fem::VectorSpaces& vs, const Vec& values, Vec& v) {
  for (int n = 0; n < vs.n_scalar; ++n)
    if (vs.node_bc[static_cast<std::size_t>(n)].dirichlet())
      for (int c = 0; c < vs.dim; ++c)
        v[vs.vel_dof(n, c)] = values[vs.vel_dof(n, c)];
}

}  // namespace

FomRunResult solve_oneshot_unsteady(const OneShotProblem& prob, int start_step,
                                    const FlowFields* start_state,
                                    const Trajectory* partial) {
  const fem::VectorSpaces& vs = *prob.vs;
  const OneShotIndex idx = build_oneshot_index(vs);
  StepContext cx{prob.vs, prob.ops, &idx, prob.alpha, &prob.vd,
                 1.0 / prob.dt, prob.convection};

  FomRunResult out;
  out.traj.mu = prob.mu;
  FlowFields cur = zero_fields(vs);
  if (start_step > 0) {
    if (!start_state || !partial)
      throw Error("solve_oneshot_unsteady: resume requires a checkpoint state");
    cur = *start_state;
    out.traj = *partial;
  } else {
    out.traj.times = {0.0};
    out.traj.states = {cur};  // at rest
  }

  for (int n = start_step + 1; n <= prob.n_steps; ++n) {
    const double t = n * prob.dt;
    FlowFields next = cur;  // warm start from the previous level
    apply_dirichlet(vs, scen::lift_field(prob.lift, prob.mu, t), next.v);

    StepStats st;
    st.t = t;
    oneshot_newton(cx, cur, next, prob.tol, prob.max_iter, st);
    out.stats.push_back(st);
    cur = next;

    if (n % prob.stride == 0) {
      out.traj.times.push_back(t);
      out.traj.states.push_back(cur);
    }
    if (prob.on_step) prob.on_step(n, cur, out.traj);
  }
  out.terminal_adjoint_norm =
      std::sqrt(std::max(0.0, cur.w.dot(prob.ops->M * cur.w)));
  return out;
}

FlowFields solve_oneshot_steady(const fem::VectorSpaces& vs,
                                const fem::Operators& ops, double alpha,
                                const Vec& vd, const Vec& dirichlet_v,
                                bool convection, double tol, int max_iter,
                                StepStats* stats) {
  const OneShotIndex idx = build_oneshot_index(vs);
  StepContext cx{&vs, &ops, &idx, alpha, &vd, 0.0, convection};
  FlowFields cur = zero_fields(vs);
  apply_dirichlet(vs, dirichlet_v, cur.v);
  StepStats st;
  oneshot_newton(cx, cur /*prev unused*/, cur, tol, max_iter, st);
  if (stats) *stats = st;
  return cur;
}

// ---------------------------------------------------------------------------
// Plain flow solves (no control): unknowns [v_interior, p].

namespace {

struct PlainContext {
  const fem::VectorSpaces* vs;
  const fem::Operators* ops;
  const OneShotIndex* idx;
  double dt_inv = 0.0;
  bool convection = true;
};

Vec plain_residual(const PlainContext& cx, const Vec& v, const Vec& p,
                   const Vec& v_prev, const SpMat* e) {
  const fem::Operators& o = *cx.ops;
  const OneShotIndex& idx = *cx.idx;
  Vec r4 = o.A * v + o.B.transpose() * p;
  if (cx.dt_inv != 0.0) r4 += cx.dt_inv * (o.M * (v - v_prev));
  if (cx.convection) r4 += *e * v;
  const Vec r5 = o.B * v;
  Vec packed(idx.n_vi + idx.n_pr);
  for (int i = 0; i < idx.n_vi; ++i)
    packed[i] = r4[idx.dof_of_int[static_cast<std::size_t>(i)]];
  packed.segment(idx.n_vi, idx.n_pr) = r5;
  return packed;
}

void plain_newton(const PlainContext& cx, const Vec& v_prev, Vec& v, Vec& p,
                  double tol, int max_iter, StepStats& st) {
  const fem::VectorSpaces& vs = *cx.vs;
  const OneShotIndex& idx = *cx.idx;

  {  // load norm from the boundary-data-only state
    Vec v0 = Vec::Zero(vs.n_vel());
    for (int n = 0; n < vs.n_scalar; ++n)
      if (vs.node_bc[static_cast<std::size_t>(n)].dirichlet())
        for (int c = 0; c < vs.dim; ++c)
          v0[vs.vel_dof(n, c)] = v[vs.vel_dof(n, c)];
    SpMat e;
    if (cx.convection) e = fem::conv_advection(vs, v0);
    st.scale = std::max(
        plain_residual(cx, v0, Vec::Zero(vs.n_pr()), v_prev, &e).norm(),
        1e-30);
  }

  SpMat e, x;
  auto refresh = [&] {
    if (cx.convection) {
      e = fem::conv_advection(vs, v);
      x = fem::conv_gradient(vs, v);
    }
  };
  refresh();
  Vec r = plain_residual(cx, v, p, v_prev, &e);
  st.residual_history = {r.norm()};
  st.iters = 0;

  const std::vector<int>* vmap = &idx.int_of_dof;
  while (r.norm() > tol * st.scale) {
    if (st.iters >= max_iter) {
      std::ostringstream os;
      os << "flow Newton stalled: residual " << r.norm() << " vs bound "
         << tol * st.scale << " after " << st.iters << " iterations";
      throw Error(os.str());
    }
    std::vector<Triplet> t;
    add_block(t, cx.ops->A, 1.0, false, vmap, 0, vmap, 0);
    if (cx.dt_inv != 0.0)
      add_block(t, cx.ops->M, cx.dt_inv, false, vmap, 0, vmap, 0);
    if (cx.convection) {
      add_block(t, e, 1.0, false, vmap, 0, vmap, 0);
      add_block(t, x, 1.0, false, vmap, 0, vmap, 0);
    }
    add_block(t, cx.ops->B, 1.0, true, vmap, 0, nullptr, idx.n_vi);
    add_block(t, cx.ops->B, 1.0, false, nullptr, idx.n_vi, vmap, 0);
    SpMat j(idx.n_vi + idx.n_pr, idx.n_vi + idx.n_pr);
    j.setFromTriplets(t.begin(), t.end());

    const Vec delta = linalg::SparseLu(j).solve(-r);
    for (int i = 0; i < idx.n_vi; ++i)
      v[idx.dof_of_int[static_cast<std::size_t>(i)]] += delta[i];
    p += delta.segment(idx.n_vi, idx.n_pr);
    ++st.iters;
    refresh();
    r = plain_residual(cx, v, p, v_prev, &e);
    st.residual_history.push_back(r.norm());
  }
  st.div_state_rel = (cx.ops->B * v).norm() / st.scale;
}

}  // namespace

PlainFlow solve_flow_steady(const fem::VectorSpaces& vs,
                            const fem::Operators& ops, const Vec& dirichlet_v,
                            bool convection, double tol, int max_iter) {
  const OneShotIndex idx = build_oneshot_index(vs);
  PlainContext cx{&vs, &ops, &idx, 0.0, convection};
  PlainFlow out;
  out.v = Vec::Zero(vs.n_vel());
  out.p = Vec::Zero(vs.n_pr());
  apply_dirichlet(vs, dirichlet_v, out.v);
  plain_newton(cx, out.v, out.v, out.p, tol, max_iter, out.stats);
  return out;
}

Trajectory solve_flow_unsteady(const fem::VectorSpaces& vs,
                               const fem::Operators& ops,
                               const std::vector<scen::InletShape>& lift,
                               const Vec& mu, double dt, int n_steps,
                               int stride, double tol, int max_iter) {
  const OneShotIndex idx = build_oneshot_index(vs);
  PlainContext cx{&vs, &ops, &idx, 1.0 / dt, true};

  Trajectory traj;
  traj.mu = mu;
  Vec v = Vec::Zero(vs.n_vel());
  Vec p = Vec::Zero(vs.n_pr());
  FlowFields rest;
  rest.v = v;
  rest.p = p;
  traj.times = {0.0};
  traj.states = {rest};

  for (int n = 1; n <= n_steps; ++n) {
    const double t = n * dt;
    Vec v_prev = v;
    apply_dirichlet(vs, scen::lift_field(lift, mu, t), v);
    StepStats st;
    plain_newton(cx, v_prev, v, p, tol, max_iter, st);
    if (n % stride == 0) {
      FlowFields f;
      f.v = v;
      f.p = p;
      traj.times.push_back(t);
      traj.states.push_back(f);
    }
  }
  return traj;
}

}  // namespace ocflow::fom
