#include "ocflow/rom/rom_solve.hpp"

#include "ocflow/scenarios/profiles.hpp"

#include <cmath>
#include <string>

namespace ocflow::rom {

namespace {

struct ReducedState {
  Vec vhat, phat, uhat, what, qhat;
};

ReducedState zero_state(const ReducedOperators& red) {
  ReducedState s;
  s.vhat = Vec::Zero(red.n_vs);
  s.phat = Vec::Zero(red.n_p);
  s.uhat = Vec::Zero(red.n_u);
  s.what = Vec::Zero(red.n_wr);
  s.qhat = Vec::Zero(red.n_q);
  return s;
}

Vec inflow_coefficients(const ReducedOperators& red, const Vec& mu,
                        double t) {
  Vec g(red.n_lift);
  for (int i = 0; i < red.n_lift; ++i)
    g[i] = scen::inlet_coefficient(scen::inlet_reynolds(mu, i), t);
  return g;
}

struct RomContext {
  const ReducedOperators* red = nullptr;
  double alpha = 1e-3;
  double dt_inv = 0.0;
  bool convection = true;
};

/// Contractions of the convection tensor at the combined velocity
/// coefficients cv (state + inflow) and adjoint coefficients cw:
///   cv1(i,j) = e(v, Y_j, Y_i),  cv2(i,j) = e(Y_j, v, Y_i),
///   k(i,j)   = e(Y_j, Y_i, w).
struct ConvPack {
  Mat cv1, cv2, k;
};

void contract(const ReducedOperators& red, const Vec& cv, const Vec& cw,
              bool need_k, ConvPack& out) {
  const int n_y = red.n_y();
  out.cv1.setZero(n_y, n_y);
  out.cv2.resize(n_y, n_y);
  for (int a = 0; a < n_y; ++a)
    if (cv[a] != 0.0) out.cv1 += cv[a] * red.conv[a];
  for (int j = 0; j < n_y; ++j) out.cv2.col(j) = red.conv[j] * cv;
  if (need_k) {
    out.k.resize(n_y, n_y);
    for (int j = 0; j < n_y; ++j)
      out.k.col(j) = red.conv[j].transpose() * cw;
  }
}

Vec combined_velocity(const ReducedOperators& red, const ReducedState& s,
                      const Vec& g) {
  Vec cv = Vec::Zero(red.n_y());
  cv.head(red.n_vs) = s.vhat;
  cv.tail(red.n_lift) = g;
  return cv;
}

Vec combined_adjoint(const ReducedOperators& red, const ReducedState& s) {
  Vec cw = Vec::Zero(red.n_y());
  cw.segment(red.n_vs, red.n_wr) = s.what;
  return cw;
}

struct ResidualParts {
  Vec packed;
  double norm = 0.0;
  double opt = 0.0;
  double div_state = 0.0;
  double div_adj = 0.0;
};

ResidualParts rom_residual(const RomContext& cx, const ReducedState& cur,
                           const ReducedState& prev, const Vec& g_now,
                           const Vec& g_prev) {
  const ReducedOperators& red = *cx.red;

  Vec r1 = red.md * cur.vhat + red.l_md * g_now - red.g_track -
           red.a_wr * cur.what - red.b_wr_q.transpose() * cur.qhat;
  Vec r4 = red.a_vs * cur.vhat + red.l_a * g_now +
           red.bt_vs_p * cur.phat + red.c_vs * cur.uhat;
  if (cx.dt_inv > 0.0) {
    r1 -= cx.dt_inv * (red.m_wr * (cur.what - prev.what));
    r4 += cx.dt_inv * (red.m_vs * (cur.vhat - prev.vhat) +
                       red.l_m * (g_now - g_prev));
  }
  if (cx.convection) {
    const Vec cv = combined_velocity(red, cur, g_now);
    const Vec cw = combined_adjoint(red, cur);
    ConvPack cp;
    contract(red, cv, cw, false, cp);
    const Vec conv_state = cp.cv1 * cv;
    r4 += conv_state.head(red.n_vs);
    const Vec conv_adj = (cp.cv1 + cp.cv2).transpose() * cw;
    r1 -= conv_adj.segment(red.n_vs, red.n_wr);
  }
  const Vec r2 = red.b_wr_p * cur.what;
  const Vec r3 =
      cx.alpha * (red.r_u * cur.uhat) + red.mg_wr * cur.what;
  const Vec r5 = red.b_vs_q * cur.vhat + red.l_b * g_now;

  ResidualParts out;
  out.packed.resize(red.n_wr + red.n_p + red.n_u + red.n_vs + red.n_q);
  int at = 0;
  out.packed.segment(at, red.n_wr) = r1;
  at += red.n_wr;
  out.packed.segment(at, red.n_p) = r2;
  at += red.n_p;
  out.packed.segment(at, red.n_u) = r3;
  at += red.n_u;
  out.packed.segment(at, red.n_vs) = r4;
  at += red.n_vs;
  out.packed.segment(at, red.n_q) = r5;
  out.norm = out.packed.norm();
  out.opt = r3.norm();
  out.div_state = r5.norm();
  out.div_adj = r2.norm();
  return out;
}

Mat rom_jacobian(const RomContext& cx, const ReducedState& cur,
                 const Vec& g_now) {
  const ReducedOperators& red = *cx.red;
  const int n_vs = red.n_vs, n_wr = red.n_wr, n_p = red.n_p, n_q = red.n_q,
            n_u = red.n_u;
  const int total = n_wr + n_p + n_u + n_vs + n_q;

  const int r1 = 0, r2 = n_wr, r3 = n_wr + n_p, r4 = n_wr + n_p + n_u,
            r5 = n_wr + n_p + n_u + n_vs;
  const int cv_off = 0, cp_off = n_vs, cu_off = n_vs + n_p,
            cw_off = n_vs + n_p + n_u, cq_off = n_vs + n_p + n_u + n_wr;

  Mat j = Mat::Zero(total, total);
  j.block(r1, cv_off, n_wr, n_vs) = red.md;
  j.block(r1, cw_off, n_wr, n_wr) =
      -cx.dt_inv * red.m_wr - red.a_wr;
  j.block(r1, cq_off, n_wr, n_q) = -red.b_wr_q.transpose();
  j.block(r2, cw_off, n_p, n_wr) = red.b_wr_p;
  j.block(r3, cu_off, n_u, n_u) = cx.alpha * red.r_u;
  j.block(r3, cw_off, n_u, n_wr) = red.mg_wr;
  j.block(r4, cv_off, n_vs, n_vs) = cx.dt_inv * red.m_vs + red.a_vs;
  j.block(r4, cp_off, n_vs, n_p) = red.bt_vs_p;
  j.block(r4, cu_off, n_vs, n_u) = red.c_vs;
  j.block(r5, cv_off, n_q, n_vs) = red.b_vs_q;

  if (cx.convection) {
    const Vec cv = combined_velocity(red, cur, g_now);
    const Vec cw = combined_adjoint(red, cur);
    ConvPack cp;
    contract(red, cv, cw, true, cp);
    const Mat s = cp.cv1 + cp.cv2;
    j.block(r4, cv_off, n_vs, n_vs) += s.topLeftCorner(n_vs, n_vs);
    j.block(r1, cw_off, n_wr, n_wr) -=
        s.transpose().block(n_vs, n_vs, n_wr, n_wr);
    const Mat phi = cp.k + cp.k.transpose();
    j.block(r1, cv_off, n_wr, n_vs) -= phi.block(n_vs, 0, n_wr, n_vs);
  }
  return j;
}

void unpack_update(const ReducedOperators& red, const Vec& delta,
                   ReducedState& s) {
  int at = 0;
  s.vhat += delta.segment(at, red.n_vs);
  at += red.n_vs;
  s.phat += delta.segment(at, red.n_p);
  at += red.n_p;
  s.uhat += delta.segment(at, red.n_u);
  at += red.n_u;
  s.what += delta.segment(at, red.n_wr);
  at += red.n_wr;
  s.qhat += delta.segment(at, red.n_q);
}

void rom_newton(const RomContext& cx, ReducedState& cur,
                const ReducedState& prev, const Vec& g_now,
                const Vec& g_prev, double tol, int max_iter,
                fom::StepStats& st) {
  const ReducedState load = zero_state(*cx.red);
  st.scale = rom_residual(cx, load, prev, g_now, g_prev).norm;
  const double bound = tol * std::max(st.scale, 1e-30);

  for (int iter = 0;; ++iter) {
    const ResidualParts r = rom_residual(cx, cur, prev, g_now, g_prev);
    st.residual_history.push_back(r.norm);
    if (r.norm <= bound) {
      st.iters = iter;
      const double s = std::max(st.scale, 1e-30);
      st.opt_rel = r.opt / s;
      st.div_state_rel = r.div_state / s;
      st.div_adjoint_rel = r.div_adj / s;
      return;
    }
    if (iter >= max_iter)
      throw Error("reduced Newton stalled: residual " +
                  std::to_string(r.norm) + " vs bound " +
                  std::to_string(bound) + " after " + std::to_string(iter) +
                  " iterations");
    const Mat j = rom_jacobian(cx, cur, g_now);
    const Vec delta = linalg::solve_dense(j, -r.packed);
    unpack_update(*cx.red, delta, cur);
  }
}

}  // namespace

RomRunResult solve_reduced_unsteady(const RomProblem& prob) {
  if (!prob.red) throw Error("solve_reduced_unsteady: missing operators");
  const ReducedOperators& red = *prob.red;
  if (prob.n_steps <= 0 || prob.stride <= 0 ||
      prob.n_steps % prob.stride != 0)
    throw Error("solve_reduced_unsteady: storage stride must divide the "
                "step count");

  RomContext cx{prob.red, prob.alpha, 1.0 / prob.dt, prob.convection};

  RomRunResult out;
  out.coeffs.mu = prob.mu;

  ReducedState cur = zero_state(red);
  auto store = [&](double t, const ReducedState& s) {
    out.coeffs.times.push_back(t);
    out.coeffs.states.push_back(
        fom::FlowFields{s.vhat, s.phat, s.uhat, s.what, s.qhat});
  };
  store(0.0, cur);

  for (int n = 1; n <= prob.n_steps; ++n) {
    const double t = n * prob.dt;
    const Vec g_now = inflow_coefficients(red, prob.mu, t);
    const Vec g_prev = inflow_coefficients(red, prob.mu, (n - 1) * prob.dt);
    const ReducedState prev = cur;
    fom::StepStats st;
    st.t = t;
    rom_newton(cx, cur, prev, g_now, g_prev, prob.tol, prob.max_iter, st);
    out.stats.push_back(st);
    if (n % prob.stride == 0) store(t, cur);
  }
  return out;
}

fom::Trajectory reconstruct(const fom::Trajectory& coeffs,
                            const ReducedBasisSet& basis) {
  fom::Trajectory out;
  out.mu = coeffs.mu;
  out.cfg_hash = coeffs.cfg_hash;
  out.times = coeffs.times;
  const int n_lift = static_cast<int>(basis.lift.cols());
  out.states.resize(coeffs.states.size());
  for (std::size_t k = 0; k < coeffs.states.size(); ++k) {
    const fom::FlowFields& c = coeffs.states[k];
    Vec g(n_lift);
    for (int i = 0; i < n_lift; ++i)
      g[i] = scen::inlet_coefficient(scen::inlet_reynolds(coeffs.mu, i),
                                     coeffs.times[k]);
    fom::FlowFields& f = out.states[k];
    f.v = basis.z_vs * c.v + basis.lift * g;
    f.p = basis.z_p * c.p;
    f.u = basis.z_u * c.u;
    f.w = basis.z_wr * c.w;
    f.q = basis.z_q * c.q;
  }
  return out;
}

post::CostReport reduced_cost(const fom::Trajectory& coeffs,
                              const ReducedOperators& red, double alpha) {
  post::CostReport rep;
  rep.times = coeffs.times;
  const int n_t = coeffs.n_stored();
  rep.tracking_series.resize(n_t);
  rep.penalty_series.resize(n_t);
  for (int k = 0; k < n_t; ++k) {
    const Vec& vh = coeffs.states[k].v;
    const Vec& uh = coeffs.states[k].u;
    const Vec g = inflow_coefficients(red, coeffs.mu, coeffs.times[k]);
    double track = vh.dot(red.md_vs * vh);
    track += 2.0 * vh.dot(red.l_md_vs * g);
    track += g.dot(red.l_md_l * g);
    track -= 2.0 * vh.dot(red.vd_md_vs);
    track -= 2.0 * g.dot(red.vd_md_lift);
    track += red.vd_md_vd;
    rep.tracking_series[k] = 0.5 * track;
    rep.penalty_series[k] = 0.5 * alpha * uh.dot(red.r_u * uh);
  }
  auto trapz = [&](const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < rep.times.size(); ++k)
      acc += 0.5 * (rep.times[k + 1] - rep.times[k]) * (f[k] + f[k + 1]);
    return acc;
  };
  rep.tracking = trapz(rep.tracking_series);
  rep.penalty = trapz(rep.penalty_series);
  rep.total = rep.tracking + rep.penalty;
  return rep;
}

}  // namespace ocflow::rom
