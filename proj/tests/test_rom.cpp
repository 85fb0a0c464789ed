#include "doctest.h"

#include "ocflow/fem/assemble.hpp"
#include "ocflow/fem/space.hpp"
#include "ocflow/fom/kkt.hpp"
#include "ocflow/geometry/generate.hpp"
#include "ocflow/post/post.hpp"
#include "ocflow/rom/pod.hpp"
#include "ocflow/rom/reduced.hpp"
#include "ocflow/rom/rom_solve.hpp"
#include "ocflow/rom/supremizer.hpp"
#include "ocflow/scenarios/profiles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

using namespace ocflow;

namespace {

/// Miniature offline stage on a coarse channel: controlled solves at the
/// training parameters, nested compression of all seven variable families,
/// supremizer enrichment, and dense operator projection.
struct MiniRom {
  geom::Mesh mesh;
  fem::VectorSpaces vs;
  fem::Operators ops;
  SpMat xv;
  Vec vd;
  std::vector<scen::InletShape> lift;
  double alpha = 1e-3, dt = 0.1;
  int n_steps = 4;

  std::vector<fom::Trajectory> trajs;
  rom::ReducedBasisSet basis;
  rom::ReducedOperators red;

  MiniRom(const std::vector<double>& train_re, int n_t_pod, int n_max) {
    geom::ChannelSpec spec;
    spec.half_width = 1.0;
    spec.length = 2.0;
    spec.target_h = 0.6;
    mesh = geom::make_channel(spec);
    vs = fem::build_spaces(mesh);
    ops = fem::assemble_operators(vs, 3.6);
    xv = ops.M + ops.K1;
    vd = scen::target_field(vs, 2.0);
    lift = scen::inlet_lift_shapes(vs, 3.6, 1.0);

    for (double re : train_re) {
      fom::OneShotProblem prob;
      prob.vs = &vs;
      prob.ops = &ops;
      prob.alpha = alpha;
      prob.vd = vd;
      prob.lift = lift;
      prob.mu = Vec::Constant(1, re);
      prob.dt = dt;
      prob.n_steps = n_steps;
      prob.stride = 1;
      prob.tol = 1e-11;
      trajs.push_back(fom::solve_oneshot_unsteady(prob).traj);
    }

    const rom::InteriorMap map = rom::velocity_interior(vs);
    const SpMat xii = rom::interior_block(xv, map);
    const rom::SupremizerSolver sup(vs, xv, ops.B);

    rom::FamilyInput fv{"v", &xii, {}}, fp{"p", &ops.Mp, {}},
        fu{"u", &ops.R, {}}, fw{"w", &xii, {}}, fq{"q", &ops.Mp, {}},
        fs{"s", &xii, {}}, fr{"r", &xii, {}};
    for (const fom::Trajectory& tr : trajs) {
      const int n_st = tr.n_stored();
      Mat sv(vs.n_vel(), n_st), sw(vs.n_vel(), n_st);
      Mat sp(vs.n_pr(), n_st), sq(vs.n_pr(), n_st);
      Mat su(vs.n_ctrl(), n_st);
      for (int k = 0; k < n_st; ++k) {
        sv.col(k) = tr.states[static_cast<std::size_t>(k)].v -
                    scen::lift_field(lift, tr.mu, tr.times[static_cast<std::size_t>(k)]);
        sw.col(k) = tr.states[static_cast<std::size_t>(k)].w;
        sp.col(k) = tr.states[static_cast<std::size_t>(k)].p;
        sq.col(k) = tr.states[static_cast<std::size_t>(k)].q;
        su.col(k) = tr.states[static_cast<std::size_t>(k)].u;
      }
      fv.snapshots.push_back(rom::gather_rows(sv, map));
      fw.snapshots.push_back(rom::gather_rows(sw, map));
      fp.snapshots.push_back(sp);
      fq.snapshots.push_back(sq);
      fu.snapshots.push_back(su);
      fs.snapshots.push_back(rom::gather_rows(sup.apply_all(sp), map));
      fr.snapshots.push_back(rom::gather_rows(sq.size() > 0
                                                  ? sup.apply_all(sq)
                                                  : Mat(vs.n_vel(), 0),
                                              map));
    }

    const std::vector<rom::FamilyResult> fams = rom::nested_pod(
        {fv, fp, fu, fw, fq, fs, fr}, n_t_pod, n_max, false, 1);

    const Mat z_v = rom::scatter_rows(fams[0].parametric.z, map);
    const Mat z_p = fams[1].parametric.z;
    const Mat z_u = fams[2].parametric.z;
    const Mat z_w = rom::scatter_rows(fams[3].parametric.z, map);
    const Mat z_q = fams[4].parametric.z;
    const Mat z_s = rom::scatter_rows(fams[5].parametric.z, map);
    const Mat z_r = rom::scatter_rows(fams[6].parametric.z, map);

    const int k_s = std::min<int>(z_p.cols(), z_s.cols());
    const int k_r = std::min<int>(z_q.cols(), z_r.cols());
    basis.z_vs = rom::merge_enriched(z_v, z_s.leftCols(k_s), &xv, 1e-12);
    basis.z_wr = rom::merge_enriched(z_w, z_r.leftCols(k_r), &xv, 1e-12);
    basis.z_p = z_p;
    basis.z_q = z_q;
    basis.z_u = z_u;
    basis.lift = Mat(vs.n_vel(), static_cast<int>(lift.size()));
    for (std::size_t i = 0; i < lift.size(); ++i)
      basis.lift.col(static_cast<int>(i)) = lift[i].shape;

    red = rom::project_operators(vs, ops, basis, vd, 1);
  }

  rom::RomRunResult solve(double re) const {
    rom::RomProblem prob;
    prob.red = &red;
    prob.mu = Vec::Constant(1, re);
    prob.alpha = alpha;
    prob.dt = dt;
    prob.n_steps = n_steps;
    prob.stride = 1;
    prob.tol = 1e-11;
    return rom::solve_reduced_unsteady(prob);
  }
};

double rel_diff(const Mat& a, const Mat& b) {
  const double scale = b.norm();
  return scale > 0.0 ? (a - b).norm() / scale : (a - b).norm();
}

}  // namespace

TEST_CASE("projected operator blocks agree with direct Galerkin products") {
  MiniRom mini({55.0}, 3, 3);
  const rom::ReducedBasisSet& zb = mini.basis;
  const rom::ReducedOperators& red = mini.red;
  const fem::Operators& ops = mini.ops;

  CHECK(red.n_vs == zb.z_vs.cols());
  CHECK(red.n_wr == zb.z_wr.cols());
  CHECK(red.n_p == zb.z_p.cols());
  CHECK(red.n_q == zb.z_q.cols());
  CHECK(red.n_u == zb.z_u.cols());
  CHECK(red.n_lift == 1);

  CHECK(rel_diff(red.md, zb.z_wr.transpose() * ops.Md * zb.z_vs) <= 1e-13);
  CHECK(rel_diff(red.m_wr, zb.z_wr.transpose() * ops.M * zb.z_wr) <= 1e-13);
  CHECK(rel_diff(red.a_wr, zb.z_wr.transpose() * ops.A * zb.z_wr) <= 1e-13);
  CHECK(rel_diff(red.b_wr_q, zb.z_q.transpose() * ops.B * zb.z_wr) <= 1e-13);
  CHECK(rel_diff(red.g_track, zb.z_wr.transpose() * (ops.Md * mini.vd)) <=
        1e-13);
  CHECK(rel_diff(red.l_md, zb.z_wr.transpose() * ops.Md * zb.lift) <= 1e-13);
  CHECK(rel_diff(red.b_wr_p, zb.z_p.transpose() * ops.B * zb.z_wr) <= 1e-13);
  CHECK(rel_diff(red.r_u, zb.z_u.transpose() * ops.R * zb.z_u) <= 1e-13);
  CHECK(rel_diff(red.mg_wr, zb.z_u.transpose() * ops.Mg * zb.z_wr) <= 1e-13);
  CHECK(rel_diff(red.m_vs, zb.z_vs.transpose() * ops.M * zb.z_vs) <= 1e-13);
  CHECK(rel_diff(red.a_vs, zb.z_vs.transpose() * ops.A * zb.z_vs) <= 1e-13);
  CHECK(rel_diff(red.bt_vs_p,
                 zb.z_vs.transpose() * ops.B.transpose() * zb.z_p) <= 1e-13);
  CHECK(rel_diff(red.c_vs,
                 -(zb.z_vs.transpose() * ops.Mg.transpose() * zb.z_u)) <=
        1e-13);
  CHECK(rel_diff(red.l_a, zb.z_vs.transpose() * ops.A * zb.lift) <= 1e-13);
  CHECK(rel_diff(red.l_m, zb.z_vs.transpose() * ops.M * zb.lift) <= 1e-13);
  CHECK(rel_diff(red.b_vs_q, zb.z_q.transpose() * ops.B * zb.z_vs) <= 1e-13);
  CHECK(rel_diff(red.l_b, zb.z_q.transpose() * ops.B * zb.lift) <= 1e-13);
  CHECK(rel_diff(red.md_vs, zb.z_vs.transpose() * ops.Md * zb.z_vs) <= 1e-13);
  CHECK(rel_diff(red.l_md_vs, zb.z_vs.transpose() * ops.Md * zb.lift) <=
        1e-13);
  CHECK(rel_diff(red.l_md_l, zb.lift.transpose() * ops.Md * zb.lift) <=
        1e-13);
  CHECK(rel_diff(red.vd_md_vs, zb.z_vs.transpose() * (ops.Md * mini.vd)) <=
        1e-13);
  CHECK(rel_diff(red.vd_md_lift, zb.lift.transpose() * (ops.Md * mini.vd)) <=
        1e-13);
  CHECK(red.vd_md_vd ==
        doctest::Approx(mini.vd.dot(ops.Md * mini.vd)).epsilon(1e-13));

  // Convection tensor against the direct trilinear form, a handful of
  // random triplets over the combined velocity columns Y = [z_vs z_wr L].
  Mat y(mini.vs.n_vel(), red.n_y());
  y.leftCols(red.n_vs) = zb.z_vs;
  y.middleCols(red.n_vs, red.n_wr) = zb.z_wr;
  y.rightCols(red.n_lift) = zb.lift;
  REQUIRE(static_cast<int>(red.conv.size()) == red.n_y());
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> pick(0, red.n_y() - 1);
  for (int trial = 0; trial < 12; ++trial) {
    const int a = pick(rng), i = pick(rng), j = pick(rng);
    const double direct =
        fem::trilinear(mini.vs, y.col(a), y.col(j), y.col(i));
    const double got = red.conv[static_cast<std::size_t>(a)](i, j);
    CHECK(std::abs(got - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("reduced march satisfies the projected full-order equations") {
  // Consistency at a parameter away from the training point: whatever the
  // reduced solution is, plugging its reconstruction into the full-order
  // residual rows and testing with the reduced bases must return (near)
  // zero -- the online system IS those projections.
  MiniRom mini({55.0}, 3, 3);
  const double re = 70.0;
  const rom::RomRunResult run = mini.solve(re);
  const fom::Trajectory full = rom::reconstruct(run.coeffs, mini.basis);
  REQUIRE(full.n_stored() == mini.n_steps + 1);

  const fem::VectorSpaces& vs = mini.vs;
  const fem::Operators& ops = mini.ops;
  const Vec mu = Vec::Constant(1, re);

  for (int k = 1; k <= mini.n_steps; ++k) {
    const fom::FlowFields& now = full.states[static_cast<std::size_t>(k)];
    const fom::FlowFields& prev =
        full.states[static_cast<std::size_t>(k - 1)];
    const double idt = 1.0 / mini.dt;

    const SpMat e_v = fem::conv_advection(vs, now.v);
    const SpMat x_v = fem::conv_gradient(vs, now.v);

    const Vec r1 = ops.Md * (now.v - mini.vd) -
                   idt * (ops.M * (now.w - prev.w)) - ops.A * now.w -
                   e_v.transpose() * now.w - x_v.transpose() * now.w -
                   ops.B.transpose() * now.q;
    const Vec r2 = ops.B * now.w;
    const Vec r3 = mini.alpha * (ops.R * now.u) + ops.Mg * now.w;
    const Vec r4 = idt * (ops.M * (now.v - prev.v)) + ops.A * now.v +
                   e_v * now.v + ops.B.transpose() * now.p -
                   ops.Mg.transpose() * now.u;
    const Vec r5 = ops.B * now.v;

    const double scale = run.stats[static_cast<std::size_t>(k - 1)].scale;
    REQUIRE(scale > 0.0);
    CAPTURE(k);
    CHECK((mini.basis.z_wr.transpose() * r1).norm() <= 1e-8 * scale);
    CHECK((mini.basis.z_p.transpose() * r2).norm() <= 1e-8 * scale);
    CHECK((mini.basis.z_u.transpose() * r3).norm() <= 1e-8 * scale);
    CHECK((mini.basis.z_vs.transpose() * r4).norm() <= 1e-8 * scale);
    CHECK((mini.basis.z_q.transpose() * r5).norm() <= 1e-8 * scale);

    // The reconstruction carries the exact inflow on Dirichlet rows.
    const Vec g = scen::lift_field(mini.lift, mu, full.times[static_cast<std::size_t>(k)]);
    for (int n = 0; n < vs.n_scalar; ++n) {
      if (!vs.node_bc[static_cast<std::size_t>(n)].dirichlet()) continue;
      for (int c = 0; c < vs.dim; ++c) {
        const int dof = vs.vel_dof(n, c);
        CHECK(now.v[dof] == doctest::Approx(g[dof]).epsilon(1e-12));
        CHECK(now.w[dof] == 0.0);
      }
    }
  }
}

TEST_CASE("full-span bases reproduce the training run to solver accuracy") {
  // With every stored snapshot retained, the training trajectory itself
  // solves the reduced equations, so the online march must return it.
  MiniRom mini({55.0}, 4, 10);
  const rom::RomRunResult run = mini.solve(55.0);
  const fom::Trajectory rec = rom::reconstruct(run.coeffs, mini.basis);

  const post::ErrorReport err = post::error_norms(
      rec, mini.trajs[0], &mini.xv, &mini.ops.Mp, &mini.ops.R);
  CHECK(err.v.rel_time_avg <= 1e-6);
  CHECK(err.p.rel_time_avg <= 1e-5);
  CHECK(err.u.rel_time_avg <= 1e-5);
  CHECK(err.w.rel_time_avg <= 1e-4);  // adjoint scale is tiny; keep loose
  CHECK(err.q.rel_time_avg <= 1e-4);
}

TEST_CASE("reduced cost equals the cost of the reconstruction") {
  MiniRom mini({60.0}, 3, 3);
  const rom::RomRunResult run = mini.solve(66.0);
  const fom::Trajectory rec = rom::reconstruct(run.coeffs, mini.basis);

  const post::CostReport fast = rom::reduced_cost(run.coeffs, mini.red,
                                                  mini.alpha);
  const post::CostReport slow = post::cost_functional(
      rec, mini.ops.Md, mini.ops.R, mini.alpha, mini.vd);

  CHECK(fast.total == doctest::Approx(slow.total).epsilon(1e-10));
  CHECK(fast.tracking == doctest::Approx(slow.tracking).epsilon(1e-10));
  CHECK(fast.penalty == doctest::Approx(slow.penalty).epsilon(1e-10));
  REQUIRE(fast.times == slow.times);
  REQUIRE(fast.tracking_series.size() == slow.tracking_series.size());
  for (std::size_t i = 0; i < fast.tracking_series.size(); ++i) {
    CHECK(fast.tracking_series[i] ==
          doctest::Approx(slow.tracking_series[i]).epsilon(1e-9));
    CHECK(fast.penalty_series[i] ==
          doctest::Approx(slow.penalty_series[i]).epsilon(1e-9));
  }
}

TEST_CASE("online diagnostics stay at the optimality system's tolerances") {
  MiniRom mini({60.0}, 3, 3);
  const rom::RomRunResult run = mini.solve(72.0);
  REQUIRE(run.stats.size() == static_cast<std::size_t>(mini.n_steps));
  for (const fom::StepStats& st : run.stats) {
    CHECK(st.iters >= 1);
    CHECK(st.iters < 25);
    CHECK(st.opt_rel <= 1e-8);
    CHECK(st.div_state_rel <= 1e-8);
    CHECK(st.div_adjoint_rel <= 1e-8);
  }
  // Coefficient trajectory bookkeeping.
  CHECK(run.coeffs.mu == Vec::Constant(1, 72.0));
  REQUIRE(run.coeffs.n_stored() == mini.n_steps + 1);
  CHECK(run.coeffs.states[0].v.norm() == 0.0);  // reduced state starts at rest
}

TEST_CASE("basis and operator files round trip with their fingerprints") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() /
      ("ocflow_rom_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);

  MiniRom mini({55.0}, 3, 3);
  const std::uint64_t cfg_hash = 0xfeedfacecafebeefull;
  const std::string bpath = (dir / "basis.bin").string();
  rom::save_basis_set(bpath, mini.basis, cfg_hash);

  std::uint64_t got_hash = 0;
  const rom::ReducedBasisSet back = rom::load_basis_set(bpath, &got_hash);
  CHECK(got_hash == cfg_hash);
  CHECK(back.z_vs == mini.basis.z_vs);
  CHECK(back.z_wr == mini.basis.z_wr);
  CHECK(back.z_p == mini.basis.z_p);
  CHECK(back.z_q == mini.basis.z_q);
  CHECK(back.z_u == mini.basis.z_u);
  CHECK(back.lift == mini.basis.lift);
  CHECK(rom::basis_fingerprint(back) == rom::basis_fingerprint(mini.basis));

  // Any flipped entry must change the fingerprint.
  rom::ReducedBasisSet tweaked = mini.basis;
  tweaked.z_p(0, 0) += 1e-14;
  CHECK(rom::basis_fingerprint(tweaked) !=
        rom::basis_fingerprint(mini.basis));

  const std::uint64_t basis_hash = rom::basis_fingerprint(mini.basis);
  const std::string rpath = (dir / "reduced.bin").string();
  rom::save_reduced_operators(rpath, mini.red, cfg_hash, basis_hash);
  std::uint64_t rc = 0, rb = 0;
  const rom::ReducedOperators rback = rom::load_reduced_operators(rpath, &rc,
                                                                  &rb);
  CHECK(rc == cfg_hash);
  CHECK(rb == basis_hash);
  CHECK(rback.n_vs == mini.red.n_vs);
  CHECK(rback.n_lift == mini.red.n_lift);
  CHECK(rback.md == mini.red.md);
  CHECK(rback.a_vs == mini.red.a_vs);
  CHECK(rback.g_track == mini.red.g_track);
  CHECK(rback.vd_md_vd == mini.red.vd_md_vd);
  REQUIRE(rback.conv.size() == mini.red.conv.size());
  for (std::size_t a = 0; a < rback.conv.size(); ++a)
    CHECK(rback.conv[a] == mini.red.conv[a]);

  // A reduced-operator file built from one basis must be detectable as
  // stale against another.
  CHECK(rom::basis_fingerprint(tweaked) != rb);

  fs::remove_all(dir);
}
