/// @file pipeline.cpp
/// Work-directory orchestration: offline training sweeps, nested
/// compression, online reduced solves, comparisons, and wall shear
/// reports.  See pipeline.hpp for the artifact and fingerprint policy.

#include "ocflow/pipeline/pipeline.hpp"

#include "ocflow/core/io.hpp"
#include "ocflow/core/parallel.hpp"
#include "ocflow/fom/state.hpp"
#include "ocflow/geometry/meshio.hpp"
#include "ocflow/rom/supremizer.hpp"
#include "ocflow/scenarios/profiles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <utility>

namespace ocflow::pipe {

namespace {

/// Steps between mid-run checkpoints in the offline sweep.
constexpr int kCheckpointEvery = 25;

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_mu(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

/// Loads an artifact through `load`.  A missing file is an incomplete
/// store (a prerequisite stage has not run); a file that exists but does
/// not parse is a damaged store.
template <class Load>
auto load_artifact(const std::string& path, const std::string& what,
                   const std::string& remedy, Load&& load) {
  if (!io::file_exists(path))
    throw IncompleteError(what + " missing: " + path + " (" + remedy + ")");
  try {
    return load(path);
  } catch (const IntegrityError&) {
    throw;
  } catch (const Error& e) {
    throw IntegrityError(what + " unreadable: " + path + ": " + e.what());
  }
}

void append_manifest(const Paths& paths, const std::string& text) {
  std::string cur;
  if (io::file_exists(paths.manifest)) cur = io::read_text_file(paths.manifest);
  io::write_text_file(paths.manifest, cur + text);
}

fom::OneShotProblem make_oneshot(const scen::ScenarioConfig& cfg,
                                 const FullOrderSetup& setup, const Vec& mu) {
  fom::OneShotProblem prob;
  prob.vs = &setup.vs;
  prob.ops = &setup.ops;
  prob.alpha = cfg.alpha;
  prob.vd = setup.vd;
  prob.lift = setup.lift;
  prob.mu = mu;
  prob.dt = cfg.dt_s;
  prob.n_steps = cfg.n_steps();
  prob.stride = cfg.snapshot_stride;
  prob.tol = cfg.newton_tol;
  prob.max_iter = cfg.newton_max_iter;
  return prob;
}

/// Loads one trajectory from the store and checks that it belongs to this
/// configuration and parameter.
fom::Trajectory load_store_trajectory(const scen::ScenarioConfig& cfg,
                                      const Paths& paths,
                                      std::uint64_t fom_hash, const Vec& mu,
                                      const std::string& remedy) {
  const std::string path = paths.traj_file(scen::mu_key(mu));
  fom::Trajectory tr =
      load_artifact(path, "trajectory", remedy, fom::load_trajectory);
  if (tr.cfg_hash != fom_hash)
    throw IntegrityError("trajectory " + path +
                         " was produced under a different configuration");
  if (!same_mu(tr.mu, mu))
    throw IntegrityError("trajectory " + path +
                         " stores a different parameter than its file name");
  if (tr.n_stored() != cfg.n_stored())
    throw IntegrityError("trajectory " + path + " holds " +
                         std::to_string(tr.n_stored()) +
                         " snapshots, expected " +
                         std::to_string(cfg.n_stored()));
  return tr;
}

/// Controlled trajectory at `mu`: loaded from the store when present,
/// otherwise solved on the spot and added to the store.
fom::Trajectory controlled_trajectory(const scen::ScenarioConfig& cfg,
                                      const Paths& paths,
                                      const FullOrderSetup& setup,
                                      const Vec& mu, double* solve_s,
                                      bool* from_store) {
  const std::uint64_t fom_hash = scen::fom_fingerprint(cfg);
  const std::string path = paths.traj_file(scen::mu_key(mu));
  if (io::file_exists(path)) {
    if (from_store) *from_store = true;
    return load_store_trajectory(cfg, paths, fom_hash, mu,
                                 "delete it to re-solve");
  }
  const fom::OneShotProblem prob = make_oneshot(cfg, setup, mu);
  const auto t0 = Clock::now();
  fom::FomRunResult res = fom::solve_oneshot_unsteady(prob);
  if (solve_s) *solve_s = seconds_since(t0);
  if (from_store) *from_store = false;
  res.traj.cfg_hash = fom_hash;
  io::ensure_dir(paths.work);
  io::ensure_dir(paths.traj_dir);
  fom::save_trajectory(path, res.traj);
  return std::move(res.traj);
}

}  // namespace

std::string Paths::traj_file(const std::string& mu_key) const {
  return traj_dir + "/traj_" + mu_key + ".bin";
}
std::string Paths::snap_file(const std::string& mu_key) const {
  return snap_dir + "/sup_" + mu_key + ".bin";
}
std::string Paths::checkpoint_file(const std::string& mu_key) const {
  return checkpoint_dir + "/ck_" + mu_key + ".bin";
}
std::string Paths::online_subdir(const std::string& mu_key) const {
  return online_dir + "/" + mu_key;
}

Paths make_paths(const std::string& work) {
  Paths p;
  p.work = work;
  p.mesh_file = work + "/mesh.txt";
  p.manifest = work + "/manifest.txt";
  p.traj_dir = work + "/trajectories";
  p.snap_dir = work + "/snapshots";
  p.checkpoint_dir = work + "/checkpoints";
  p.online_dir = work + "/online";
  p.basis_file = work + "/basis.bin";
  p.reduced_file = work + "/reduced.bin";
  return p;
}

FullOrderSetup build_setup(const scen::ScenarioConfig& cfg) {
  FullOrderSetup s;
  s.mesh = std::make_unique<geom::Mesh>(scen::build_scenario_mesh(cfg));
  s.vs = fem::build_spaces(*s.mesh);
  s.ops = fem::assemble_operators(s.vs, cfg.nu_mm2_s);
  s.vd = scen::target_field(s.vs, cfg.v_const_mm_s);
  s.lift = scen::inlet_lift_shapes(s.vs, cfg.nu_mm2_s, cfg.r_in_mm);
  return s;
}

// ------------------------------------------------------------------ offline

OfflineResult run_offline(const scen::ScenarioConfig& cfg, const Paths& paths,
                          int workers) {
  const auto t0 = Clock::now();
  io::ensure_dir(paths.work);
  io::ensure_dir(paths.traj_dir);
  io::ensure_dir(paths.snap_dir);
  io::ensure_dir(paths.checkpoint_dir);

  const FullOrderSetup setup = build_setup(cfg);
  // The mesh file is a descriptive artifact only: every stage rebuilds the
  // mesh from the configuration, so a stale copy can never leak back in.
  geom::save_mesh(paths.mesh_file, *setup.mesh);

  const std::uint64_t fom_hash = scen::fom_fingerprint(cfg);
  const std::vector<Vec> samples = scen::training_samples(cfg);
  const int n_mu = static_cast<int>(samples.size());

  OfflineResult out;
  out.runs.resize(samples.size());

  par::for_each(n_mu, workers, [&](int i) {
    const auto run0 = Clock::now();
    MuRunRecord rec;
    rec.mu = samples[static_cast<std::size_t>(i)];
    rec.key = scen::mu_key(rec.mu);
    const std::string tpath = paths.traj_file(rec.key);
    const std::string ckpath = paths.checkpoint_file(rec.key);

    if (io::file_exists(tpath)) {
      // A complete, matching trajectory means this parameter is done.
      load_store_trajectory(cfg, paths, fom_hash, rec.mu,
                            "delete it to re-solve");
      std::error_code ec;
      std::filesystem::remove(ckpath, ec);
      rec.skipped = true;
      rec.wall_s = seconds_since(run0);
      out.runs[static_cast<std::size_t>(i)] = std::move(rec);
      return;
    }

    // Checkpoints are disposable accelerators: any unusable one (damaged,
    // stale configuration, foreign parameter) is discarded and the solve
    // restarts from rest.
    int start_step = 0;
    fom::FlowFields start_state;
    fom::Trajectory partial;
    bool resume = false;
    if (io::file_exists(ckpath)) {
      try {
        fom::Checkpoint ck = fom::load_checkpoint(ckpath);
        if (ck.cfg_hash == fom_hash && same_mu(ck.mu, rec.mu) &&
            ck.step > 0 && ck.step < cfg.n_steps()) {
          start_step = ck.step;
          start_state = std::move(ck.current);
          partial = std::move(ck.partial);
          resume = true;
        }
      } catch (const Error&) {
      }
      if (!resume) {
        std::error_code ec;
        std::filesystem::remove(ckpath, ec);
      }
    }

    fom::OneShotProblem prob = make_oneshot(cfg, setup, rec.mu);
    prob.on_step = [&](int step, const fom::FlowFields& cur,
                       const fom::Trajectory& part) {
      if (step % kCheckpointEvery != 0 || step >= prob.n_steps) return;
      fom::Checkpoint ck;
      ck.cfg_hash = fom_hash;
      ck.mu = rec.mu;
      ck.step = step;
      ck.time = step * prob.dt;
      ck.current = cur;
      ck.partial = part;
      ck.partial.cfg_hash = fom_hash;
      fom::save_checkpoint(ckpath, ck);
    };

    fom::FomRunResult res =
        resume ? fom::solve_oneshot_unsteady(prob, start_step, &start_state,
                                             &partial)
               : fom::solve_oneshot_unsteady(prob);
    res.traj.cfg_hash = fom_hash;
    fom::save_trajectory(tpath, res.traj);
    std::error_code ec;
    std::filesystem::remove(ckpath, ec);

    rec.resumed = resume;
    for (const fom::StepStats& st : res.stats) rec.newton_iters += st.iters;
    rec.terminal_adjoint_norm = res.terminal_adjoint_norm;
    rec.wall_s = seconds_since(run0);
    out.runs[static_cast<std::size_t>(i)] = std::move(rec);
  });

  // Supremizer snapshots: one linear solve in the velocity inner product
  // per stored pressure column, sharing a single factorization.
  const SpMat xv = setup.ops.M + setup.ops.K1;
  rom::SupremizerSolver sup(setup.vs, xv, setup.ops.B);
  for (int i = 0; i < n_mu; ++i) {
    const Vec& mu = samples[static_cast<std::size_t>(i)];
    const std::string key = scen::mu_key(mu);
    const std::string spath = paths.snap_file(key);
    if (io::file_exists(spath)) {
      const io::MatrixBundle bundle = load_artifact(
          spath, "supremizer snapshots", "delete them to rebuild",
          io::read_matrix_bundle);
      const auto map = io::bundle_as_map(bundle);
      if (io::join_u64(io::bundle_get(map, "fom_hash", spath), spath) !=
          fom_hash)
        throw IntegrityError(
            "supremizer snapshots " + spath +
            " were produced under a different configuration");
      if (!same_mu(io::bundle_get(map, "mu", spath), mu))
        throw IntegrityError("supremizer snapshots " + spath +
                             " store a different parameter than their name");
      continue;
    }
    const fom::Trajectory tr = load_store_trajectory(
        cfg, paths, fom_hash, mu, "run the offline sweep first");
    const int n_st = tr.n_stored();
    Mat sp(setup.vs.n_pr(), n_st), sq(setup.vs.n_pr(), n_st);
    for (int k = 0; k < n_st; ++k) {
      sp.col(k) = tr.states[static_cast<std::size_t>(k)].p;
      sq.col(k) = tr.states[static_cast<std::size_t>(k)].q;
    }
    io::MatrixBundle bundle;
    bundle.emplace_back("fom_hash", io::split_u64(fom_hash));
    bundle.emplace_back("mu", mu);
    bundle.emplace_back("s", sup.apply_all(sp));
    bundle.emplace_back("r", sup.apply_all(sq));
    io::write_matrix_bundle(spath, bundle);
  }

  out.wall_s = seconds_since(t0);

  std::ostringstream csv;
  csv << "mu,status,wall_s,newton_iters,terminal_adjoint_norm\n";
  for (const MuRunRecord& r : out.runs)
    csv << r.key << ","
        << (r.skipped ? "skipped" : r.resumed ? "resumed" : "solved") << ","
        << io::format_double(r.wall_s) << "," << r.newton_iters << ","
        << io::format_double(r.terminal_adjoint_norm) << "\n";
  io::write_text_file(paths.work + "/offline_timings.csv", csv.str());

  std::ostringstream man;
  man << "[offline]\n"
      << "config_hash=" << scen::config_hash(cfg) << "\n"
      << "fom_fingerprint=" << fom_hash << "\n"
      << "n_train=" << n_mu << "\n"
      << "coupled_dofs=" << setup.vs.n_oneshot() << "\n"
      << "wall_s=" << io::format_double(out.wall_s) << "\n\n";
  append_manifest(paths, man.str());
  return out;
}

// -------------------------------------------------------------------- train

TrainResult run_train(const scen::ScenarioConfig& cfg, const Paths& paths,
                      int workers) {
  const auto t0 = Clock::now();
  const FullOrderSetup setup = build_setup(cfg);
  const fem::VectorSpaces& vs = setup.vs;
  const fem::Operators& ops = setup.ops;
  const std::uint64_t fom_hash = scen::fom_fingerprint(cfg);
  const std::uint64_t cfg_hash = scen::config_hash(cfg);
  const std::vector<Vec> samples = scen::training_samples(cfg);
  const int n_mu = static_cast<int>(samples.size());
  const int n_st = cfg.n_stored();

  // ---- load the trajectory and supremizer stores
  std::vector<fom::Trajectory> trajs(samples.size());
  std::vector<Mat> sup_s(samples.size()), sup_r(samples.size());
  for (int i = 0; i < n_mu; ++i) {
    const Vec& mu = samples[static_cast<std::size_t>(i)];
    trajs[static_cast<std::size_t>(i)] = load_store_trajectory(
        cfg, paths, fom_hash, mu, "run the offline sweep first");
    const std::string spath = paths.snap_file(scen::mu_key(mu));
    const io::MatrixBundle bundle =
        load_artifact(spath, "supremizer snapshots",
                      "run the offline sweep first", io::read_matrix_bundle);
    const auto map = io::bundle_as_map(bundle);
    if (io::join_u64(io::bundle_get(map, "fom_hash", spath), spath) !=
        fom_hash)
      throw IntegrityError("supremizer snapshots " + spath +
                           " were produced under a different configuration");
    if (!same_mu(io::bundle_get(map, "mu", spath), mu))
      throw IntegrityError("supremizer snapshots " + spath +
                           " store a different parameter than their name");
    Mat s = io::bundle_get(map, "s", spath);
    Mat r = io::bundle_get(map, "r", spath);
    if (s.rows() != vs.n_vel() || s.cols() != n_st || r.rows() != vs.n_vel() ||
        r.cols() != n_st)
      throw IntegrityError("supremizer snapshots " + spath +
                           " have the wrong shape for this configuration");
    sup_s[static_cast<std::size_t>(i)] = std::move(s);
    sup_r[static_cast<std::size_t>(i)] = std::move(r);
  }

  // ---- snapshot families.  Velocity-type fields are compressed on the
  // interior (non-Dirichlet) rows so the modes vanish identically on the
  // boundary; the inflow enters through the lift columns instead.
  const rom::InteriorMap imap = rom::velocity_interior(vs);
  const SpMat xv_full = ops.M + ops.K1;
  const SpMat xii = rom::interior_block(xv_full, imap);

  enum Family { FV = 0, FP, FU, FW, FQ, FS, FR, FCOUNT };
  std::vector<rom::FamilyInput> fams(FCOUNT);
  fams[FV] = {"v", &xii, {}};
  fams[FP] = {"p", &ops.Mp, {}};
  fams[FU] = {"u", &ops.R, {}};
  fams[FW] = {"w", &xii, {}};
  fams[FQ] = {"q", &ops.Mp, {}};
  fams[FS] = {"s", &xii, {}};
  fams[FR] = {"r", &xii, {}};

  for (int m = 0; m < n_mu; ++m) {
    const fom::Trajectory& tr = trajs[static_cast<std::size_t>(m)];
    Mat sv(vs.n_vel(), n_st), sw(vs.n_vel(), n_st);
    Mat sp(vs.n_pr(), n_st), sq(vs.n_pr(), n_st);
    Mat su(vs.n_ctrl(), n_st);
    for (int k = 0; k < n_st; ++k) {
      const fom::FlowFields& st = tr.states[static_cast<std::size_t>(k)];
      sv.col(k) = st.v - scen::lift_field(setup.lift, tr.mu,
                                          tr.times[static_cast<std::size_t>(k)]);
      sw.col(k) = st.w;
      sp.col(k) = st.p;
      sq.col(k) = st.q;
      su.col(k) = st.u;
    }
    fams[FV].snapshots.push_back(rom::gather_rows(sv, imap));
    fams[FW].snapshots.push_back(rom::gather_rows(sw, imap));
    fams[FP].snapshots.push_back(std::move(sp));
    fams[FQ].snapshots.push_back(std::move(sq));
    fams[FU].snapshots.push_back(std::move(su));
    fams[FS].snapshots.push_back(
        rom::gather_rows(sup_s[static_cast<std::size_t>(m)], imap));
    fams[FR].snapshots.push_back(
        rom::gather_rows(sup_r[static_cast<std::size_t>(m)], imap));
  }

  TrainResult out;
  out.families = rom::nested_pod(fams, cfg.n_t_pod, cfg.n_max,
                                 cfg.pod_energy_squared, workers);

  const Mat z_v = rom::scatter_rows(out.families[FV].parametric.z, imap);
  const Mat z_w = rom::scatter_rows(out.families[FW].parametric.z, imap);
  const Mat z_s = rom::scatter_rows(out.families[FS].parametric.z, imap);
  const Mat z_r = rom::scatter_rows(out.families[FR].parametric.z, imap);

  out.basis.z_p = out.families[FP].parametric.z;
  out.basis.z_q = out.families[FQ].parametric.z;
  out.basis.z_u = out.families[FU].parametric.z;
  if (cfg.use_supremizers) {
    // Default: one supremizer per retained pressure mode, so the reduced
    // pressure coupling keeps full column rank.
    const auto k_s = std::min<Eigen::Index>(
        cfg.n_sup == 0 ? out.basis.z_p.cols() : cfg.n_sup, z_s.cols());
    const auto k_r = std::min<Eigen::Index>(
        cfg.n_sup == 0 ? out.basis.z_q.cols() : cfg.n_sup, z_r.cols());
    out.basis.z_vs =
        rom::merge_enriched(z_v, z_s.leftCols(k_s), &xv_full, cfg.pod_drop_tol);
    out.basis.z_wr =
        rom::merge_enriched(z_w, z_r.leftCols(k_r), &xv_full, cfg.pod_drop_tol);
  } else {
    out.basis.z_vs = z_v;
    out.basis.z_wr = z_w;
  }
  out.basis.lift = Mat(vs.n_vel(), static_cast<Eigen::Index>(setup.lift.size()));
  for (std::size_t i = 0; i < setup.lift.size(); ++i)
    out.basis.lift.col(static_cast<Eigen::Index>(i)) = setup.lift[i].shape;

  out.infsup_state = rom::reduced_infsup(out.basis.z_vs, ops.B, out.basis.z_p);
  out.infsup_adjoint =
      rom::reduced_infsup(out.basis.z_wr, ops.B, out.basis.z_q);

  rom::save_basis_set(paths.basis_file, out.basis, cfg_hash);
  out.basis_hash = rom::basis_fingerprint(out.basis);
  const rom::ReducedOperators red =
      rom::project_operators(vs, ops, out.basis, setup.vd, workers);
  rom::save_reduced_operators(paths.reduced_file, red, cfg_hash,
                              out.basis_hash);

  // ---- spectrum reports
  {
    std::ostringstream ts;
    ts << "family,mu,mode,sigma,sigma_rel\n";
    for (const rom::FamilyResult& fam : out.families)
      for (int m = 0; m < n_mu; ++m) {
        const Vec& sg = fam.temporal_sigma[static_cast<std::size_t>(m)];
        const double lead = sg.size() ? sg[0] : 0.0;
        for (Eigen::Index j = 0; j < sg.size(); ++j)
          ts << fam.name << ","
             << scen::mu_key(samples[static_cast<std::size_t>(m)]) << ","
             << j + 1 << "," << io::format_double(sg[j]) << ","
             << io::format_double(lead > 0.0 ? sg[j] / lead : 0.0) << "\n";
      }
    io::write_text_file(paths.work + "/spectra_temporal.csv", ts.str());

    std::ostringstream ps;
    ps << "family,mode,sigma,sigma_rel,energy\n";
    for (const rom::FamilyResult& fam : out.families) {
      const Vec& sg = fam.parametric.sigma;
      const double lead = sg.size() ? sg[0] : 0.0;
      for (Eigen::Index j = 0; j < sg.size(); ++j)
        ps << fam.name << "," << j + 1 << "," << io::format_double(sg[j])
           << "," << io::format_double(lead > 0.0 ? sg[j] / lead : 0.0) << ","
           << io::format_double(fam.parametric.energy[j]) << "\n";
    }
    io::write_text_file(paths.work + "/spectra_parametric.csv", ps.str());
  }

  out.wall_s = seconds_since(t0);

  std::ostringstream man;
  man << "[train]\n"
      << "config_hash=" << cfg_hash << "\n"
      << "basis_fingerprint=" << out.basis_hash << "\n"
      << "n_vs=" << out.basis.z_vs.cols() << "\n"
      << "n_wr=" << out.basis.z_wr.cols() << "\n"
      << "n_p=" << out.basis.z_p.cols() << "\n"
      << "n_q=" << out.basis.z_q.cols() << "\n"
      << "n_u=" << out.basis.z_u.cols() << "\n"
      << "infsup_state=" << io::format_double(out.infsup_state) << "\n"
      << "infsup_adjoint=" << io::format_double(out.infsup_adjoint) << "\n";
  for (const rom::FamilyResult& fam : out.families)
    man << "family " << fam.name << " stacked=" << fam.stacked_columns
        << " kept=" << fam.parametric.z.cols() << "\n";
  man << "wall_s=" << io::format_double(out.wall_s) << "\n\n";
  append_manifest(paths, man.str());
  return out;
}

// ------------------------------------------------------------------- online

OnlineResult run_online(const scen::ScenarioConfig& cfg, const Paths& paths,
                        const Vec& mu, bool extrapolate) {
  const auto t0 = Clock::now();
  const std::uint64_t cfg_hash = scen::config_hash(cfg);

  if (static_cast<int>(mu.size()) != cfg.param_dim)
    throw Error("online: parameter has " + std::to_string(mu.size()) +
                " entries, expected " + std::to_string(cfg.param_dim));
  if (!extrapolate)
    for (Eigen::Index d = 0; d < mu.size(); ++d)
      if (mu[d] < cfg.re_min || mu[d] > cfg.re_max)
        throw Error("online: parameter entry " + io::format_double(mu[d]) +
                    " lies outside the training range [" +
                    io::format_double(cfg.re_min) + ", " +
                    io::format_double(cfg.re_max) +
                    "]; enable extrapolation to override");

  std::uint64_t basis_cfg = 0;
  const rom::ReducedBasisSet basis = load_artifact(
      paths.basis_file, "basis file", "run the training stage first",
      [&](const std::string& p) { return rom::load_basis_set(p, &basis_cfg); });
  if (basis_cfg != cfg_hash)
    throw IntegrityError("basis file " + paths.basis_file +
                         " was trained under a different configuration");

  std::uint64_t red_cfg = 0, red_basis = 0;
  const rom::ReducedOperators red = load_artifact(
      paths.reduced_file, "reduced-operator file",
      "run the training stage first", [&](const std::string& p) {
        return rom::load_reduced_operators(p, &red_cfg, &red_basis);
      });
  if (red_cfg != cfg_hash)
    throw IntegrityError("reduced-operator file " + paths.reduced_file +
                         " was trained under a different configuration");
  if (red_basis != rom::basis_fingerprint(basis))
    throw IntegrityError("reduced-operator file " + paths.reduced_file +
                         " does not match the basis file");

  rom::RomProblem prob;
  prob.red = &red;
  prob.mu = mu;
  prob.alpha = cfg.alpha;
  prob.dt = cfg.dt_s;
  prob.n_steps = cfg.n_steps();
  prob.stride = cfg.snapshot_stride;
  prob.max_iter = cfg.newton_max_iter;

  const auto s0 = Clock::now();
  rom::RomRunResult res = rom::solve_reduced_unsteady(prob);

  OnlineResult out;
  out.solve_wall_s = seconds_since(s0);
  res.coeffs.cfg_hash = cfg_hash;
  out.cost = rom::reduced_cost(res.coeffs, red, cfg.alpha);
  out.coeffs = std::move(res.coeffs);
  out.stats = std::move(res.stats);

  const std::string key = scen::mu_key(mu);
  const std::string dir = paths.online_subdir(key);
  io::ensure_dir(paths.online_dir);
  io::ensure_dir(dir);
  fom::save_trajectory(dir + "/coeffs.bin", out.coeffs);
  post::write_cost_csv(
      dir + "/cost.csv", out.cost,
      {"mu=" + key, "solve_wall_s=" + io::format_double(out.solve_wall_s)});

  int iters = 0, iters_max = 0;
  double opt = 0.0, div_state = 0.0, div_adjoint = 0.0;
  for (const fom::StepStats& st : out.stats) {
    iters += st.iters;
    iters_max = std::max(iters_max, st.iters);
    opt = std::max(opt, st.opt_rel);
    div_state = std::max(div_state, st.div_state_rel);
    div_adjoint = std::max(div_adjoint, st.div_adjoint_rel);
  }
  std::ostringstream sm;
  sm << "mu=" << key << "\n"
     << "steps=" << prob.n_steps << "\n"
     << "newton_iters_total=" << iters << "\n"
     << "newton_iters_max=" << iters_max << "\n"
     << "max_optimality_rel=" << io::format_double(opt) << "\n"
     << "max_state_divergence_rel=" << io::format_double(div_state) << "\n"
     << "max_adjoint_divergence_rel=" << io::format_double(div_adjoint)
     << "\n"
     << "cost_total=" << io::format_double(out.cost.total) << "\n"
     << "cost_tracking=" << io::format_double(out.cost.tracking) << "\n"
     << "cost_penalty=" << io::format_double(out.cost.penalty) << "\n"
     << "solve_wall_s=" << io::format_double(out.solve_wall_s) << "\n";
  io::write_text_file(dir + "/summary.txt", sm.str());

  out.total_wall_s = seconds_since(t0);
  return out;
}

// ------------------------------------------------------------------ compare

CompareResult run_compare(const scen::ScenarioConfig& cfg, const Paths& paths,
                          const Vec& mu) {
  // The comparison is a diagnostic, so the reduced solve is always allowed
  // to leave the training box: the error report tells how bad it gets.
  const OnlineResult online = run_online(cfg, paths, mu, true);
  const rom::ReducedBasisSet basis = rom::load_basis_set(paths.basis_file);
  const fom::Trajectory reduced = rom::reconstruct(online.coeffs, basis);

  const FullOrderSetup setup = build_setup(cfg);
  CompareResult out;
  out.rom_solve_s = online.solve_wall_s;
  const fom::Trajectory reference = controlled_trajectory(
      cfg, paths, setup, mu, &out.fom_solve_s, &out.fom_from_store);

  out.errors = post::error_norms(reduced, reference, &setup.ops.M,
                                 &setup.ops.Mp, &setup.ops.R);
  out.cost_candidate = post::cost_functional(reduced, setup.ops.Md,
                                             setup.ops.R, cfg.alpha, setup.vd);
  out.cost_reference = post::cost_functional(
      reference, setup.ops.Md, setup.ops.R, cfg.alpha, setup.vd);

  const std::string key = scen::mu_key(mu);
  post::write_error_csv(
      paths.online_subdir(key) + "/errors_vs_fom.csv", out.errors,
      {"mu=" + key, "candidate=reduced solution",
       "reference=full-order solution",
       "cost_candidate=" + io::format_double(out.cost_candidate.total),
       "cost_reference=" + io::format_double(out.cost_reference.total)});
  return out;
}

CompareResult run_uncontrolled_compare(const scen::ScenarioConfig& cfg,
                                       const Paths& paths, const Vec& mu) {
  const FullOrderSetup setup = build_setup(cfg);
  CompareResult out;
  const fom::Trajectory controlled = controlled_trajectory(
      cfg, paths, setup, mu, &out.fom_solve_s, &out.fom_from_store);

  // rom_solve_s holds the candidate (uncontrolled) solve time here.
  const auto u0 = Clock::now();
  const fom::Trajectory plain = fom::solve_flow_unsteady(
      setup.vs, setup.ops, setup.lift, mu, cfg.dt_s, cfg.n_steps(),
      cfg.snapshot_stride, cfg.newton_tol, cfg.newton_max_iter);
  out.rom_solve_s = seconds_since(u0);

  out.errors = post::error_norms(plain, controlled, &setup.ops.M,
                                 &setup.ops.Mp, &setup.ops.R);
  out.cost_candidate = post::cost_functional(plain, setup.ops.Md, setup.ops.R,
                                             cfg.alpha, setup.vd);
  out.cost_reference = post::cost_functional(
      controlled, setup.ops.Md, setup.ops.R, cfg.alpha, setup.vd);

  const std::string key = scen::mu_key(mu);
  io::ensure_dir(paths.online_dir);
  io::ensure_dir(paths.online_subdir(key));
  post::write_error_csv(
      paths.online_subdir(key) + "/uncontrolled_vs_controlled.csv",
      out.errors,
      {"mu=" + key, "candidate=uncontrolled flow",
       "reference=controlled state",
       "cost_candidate=" + io::format_double(out.cost_candidate.total),
       "cost_reference=" + io::format_double(out.cost_reference.total)});
  return out;
}

// ---------------------------------------------------------------------- wss

WssResult run_wss(const scen::ScenarioConfig& cfg, const Paths& paths,
                  const Vec& mu, bool uncontrolled) {
  const FullOrderSetup setup = build_setup(cfg);
  fom::Trajectory traj;
  if (uncontrolled) {
    traj = fom::solve_flow_unsteady(setup.vs, setup.ops, setup.lift, mu,
                                    cfg.dt_s, cfg.n_steps(),
                                    cfg.snapshot_stride, cfg.newton_tol,
                                    cfg.newton_max_iter);
  } else {
    traj = controlled_trajectory(cfg, paths, setup, mu, nullptr, nullptr);
  }

  WssResult out;
  out.times = traj.times;
  const int n_st = traj.n_stored();
  out.asymmetry.resize(static_cast<std::size_t>(n_st), 0.0);
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < n_st; ++k) {
    std::vector<post::WssSample> samples = post::wall_shear(
        setup.vs, traj.states[static_cast<std::size_t>(k)].v, cfg.nu_mm2_s);
    out.asymmetry[static_cast<std::size_t>(k)] =
        post::mirror_asymmetry(setup.vs, samples);
    if (traj.times[static_cast<std::size_t>(k)] > 0.0) {
      sum += out.asymmetry[static_cast<std::size_t>(k)];
      ++count;
    }
    if (k == n_st - 1) out.final_wss = std::move(samples);
  }
  out.mean_asymmetry = count ? sum / count : 0.0;

  io::ensure_dir(paths.work);
  const std::string key = scen::mu_key(mu);
  const std::string prefix =
      paths.work + "/wss_" + key + (uncontrolled ? "_uncontrolled" : "");
  post::write_wss_csv(
      prefix + "_final.csv", out.final_wss,
      {"mu=" + key, "time=" + io::format_double(out.times.back()),
       "mean_asymmetry=" + io::format_double(out.mean_asymmetry)});
  std::ostringstream as;
  as << "time,asymmetry\n";
  for (int k = 0; k < n_st; ++k)
    as << io::format_double(out.times[static_cast<std::size_t>(k)]) << ","
       << io::format_double(out.asymmetry[static_cast<std::size_t>(k)])
       << "\n";
  io::write_text_file(prefix + "_asymmetry.csv", as.str());
  return out;
}

}  // namespace ocflow::pipe
