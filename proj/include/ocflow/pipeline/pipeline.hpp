/// @file pipeline.hpp
/// Work-directory orchestration of the full workflow:
///   offline  - solve the coupled optimality system for every training
///              parameter (resumable, parallel over parameters) and collect
///              supremizer snapshots,
///   train    - nested compression of the snapshot store into bases and
///              projected reduced operators,
///   online   - fast reduced solves at new parameters from the basis and
///              operator files alone,
///   compare  - reduced-vs-full (or controlled-vs-uncontrolled) error
///              reports,
///   wss      - wall shear stress fields and their mirror asymmetry.
///
/// Every persisted artifact carries a fingerprint: trajectories, snapshots
/// and checkpoints the full-order fingerprint of the configuration, basis
/// and reduced-operator files the full configuration fingerprint plus (for
/// the operators) the basis fingerprint.  Stale or mismatched artifacts
/// raise IntegrityError; missing prerequisites raise IncompleteError.

#pragma once

#include "ocflow/fom/kkt.hpp"
#include "ocflow/post/post.hpp"
#include "ocflow/rom/pod.hpp"
#include "ocflow/rom/reduced.hpp"
#include "ocflow/rom/rom_solve.hpp"
#include "ocflow/scenarios/config.hpp"
#include "ocflow/scenarios/sampling.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ocflow::pipe {

using ocflow::Mat;
using ocflow::SpMat;
using ocflow::Vec;

struct Paths {
  std::string work;
  std::string mesh_file;
  std::string manifest;
  std::string traj_dir;
  std::string snap_dir;
  std::string checkpoint_dir;
  std::string online_dir;
  std::string basis_file;
  std::string reduced_file;

  std::string traj_file(const std::string& mu_key) const;
  std::string snap_file(const std::string& mu_key) const;
  std::string checkpoint_file(const std::string& mu_key) const;
  std::string online_subdir(const std::string& mu_key) const;
};

Paths make_paths(const std::string& work);

/// Mesh, spaces, operators, tracking target, and inflow shapes for one
/// configuration (heap-held mesh so the bundle can be moved).
struct FullOrderSetup {
  std::unique_ptr<geom::Mesh> mesh;
  fem::VectorSpaces vs;
  fem::Operators ops;
  Vec vd;
  std::vector<scen::InletShape> lift;
};

FullOrderSetup build_setup(const scen::ScenarioConfig& cfg);

// ------------------------------------------------------------------ offline

struct MuRunRecord {
  Vec mu;
  std::string key;
  bool skipped = false;       ///< complete trajectory found, nothing to do
  bool resumed = false;       ///< continued from a checkpoint
  double wall_s = 0.0;
  int newton_iters = 0;       ///< summed over all steps
  double terminal_adjoint_norm = 0.0;
};

struct OfflineResult {
  std::vector<MuRunRecord> runs;
  double wall_s = 0.0;
};

/// Solves (or resumes, or skips) every training parameter, writes the
/// trajectory store and the supremizer snapshot store, and records
/// timings in the work directory.
OfflineResult run_offline(const scen::ScenarioConfig& cfg, const Paths& paths,
                          int workers);

// -------------------------------------------------------------------- train

struct TrainResult {
  std::vector<rom::FamilyResult> families;  ///< v, p, u, w, q, s, r
  rom::ReducedBasisSet basis;
  std::uint64_t basis_hash = 0;
  double infsup_state = 0.0;    ///< smallest sigma of z_vs^T B^T z_p
  double infsup_adjoint = 0.0;  ///< smallest sigma of z_wr^T B^T z_q
  double wall_s = 0.0;
};

/// Loads the snapshot store, runs the nested compression, enriches the
/// velocity bases with supremizer modes, projects the reduced operators,
/// and writes the basis and operator files plus spectrum reports.
TrainResult run_train(const scen::ScenarioConfig& cfg, const Paths& paths,
                      int workers);

// ------------------------------------------------------------------- online

struct OnlineResult {
  fom::Trajectory coeffs;
  std::vector<fom::StepStats> stats;
  post::CostReport cost;
  double solve_wall_s = 0.0;  ///< reduced time march only
  double total_wall_s = 0.0;  ///< including artifact loading and output
};

/// Reads only the configuration, the basis file, and the reduced-operator
/// file; never touches the mesh or the snapshot store.  Unless
/// `extrapolate` is set, `mu` must lie inside the training box.
OnlineResult run_online(const scen::ScenarioConfig& cfg, const Paths& paths,
                        const Vec& mu, bool extrapolate);

// ------------------------------------------------------------------ compare

struct CompareResult {
  post::ErrorReport errors;
  post::CostReport cost_candidate;
  post::CostReport cost_reference;
  double rom_solve_s = 0.0;
  double fom_solve_s = 0.0;   ///< zero when the reference came from the store
  bool fom_from_store = false;
};

/// Reduced-vs-full comparison at one parameter.  The full-order reference
/// is loaded from the trajectory store when present, otherwise solved on
/// the spot.  Error norms use the physical inner products.
CompareResult run_compare(const scen::ScenarioConfig& cfg, const Paths& paths,
                          const Vec& mu);

/// Controlled-vs-uncontrolled comparison at one parameter: the candidate is
/// the plain flow without control, the reference the controlled state.
CompareResult run_uncontrolled_compare(const scen::ScenarioConfig& cfg,
                                       const Paths& paths, const Vec& mu);

// ---------------------------------------------------------------------- wss

struct WssResult {
  std::vector<double> times;
  std::vector<double> asymmetry;     ///< mirror asymmetry per stored time
  double mean_asymmetry = 0.0;       ///< mean over stored times after t = 0
  std::vector<post::WssSample> final_wss;
};

/// Wall shear stress along a stored (or freshly solved) trajectory.  With
/// `uncontrolled` set the flow is solved without control; otherwise the
/// controlled trajectory is loaded from the store or solved on the spot.
WssResult run_wss(const scen::ScenarioConfig& cfg, const Paths& paths,
                  const Vec& mu, bool uncontrolled);

}  // namespace ocflow::pipe
