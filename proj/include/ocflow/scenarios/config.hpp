/// @file config.hpp
/// Scenario configuration: a flat key=value text format with units encoded in
/// key names.  Unknown keys, missing required keys, and malformed values are
/// rejected with messages naming the offending key.  The canonical
/// serialization (sorted keys, shortest round-trip doubles) feeds a 64-bit
/// fingerprint used to tie meshes, trajectories, bases, and reduced models to
/// the configuration that produced them.

#pragma once

#include "ocflow/geometry/generate.hpp"

#include <cstdint>
#include <string>

namespace ocflow::scen {

struct ScenarioConfig {
  // --- required ---
  std::string geom_kind;  ///< "channel" | "bifurcation_2d" | "bifurcation_3d"
  double nu_mm2_s = 0.0;
  double dt_s = 0.0;
  double t_final_s = 0.0;

  // --- optimal control ---
  double alpha = 1e-3;          ///< control penalty
  double v_const_mm_s = 250.0;  ///< target profile peak speed

  // --- parametrization & sampling ---
  int param_dim = 1;
  double re_min = 50.0;
  double re_max = 80.0;
  int n_train = 21;
  std::uint64_t seed = 1234;

  // --- time sampling ---
  int snapshot_stride = 5;

  // --- reduction ---
  int n_t_pod = 10;
  int n_max = 15;
  bool pod_energy_squared = false;
  double pod_drop_tol = 1e-12;
  bool use_supremizers = true;
  int n_sup = 0;  ///< 0 = one supremizer per pressure mode

  // --- geometry ---
  double r_in_mm = 1.0;
  double branch_angle_rad = 0.5235987755982988;
  double branch_length_mm = 10.0;
  double outlet_length_mm = 10.0;
  double target_h_mm = 0.45;

  // --- nonlinear solver ---
  double newton_tol = 1e-9;
  int newton_max_iter = 25;

  int n_steps() const;          ///< time steps (t_final / dt, validated)
  int n_stored() const;         ///< stored states incl. t = 0
  double stored_time(int k) const;
  int n_inlets() const { return geom_kind == "channel" ? 1 : 2; }
};

ScenarioConfig parse_config(const std::string& text, const std::string& origin);
ScenarioConfig load_config(const std::string& path);

/// Canonical serialization: sorted key=value lines, %.17g doubles.
std::string serialize_config(const ScenarioConfig& cfg);

/// FNV-1a fingerprint of the canonical serialization.
std::uint64_t config_hash(const ScenarioConfig& cfg);

/// Fingerprint restricted to the keys that determine full-order
/// trajectories (geometry, physics, time grid, sampling, solver).  Keys
/// that only steer the reduction (mode counts, supremizer settings, POD
/// options) are excluded, so retuning the reduction never invalidates the
/// trajectory store.
std::uint64_t fom_fingerprint(const ScenarioConfig& cfg);

/// Builds the mesh this configuration describes.
geom::Mesh build_scenario_mesh(const ScenarioConfig& cfg);

}  // namespace ocflow::scen
