/// @file state.hpp
/// Full-order solution containers and their on-disk forms: trajectories of
/// the coupled optimality system and mid-run checkpoints for resumable
/// offline sweeps.  Every file carries the configuration fingerprint so
/// stale artifacts are rejected instead of silently reused.

#pragma once

#include "ocflow/core/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ocflow::fom {

/// One time level of the coupled system, full-length physical fields
/// (Dirichlet values included).  Uncontrolled runs leave u, w, q empty.
struct FlowFields {
  Vec v, p, u, w, q;
};

struct Trajectory {
  Vec mu;
  std::uint64_t cfg_hash = 0;
  std::vector<double> times;
  std::vector<FlowFields> states;

  int n_stored() const { return static_cast<int>(states.size()); }
};

void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path);

/// Mid-run checkpoint: the marching state after `step` steps plus the
/// trajectory stored so far.
struct Checkpoint {
  std::uint64_t cfg_hash = 0;
  Vec mu;
  int step = 0;
  double time = 0.0;
  FlowFields current;
  Trajectory partial;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ocflow::fom
