#include "ocflow/fom/state.hpp"

#include "ocflow/core/io.hpp"

#include <cstring>

namespace ocflow::fom {

namespace {

/// Field matrix helpers: states stacked as columns.
Mat stack(const Trajectory& t, Vec FlowFields::* field) {
  if (t.states.empty()) return Mat(0, 0);
  const auto n = (t.states[0].*field).size();
  Mat m(n, t.states.size());
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    if ((t.states[k].*field).size() != n)
      throw Error("save_trajectory: inconsistent field sizes");
    m.col(static_cast<int>(k)) = t.states[k].*field;
  }
  return m;
}

void unstack(Trajectory& t, Vec FlowFields::* field, const Mat& m) {
  if (m.cols() != static_cast<int>(t.states.size()) && m.size() != 0)
    throw Error("load_trajectory: column count mismatch");
  for (std::size_t k = 0; k < t.states.size(); ++k)
    t.states[k].*field =
        m.size() == 0 ? Vec() : Vec(m.col(static_cast<int>(k)));
}

io::MatrixBundle trajectory_bundle(const Trajectory& traj) {
  io::MatrixBundle b;
  b.emplace_back("config_hash", io::split_u64(traj.cfg_hash));
  b.emplace_back("mu", Mat(traj.mu));
  Mat times(1, traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    times(0, static_cast<int>(i)) = traj.times[i];
  b.emplace_back("times", times);
  b.emplace_back("v", stack(traj, &FlowFields::v));
  b.emplace_back("p", stack(traj, &FlowFields::p));
  b.emplace_back("u", stack(traj, &FlowFields::u));
  b.emplace_back("w", stack(traj, &FlowFields::w));
  b.emplace_back("q", stack(traj, &FlowFields::q));
  return b;
}

Trajectory trajectory_from_map(const std::map<std::string, Mat>& m,
                               const std::string& what) {
  Trajectory t;
  t.cfg_hash = io::join_u64(io::bundle_get(m, "config_hash", what), what);
  t.mu = io::bundle_get(m, "mu", what);
  const Mat& times = io::bundle_get(m, "times", what);
  t.times.assign(times.data(), times.data() + times.size());
  t.states.resize(static_cast<std::size_t>(times.size()));
  unstack(t, &FlowFields::v, io::bundle_get(m, "v", what));
  unstack(t, &FlowFields::p, io::bundle_get(m, "p", what));
  unstack(t, &FlowFields::u, io::bundle_get(m, "u", what));
  unstack(t, &FlowFields::w, io::bundle_get(m, "w", what));
  unstack(t, &FlowFields::q, io::bundle_get(m, "q", what));
  return t;
}

constexpr char kCkptMagic[8] = {'O', 'C', 'P', 'C', 'K', 'P', 'T', '1'};

}  // namespace

void save_trajectory(const std::string& path, const Trajectory& traj) {
  io::write_matrix_bundle(path, trajectory_bundle(traj));
}

Trajectory load_trajectory(const std::string& path) {
  return trajectory_from_map(io::bundle_as_map(io::read_matrix_bundle(path)),
                             "trajectory " + path);
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  io::MatrixBundle b;
  b.emplace_back("config_hash", io::split_u64(ck.cfg_hash));
  b.emplace_back("mu", Mat(ck.mu));
  Mat meta(1, 2);
  meta(0, 0) = ck.step;
  meta(0, 1) = ck.time;
  b.emplace_back("meta", meta);
  b.emplace_back("cur_v", Mat(ck.current.v));
  b.emplace_back("cur_p", Mat(ck.current.p));
  b.emplace_back("cur_u", Mat(ck.current.u));
  b.emplace_back("cur_w", Mat(ck.current.w));
  b.emplace_back("cur_q", Mat(ck.current.q));
  for (auto& [name, mat] : trajectory_bundle(ck.partial))
    b.emplace_back("traj_" + name, mat);

  // Same container as matrix bundles, behind a checkpoint magic.
  std::string out(kCkptMagic, sizeof kCkptMagic);
  out += io::serialize_matrix_bundle(b);
  io::write_text_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::string raw = io::read_text_file(path);
  if (raw.size() < sizeof kCkptMagic ||
      std::memcmp(raw.data(), kCkptMagic, sizeof kCkptMagic) != 0)
    throw Error("not a checkpoint file (bad magic): " + path);

  io::MatrixBundle b =
      io::parse_matrix_bundle(raw.substr(sizeof kCkptMagic), path);
  std::map<std::string, Mat> m = io::bundle_as_map(b);
  const std::string what = "checkpoint " + path;
  Checkpoint ck;
  ck.cfg_hash = io::join_u64(io::bundle_get(m, "config_hash", what), what);
  ck.mu = io::bundle_get(m, "mu", what);
  const Mat& meta = io::bundle_get(m, "meta", what);
  if (meta.rows() != 1 || meta.cols() != 2)
    throw Error(what + ": malformed meta entry");
  ck.step = static_cast<int>(meta(0, 0));
  ck.time = meta(0, 1);
  ck.current.v = io::bundle_get(m, "cur_v", what);
  ck.current.p = io::bundle_get(m, "cur_p", what);
  ck.current.u = io::bundle_get(m, "cur_u", what);
  ck.current.w = io::bundle_get(m, "cur_w", what);
  ck.current.q = io::bundle_get(m, "cur_q", what);

  std::map<std::string, Mat> tm;
  for (auto& [name, mat] : m)
    if (name.rfind("traj_", 0) == 0) tm.emplace(name.substr(5), mat);
  ck.partial = trajectory_from_map(tm, what);
  return ck;
}

}  // namespace ocflow::fom
