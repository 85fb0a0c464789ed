#include "ocflow/rom/reduced.hpp"

#include "ocflow/core/parallel.hpp"

#include <utility>

namespace ocflow::rom {

namespace {

void check_height(const Mat& z, int rows, const char* name) {
  if (z.rows() != rows)
    throw Error(std::string("project_operators: basis ") + name +
                        " has the wrong height");
}

std::uint64_t mix_matrix(std::uint64_t h, const Mat& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  h = linalg::fnv1a64(dims, sizeof(dims), h);
  return linalg::fnv1a64(m.data(), sizeof(double) * m.size(), h);
}

Vec vec_entry(const std::map<std::string, Mat>& m, const std::string& name,
              const std::string& path) {
  const Mat& entry = io::bundle_get(m, name, path);
  if (entry.cols() != 1)
    throw Error(path + ": entry " + name + " is not a column");
  return entry.col(0);
}

}  // namespace

std::uint64_t basis_fingerprint(const ReducedBasisSet& basis) {
  std::uint64_t h = linalg::kFnvOffsetBasis;
  h = mix_matrix(h, basis.z_vs);
  h = mix_matrix(h, basis.z_wr);
  h = mix_matrix(h, basis.z_p);
  h = mix_matrix(h, basis.z_q);
  h = mix_matrix(h, basis.z_u);
  h = mix_matrix(h, basis.lift);
  return h;
}

void save_basis_set(const std::string& path, const ReducedBasisSet& basis,
                    std::uint64_t cfg_hash) {
  io::MatrixBundle b;
  b.emplace_back("config_hash", io::split_u64(cfg_hash));
  b.emplace_back("z_vs", basis.z_vs);
  b.emplace_back("z_wr", basis.z_wr);
  b.emplace_back("z_p", basis.z_p);
  b.emplace_back("z_q", basis.z_q);
  b.emplace_back("z_u", basis.z_u);
  b.emplace_back("lift", basis.lift);
  io::write_matrix_bundle(path, b);
}

ReducedBasisSet load_basis_set(const std::string& path,
                               std::uint64_t* cfg_hash) {
  const auto m = io::bundle_as_map(io::read_matrix_bundle(path));
  if (cfg_hash)
    *cfg_hash = io::join_u64(io::bundle_get(m, "config_hash", path), path);
  ReducedBasisSet basis;
  basis.z_vs = io::bundle_get(m, "z_vs", path);
  basis.z_wr = io::bundle_get(m, "z_wr", path);
  basis.z_p = io::bundle_get(m, "z_p", path);
  basis.z_q = io::bundle_get(m, "z_q", path);
  basis.z_u = io::bundle_get(m, "z_u", path);
  basis.lift = io::bundle_get(m, "lift", path);
  return basis;
}

ReducedOperators project_operators(const fem::VectorSpaces& vs,
                                   const fem::Operators& ops,
                                   const ReducedBasisSet& basis,
                                   const Vec& vd, int workers) {
  const int n_vel = vs.n_vel();
  check_height(basis.z_vs, n_vel, "z_vs");
  check_height(basis.z_wr, n_vel, "z_wr");
  check_height(basis.z_p, vs.n_pr(), "z_p");
  check_height(basis.z_q, vs.n_pr(), "z_q");
  check_height(basis.z_u, vs.n_ctrl(), "z_u");
  check_height(basis.lift, n_vel, "lift");
  if (vd.size() != n_vel)
    throw Error("project_operators: target length mismatch");

  const Mat& zvs = basis.z_vs;
  const Mat& zwr = basis.z_wr;
  const Mat& zp = basis.z_p;
  const Mat& zq = basis.z_q;
  const Mat& zu = basis.z_u;
  const Mat& lf = basis.lift;

  ReducedOperators red;
  red.n_vs = static_cast<int>(zvs.cols());
  red.n_wr = static_cast<int>(zwr.cols());
  red.n_p = static_cast<int>(zp.cols());
  red.n_q = static_cast<int>(zq.cols());
  red.n_u = static_cast<int>(zu.cols());
  red.n_lift = static_cast<int>(lf.cols());

  red.md = zwr.transpose() * (ops.Md * zvs);
  red.m_wr = zwr.transpose() * (ops.M * zwr);
  red.a_wr = zwr.transpose() * (ops.A * zwr);
  red.b_wr_q = zq.transpose() * (ops.B * zwr);
  red.g_track = zwr.transpose() * (ops.Md * vd);
  red.l_md = zwr.transpose() * (ops.Md * lf);

  red.b_wr_p = zp.transpose() * (ops.B * zwr);

  red.r_u = zu.transpose() * (ops.R * zu);
  red.mg_wr = zu.transpose() * (ops.Mg * zwr);

  red.m_vs = zvs.transpose() * (ops.M * zvs);
  red.a_vs = zvs.transpose() * (ops.A * zvs);
  red.bt_vs_p = zvs.transpose() * (ops.B.transpose() * zp);
  red.c_vs = -(zvs.transpose() * (ops.Mg.transpose() * zu));
  red.l_a = zvs.transpose() * (ops.A * lf);
  red.l_m = zvs.transpose() * (ops.M * lf);

  red.b_vs_q = zq.transpose() * (ops.B * zvs);
  red.l_b = zq.transpose() * (ops.B * lf);

  red.md_vs = zvs.transpose() * (ops.Md * zvs);
  red.l_md_vs = zvs.transpose() * (ops.Md * lf);
  red.l_md_l = lf.transpose() * (ops.Md * lf);
  red.vd_md_vs = zvs.transpose() * (ops.Md * vd);
  red.vd_md_lift = lf.transpose() * (ops.Md * vd);
  red.vd_md_vd = vd.dot(ops.Md * vd);

  const int n_y = red.n_y();
  Mat y(n_vel, n_y);
  y.leftCols(red.n_vs) = zvs;
  y.middleCols(red.n_vs, red.n_wr) = zwr;
  if (red.n_lift > 0) y.rightCols(red.n_lift) = lf;

  red.conv.resize(n_y);
  par::for_each(n_y, workers, [&](int a) {
    const SpMat e = fem::conv_advection(vs, y.col(a));
    red.conv[a] = y.transpose() * (e * y);
  });

  return red;
}

void save_reduced_operators(const std::string& path,
                            const ReducedOperators& red,
                            std::uint64_t cfg_hash,
                            std::uint64_t basis_hash) {
  io::MatrixBundle b;
  b.emplace_back("config_hash", io::split_u64(cfg_hash));
  b.emplace_back("basis_hash", io::split_u64(basis_hash));
  Mat sizes(1, 6);
  sizes << red.n_vs, red.n_wr, red.n_p, red.n_q, red.n_u, red.n_lift;
  b.emplace_back("sizes", sizes);
  b.emplace_back("md", red.md);
  b.emplace_back("m_wr", red.m_wr);
  b.emplace_back("a_wr", red.a_wr);
  b.emplace_back("b_wr_q", red.b_wr_q);
  b.emplace_back("g_track", Mat(red.g_track));
  b.emplace_back("l_md", red.l_md);
  b.emplace_back("b_wr_p", red.b_wr_p);
  b.emplace_back("r_u", red.r_u);
  b.emplace_back("mg_wr", red.mg_wr);
  b.emplace_back("m_vs", red.m_vs);
  b.emplace_back("a_vs", red.a_vs);
  b.emplace_back("bt_vs_p", red.bt_vs_p);
  b.emplace_back("c_vs", red.c_vs);
  b.emplace_back("l_a", red.l_a);
  b.emplace_back("l_m", red.l_m);
  b.emplace_back("b_vs_q", red.b_vs_q);
  b.emplace_back("l_b", red.l_b);
  b.emplace_back("md_vs", red.md_vs);
  b.emplace_back("l_md_vs", red.l_md_vs);
  b.emplace_back("l_md_l", red.l_md_l);
  b.emplace_back("vd_md_vs", Mat(red.vd_md_vs));
  b.emplace_back("vd_md_lift", Mat(red.vd_md_lift));
  Mat scalar(1, 1);
  scalar(0, 0) = red.vd_md_vd;
  b.emplace_back("vd_md_vd", scalar);
  const int n_y = red.n_y();
  Mat conv_flat(n_y, static_cast<long>(n_y) * n_y);
  for (int a = 0; a < n_y; ++a)
    conv_flat.middleCols(static_cast<long>(a) * n_y, n_y) = red.conv[a];
  b.emplace_back("conv", conv_flat);
  io::write_matrix_bundle(path, b);
}

ReducedOperators load_reduced_operators(const std::string& path,
                                        std::uint64_t* cfg_hash,
                                        std::uint64_t* basis_hash) {
  const auto m = io::bundle_as_map(io::read_matrix_bundle(path));
  if (cfg_hash)
    *cfg_hash = io::join_u64(io::bundle_get(m, "config_hash", path), path);
  if (basis_hash)
    *basis_hash = io::join_u64(io::bundle_get(m, "basis_hash", path), path);

  ReducedOperators red;
  const Mat& sizes = io::bundle_get(m, "sizes", path);
  if (sizes.rows() != 1 || sizes.cols() != 6)
    throw Error(path + ": malformed sizes entry");
  red.n_vs = static_cast<int>(sizes(0, 0));
  red.n_wr = static_cast<int>(sizes(0, 1));
  red.n_p = static_cast<int>(sizes(0, 2));
  red.n_q = static_cast<int>(sizes(0, 3));
  red.n_u = static_cast<int>(sizes(0, 4));
  red.n_lift = static_cast<int>(sizes(0, 5));

  red.md = io::bundle_get(m, "md", path);
  red.m_wr = io::bundle_get(m, "m_wr", path);
  red.a_wr = io::bundle_get(m, "a_wr", path);
  red.b_wr_q = io::bundle_get(m, "b_wr_q", path);
  red.g_track = vec_entry(m, "g_track", path);
  red.l_md = io::bundle_get(m, "l_md", path);
  red.b_wr_p = io::bundle_get(m, "b_wr_p", path);
  red.r_u = io::bundle_get(m, "r_u", path);
  red.mg_wr = io::bundle_get(m, "mg_wr", path);
  red.m_vs = io::bundle_get(m, "m_vs", path);
  red.a_vs = io::bundle_get(m, "a_vs", path);
  red.bt_vs_p = io::bundle_get(m, "bt_vs_p", path);
  red.c_vs = io::bundle_get(m, "c_vs", path);
  red.l_a = io::bundle_get(m, "l_a", path);
  red.l_m = io::bundle_get(m, "l_m", path);
  red.b_vs_q = io::bundle_get(m, "b_vs_q", path);
  red.l_b = io::bundle_get(m, "l_b", path);
  red.md_vs = io::bundle_get(m, "md_vs", path);
  red.l_md_vs = io::bundle_get(m, "l_md_vs", path);
  red.l_md_l = io::bundle_get(m, "l_md_l", path);
  red.vd_md_vs = vec_entry(m, "vd_md_vs", path);
  red.vd_md_lift = vec_entry(m, "vd_md_lift", path);
  const Mat& scalar = io::bundle_get(m, "vd_md_vd", path);
  if (scalar.size() != 1)
    throw Error(path + ": malformed vd_md_vd entry");
  red.vd_md_vd = scalar(0, 0);

  const int n_y = red.n_y();
  const Mat& conv_flat = io::bundle_get(m, "conv", path);
  if (conv_flat.rows() != n_y ||
      conv_flat.cols() != static_cast<long>(n_y) * n_y)
    throw Error(path + ": malformed convection tensor entry");
  red.conv.resize(n_y);
  for (int a = 0; a < n_y; ++a)
    red.conv[a] = conv_flat.middleCols(static_cast<long>(a) * n_y, n_y);

  return red;
}

}  // namespace ocflow::rom
