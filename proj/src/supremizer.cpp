#include "ocflow/rom/supremizer.hpp"

#include <vector>

namespace ocflow::rom {

InteriorMap velocity_interior(const fem::VectorSpaces& vs) {
  InteriorMap m;
  m.n_full = vs.n_vel();
  m.int_of_dof.assign(m.n_full, -1);
  for (int node = 0; node < vs.n_scalar; ++node) {
    if (vs.node_bc[node].dirichlet()) continue;
    for (int c = 0; c < vs.dim; ++c) {
      const int dof = vs.vel_dof(node, c);
      m.int_of_dof[dof] = static_cast<int>(m.dof_of_int.size());
      m.dof_of_int.push_back(dof);
    }
  }
  return m;
}

SpMat interior_block(const SpMat& a, const InteriorMap& map) {
  if (a.rows() != map.n_full || a.cols() != map.n_full)
    throw Error("interior_block: matrix shape mismatch");
  std::vector<Triplet> trips;
  trips.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      const int r = map.int_of_dof[it.row()];
      const int c = map.int_of_dof[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  SpMat out(map.n_interior(), map.n_interior());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Mat gather_rows(const Mat& full, const InteriorMap& map) {
  if (full.rows() != map.n_full)
    throw Error("gather_rows: height mismatch");
  Mat out(map.n_interior(), full.cols());
  for (int i = 0; i < map.n_interior(); ++i)
    out.row(i) = full.row(map.dof_of_int[i]);
  return out;
}

Mat scatter_rows(const Mat& interior, const InteriorMap& map) {
  if (interior.rows() != map.n_interior())
    throw Error("scatter_rows: height mismatch");
  Mat out = Mat::Zero(map.n_full, interior.cols());
  for (int i = 0; i < map.n_interior(); ++i)
    out.row(map.dof_of_int[i]) = interior.row(i);
  return out;
}

SupremizerSolver::SupremizerSolver(const fem::VectorSpaces& vs,
                                   const SpMat& xv, const SpMat& b)
    : vs_(&vs), b_(&b), map_(velocity_interior(vs)) {
  const int n_vel = vs.n_vel();
  if (xv.rows() != n_vel || xv.cols() != n_vel)
    throw Error("SupremizerSolver: inner-product matrix shape");
  if (b.cols() != n_vel || b.rows() != vs.n_pr())
    throw Error("SupremizerSolver: divergence operator shape");
  xii_ = std::make_unique<linalg::SparseLu>(interior_block(xv, map_));
}

Vec SupremizerSolver::apply(const Vec& p) const {
  if (p.size() != vs_->n_pr())
    throw Error("SupremizerSolver::apply: pressure length");
  const Vec rhs_full = b_->transpose() * p;
  const int n_int = map_.n_interior();
  Vec rhs(n_int);
  for (int i = 0; i < n_int; ++i) rhs[i] = rhs_full[map_.dof_of_int[i]];
  const Vec sol = xii_->solve(rhs);
  Vec s = Vec::Zero(vs_->n_vel());
  for (int i = 0; i < n_int; ++i) s[map_.dof_of_int[i]] = sol[i];
  return s;
}

Mat SupremizerSolver::apply_all(const Mat& p_cols) const {
  Mat out(vs_->n_vel(), p_cols.cols());
  for (int j = 0; j < p_cols.cols(); ++j) out.col(j) = apply(p_cols.col(j));
  return out;
}

double reduced_infsup(const Mat& zv, const SpMat& b, const Mat& zp) {
  if (zv.cols() < zp.cols()) return 0.0;
  if (zp.cols() == 0) return 0.0;
  const Mat coupling = zv.transpose() * (b.transpose() * zp);
  linalg::Svd s = linalg::svd(coupling);
  return s.sigma[s.sigma.size() - 1];
}

}  // namespace ocflow::rom
