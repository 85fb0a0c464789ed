/// @file dense_oracle.hpp
/// Dense null-space reference solution for the steady (or one-step implicit)
/// quadratic control problem.  Shares nothing with the sparse saddle-point
/// solver: constraints are handled by one SVD, the primal by a reduced SPD
/// solve, the multipliers by the pseudoinverse of the transposed constraint
/// matrix.  Intended for small meshes where the dense route is exact and
/// affordable; used as an independent check of the one-shot solver.

#pragma once

#include "ocflow/core/linalg.hpp"
#include "ocflow/fem/assemble.hpp"
#include "ocflow/fem/space.hpp"
#include "ocflow/fom/kkt.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace ocflow::testing {

/// Exact Poiseuille boundary data vmax (1 - y^2) e_x on every node; the
/// solvers consume only the Dirichlet entries.
inline Vec poiseuille_data(const fem::VectorSpaces& vs, double vmax) {
  Vec g = Vec::Zero(vs.n_vel());
  for (int n = 0; n < vs.n_scalar; ++n) {
    const double y = vs.node_xyz[static_cast<std::size_t>(n)][1];
    g[vs.vel_dof(n, 0)] = vmax * (1.0 - y * y);
  }
  return g;
}

/// Solution of min 1/2 (v - vd)' Md (v - vd) + alpha/2 u' R u subject to
///   At v + B' p - Mg' u = rhs_mom   (interior velocity rows)
///   B v = 0                        (v fixed to `vdir` on Dirichlet rows)
struct DenseQp {
  Vec v, p, u, w, q;
};

inline DenseQp dense_qp_oracle(const fem::VectorSpaces& vs,
                               const fem::Operators& ops,
                               const fom::OneShotIndex& ix,
                               const Mat& at_dense, const Vec& vd,
                               const Vec& vdir, const Vec& rhs_mom,
                               double alpha) {
  const int nvi = ix.n_vi, np = ix.n_pr, nu = ix.n_ctrl;
  const int ny = nvi + np + nu;

  const Mat b = Mat(ops.B);
  const Mat mg = Mat(ops.Mg);
  const Mat md = Mat(ops.Md);
  const Mat r = Mat(ops.R);

  // Dirichlet part of the velocity (interior entries zero).
  Vec vfix = vdir;
  for (int i = 0; i < nvi; ++i)
    vfix[ix.dof_of_int[static_cast<std::size_t>(i)]] = 0.0;

  // Constraints over y = (v_int, p, u).
  Mat ceq = Mat::Zero(nvi + np, ny);
  Vec d = Vec::Zero(nvi + np);
  for (int i = 0; i < nvi; ++i) {
    const int gi = ix.dof_of_int[static_cast<std::size_t>(i)];
    for (int j = 0; j < nvi; ++j)
      ceq(i, j) = at_dense(gi, ix.dof_of_int[static_cast<std::size_t>(j)]);
    for (int j = 0; j < np; ++j) ceq(i, nvi + j) = b(j, gi);
    for (int j = 0; j < nu; ++j) ceq(i, nvi + np + j) = -mg(j, gi);
    d[i] = rhs_mom[gi] - at_dense.row(gi).dot(vfix);
  }
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < nvi; ++i)
      ceq(nvi + j, i) = b(j, ix.dof_of_int[static_cast<std::size_t>(i)]);
    d[nvi + j] = -(b.row(j).dot(vfix));
  }

  // Quadratic form over y (pressure carries no curvature).
  Mat h = Mat::Zero(ny, ny);
  Vec f = Vec::Zero(ny);
  const Vec md_shift = md * (vfix - vd);
  for (int i = 0; i < nvi; ++i) {
    const int gi = ix.dof_of_int[static_cast<std::size_t>(i)];
    for (int j = 0; j < nvi; ++j)
      h(i, j) = md(gi, ix.dof_of_int[static_cast<std::size_t>(j)]);
    f[i] = -md_shift[gi];
  }
  h.block(nvi + np, nvi + np, nu, nu) = alpha * r;

  // Null-space step: y = y0 + Z z with C Z = 0.
  Eigen::JacobiSVD<Mat> svd(ceq, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const double cut = svd.singularValues()[0] * 1e-12;
  int rank = 0;
  while (rank < svd.singularValues().size() &&
         svd.singularValues()[rank] > cut)
    ++rank;
  if (rank != nvi + np)
    throw Error("dense qp oracle: constraint rank " + std::to_string(rank) +
                " below the expected " + std::to_string(nvi + np));
  const Vec y0 = svd.solve(d);
  const Mat z = svd.matrixV().rightCols(ny - rank);
  const Mat hz = z.transpose() * h * z;
  const Vec yz = z.transpose() * (f - h * y0);
  const Vec y = y0 + z * Eigen::LLT<Mat>(hz).solve(yz);

  // Multipliers: grad J = Ceq' lambda (exactly solvable at the optimum).
  const Vec grad = h * y - f;
  const Vec lambda =
      Eigen::CompleteOrthogonalDecomposition<Mat>(ceq.transpose()).solve(grad);

  DenseQp out;
  out.v = vfix;
  out.w = Vec::Zero(vs.n_vel());
  for (int i = 0; i < nvi; ++i) {
    const int gi = ix.dof_of_int[static_cast<std::size_t>(i)];
    out.v[gi] = y[i];
    out.w[gi] = lambda[i];
  }
  out.p = y.segment(nvi, np);
  out.u = y.segment(nvi + np, nu);
  out.q = lambda.segment(nvi, np);
  return out;
}

/// Relative Euclidean error with an absolute fallback at zero reference.
inline double rel_err(const Vec& got, const Vec& want) {
  const double scale = want.norm();
  return scale > 0.0 ? (got - want).norm() / scale : (got - want).norm();
}

}  // namespace ocflow::testing
