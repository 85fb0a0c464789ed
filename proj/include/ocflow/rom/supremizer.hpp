/// @file supremizer.hpp
/// Velocity interior restriction utilities and pressure-supremizer solves
/// for inf-sup stabilization of the reduced velocity spaces.
///
/// For a pressure field p the supremizer s is the velocity-space Riesz
/// representative of the divergence coupling: it solves
///   (s, z)_X = b(p, z)   for all interior velocity test functions z,
/// i.e. X_II s_I = (B^T p)_I with homogeneous values on every Dirichlet
/// velocity row. Enriching a reduced velocity basis with such fields
/// restores a nonzero reduced inf-sup constant, which keeps the coupled
/// reduced saddle-point systems solvable.

#pragma once

#include "ocflow/core/linalg.hpp"
#include "ocflow/fem/space.hpp"

#include <memory>
#include <vector>

namespace ocflow::rom {

using ocflow::Mat;
using ocflow::SpMat;
using ocflow::Vec;

/// Index maps between full velocity dofs and the interior (non-Dirichlet)
/// subset.
struct InteriorMap {
  std::vector<int> int_of_dof;  ///< velocity dof -> interior index or -1
  std::vector<int> dof_of_int;  ///< interior index -> velocity dof
  int n_full = 0;
  int n_interior() const { return static_cast<int>(dof_of_int.size()); }
};

InteriorMap velocity_interior(const fem::VectorSpaces& vs);

/// Square submatrix of `a` on the interior rows and columns.
SpMat interior_block(const SpMat& a, const InteriorMap& map);

/// Interior rows of a full-height column block.
Mat gather_rows(const Mat& full, const InteriorMap& map);

/// Full-height version of an interior-height block, with exact zeros on
/// every Dirichlet row.
Mat scatter_rows(const Mat& interior, const InteriorMap& map);

/// Factors the interior block of the velocity inner-product matrix once and
/// maps pressure fields to their supremizers.
class SupremizerSolver {
 public:
  /// `xv` is the full-height velocity inner-product matrix (n_vel x n_vel),
  /// `b` the divergence operator (n_pr x n_vel). Dirichlet rows/columns are
  /// removed internally using the boundary flags in `vs`.
  SupremizerSolver(const fem::VectorSpaces& vs, const SpMat& xv,
                   const SpMat& b);

  /// Supremizer of a single pressure field (length n_pr); the result has
  /// exact zeros on every Dirichlet velocity row.
  Vec apply(const Vec& p) const;

  /// Column-wise apply.
  Mat apply_all(const Mat& p_cols) const;

  const InteriorMap& map() const { return map_; }

 private:
  const fem::VectorSpaces* vs_;
  const SpMat* b_;
  InteriorMap map_;
  std::unique_ptr<linalg::SparseLu> xii_;
};

/// Smallest singular value of the reduced divergence coupling
/// zv^T B^T zp; returns 0 when zv has fewer columns than zp (the coupling
/// is then structurally rank-deficient).
double reduced_infsup(const Mat& zv, const SpMat& b, const Mat& zp);

}  // namespace ocflow::rom
