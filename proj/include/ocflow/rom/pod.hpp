/// @file pod.hpp
/// Proper orthogonal decomposition in a weighted inner product, and the
/// nested two-stage (time, then parameter) compression used to build the
/// reduced bases.
///
/// Stage 1 compresses each training trajectory in time to a fixed number of
/// modes; stage 2 stacks the stage-1 mode matrices of all trajectories
/// (unweighted) and compresses across the parameter ensemble. Both stages
/// use exact weighted singular value decompositions, so the reported
/// spectra resolve decay far below the square root of machine precision.

#pragma once

#include "ocflow/core/linalg.hpp"

#include <string>
#include <vector>

namespace ocflow::rom {

using ocflow::Mat;
using ocflow::SpMat;
using ocflow::Vec;

/// A truncated orthonormal basis plus the full retained spectrum it was cut
/// from. `energy` is the cumulative spectral energy curve over the full
/// spectrum (monotone, final entry exactly 1).
struct PodBasis {
  Mat z;       ///< modes, X-orthonormal columns (possibly fewer than sigma)
  Vec sigma;   ///< full retained spectrum, descending
  Vec energy;  ///< cumulative energy fractions, same length as sigma
};

/// Cumulative energy curve of a descending spectrum; `squared` selects
/// sum of squares instead of plain sums.
Vec energy_curve(const Vec& sigma, bool squared);

/// Fraction of spectral energy captured by the first n modes.
double energy_fraction(const Vec& sigma, int n, bool squared);

/// Smallest mode count whose retained energy fraction is at least 1 - eps.
int select_modes(const Vec& sigma, double eps, bool squared);

/// Weighted POD of one snapshot matrix, truncated to at most `n_keep`
/// modes. Throws when fewer than `n_required` numerically independent
/// directions exist (pass 0 to accept any rank).
PodBasis compress(const Mat& snapshots, const SpMat* x, int n_keep,
                  int n_required, bool squared);

/// One variable family going through the nested compression.
struct FamilyInput {
  std::string name;
  const SpMat* x = nullptr;    ///< inner product (nullptr = Euclidean)
  std::vector<Mat> snapshots;  ///< one time-snapshot matrix per parameter
};

struct FamilyResult {
  std::string name;
  std::vector<Vec> temporal_sigma;  ///< stage-1 spectrum per parameter
  int stacked_columns = 0;          ///< columns entering stage 2
  PodBasis parametric;              ///< stage-2 output basis
};

/// Runs the two-stage compression for every family: stage 1 keeps exactly
/// `n_t_pod` modes per trajectory (throwing if any trajectory has lower
/// numerical rank), stage 2 caps the merged basis at `n_max` modes.
std::vector<FamilyResult> nested_pod(const std::vector<FamilyInput>& families,
                                     int n_t_pod, int n_max, bool squared,
                                     int workers);

/// Appends supremizer modes to a velocity basis and re-orthonormalizes the
/// union in the X inner product (dependent columns are dropped).
Mat merge_enriched(const Mat& z_vel, const Mat& z_sup, const SpMat* xv,
                   double drop_tol);

}  // namespace ocflow::rom
