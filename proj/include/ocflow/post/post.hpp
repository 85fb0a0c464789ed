/// @file post.hpp
/// Postprocessing: tracking-cost evaluation, trajectory error norms, and
/// wall shear stress with a mirror-asymmetry metric for symmetric ducts.

#pragma once

#include "ocflow/fem/assemble.hpp"
#include "ocflow/fom/state.hpp"

#include <string>
#include <vector>

namespace ocflow::post {

using ocflow::Mat;
using ocflow::SpMat;
using ocflow::Vec;

/// Time-integrated tracking cost
///   J = integral of 1/2 (v - vd)^T Md (v - vd) + alpha/2 u^T R u
/// over the stored trajectory (trapezoidal in the stored times; an empty
/// control field counts as zero).
struct CostReport {
  double total = 0.0;
  double tracking = 0.0;  ///< integral of the state-mismatch term
  double penalty = 0.0;   ///< integral of the control-penalty term
  std::vector<double> times;
  std::vector<double> tracking_series;
  std::vector<double> penalty_series;
};

CostReport cost_functional(const fom::Trajectory& traj, const SpMat& md,
                           const SpMat& r, double alpha, const Vec& vd);

/// Per-variable discrepancy between two trajectories stored on the same
/// time grid.  `abs` is the inner-product norm of the difference at each
/// stored time, `rel` divides by the reference norm (floored at 1e-14 of
/// its maximum), and `rel_time_avg` is
///   sqrt( trapz ||a-b||^2 dt / trapz ||b||^2 dt ).
struct ErrorSeries {
  std::vector<double> abs, rel;
  double rel_time_avg = 0.0;
};

struct ErrorReport {
  std::vector<double> times;
  ErrorSeries v, p, u, w, q;
};

/// `a` is the candidate, `b` the reference.  Optional inner products:
/// `xv` for v and w, `xp` for p and q, `xu` for u (nullptr = Euclidean).
/// Fields empty on both sides yield an all-zero series; a field empty on
/// one side only is treated as zero there.
ErrorReport error_norms(const fom::Trajectory& a, const fom::Trajectory& b,
                        const SpMat* xv = nullptr, const SpMat* xp = nullptr,
                        const SpMat* xu = nullptr);

/// Facet-averaged tangential traction magnitude on one wall facet:
///   tau = mean over the facet of | nu (grad v + grad v^T) n - (...n) n |.
struct WssSample {
  int facet = -1;  ///< index into the space's facet list
  geom::Point centroid{};
  double measure = 0.0;
  double tau = 0.0;
};

/// Wall shear stress on every wall facet; throws when the mesh has none.
std::vector<WssSample> wall_shear(const fem::VectorSpaces& vs, const Vec& v,
                                  double nu);

/// Relative mirror asymmetry of a wall shear field on a duct that is
/// bit-exactly symmetric about the y = 0 plane:
///   sqrt( sum_f (tau_f - tau_mirror(f))^2 m_f / sum_f tau_f^2 m_f ).
/// Throws when some wall facet has no mirror partner in the mesh.
double mirror_asymmetry(const fem::VectorSpaces& vs,
                        const std::vector<WssSample>& samples);

/// CSV emitters.  `header` lines (if any) are written first, each prefixed
/// with "# ".
void write_cost_csv(const std::string& path, const CostReport& report,
                    const std::vector<std::string>& header = {});
void write_error_csv(const std::string& path, const ErrorReport& report,
                     const std::vector<std::string>& header = {});
void write_wss_csv(const std::string& path,
                   const std::vector<WssSample>& samples,
                   const std::vector<std::string>& header = {});

}  // namespace ocflow::post
