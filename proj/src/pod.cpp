#include "ocflow/rom/pod.hpp"

#include "ocflow/core/parallel.hpp"

#include <algorithm>
#include <utility>

namespace ocflow::rom {

Vec energy_curve(const Vec& sigma, bool squared) {
  const int n = static_cast<int>(sigma.size());
  Vec curve(n);
  double run = 0.0;
  for (int i = 0; i < n; ++i) {
    run += squared ? sigma[i] * sigma[i] : sigma[i];
    curve[i] = run;
  }
  if (n > 0 && run > 0.0) curve /= run;  // final entry is run/run == 1
  return curve;
}

double energy_fraction(const Vec& sigma, int n, bool squared) {
  const int total = static_cast<int>(sigma.size());
  if (n >= total) return 1.0;
  if (n <= 0) return total == 0 ? 1.0 : 0.0;
  const Vec curve = energy_curve(sigma, squared);
  return curve[n - 1];
}

int select_modes(const Vec& sigma, double eps, bool squared) {
  const int total = static_cast<int>(sigma.size());
  const Vec curve = energy_curve(sigma, squared);
  for (int n = 1; n <= total; ++n)
    if (curve[n - 1] >= 1.0 - eps) return n;
  return total;
}

PodBasis compress(const Mat& snapshots, const SpMat* x, int n_keep,
                  int n_required, bool squared) {
  if (n_keep <= 0) throw Error("pod compress: mode cap must be positive");
  linalg::Svd thin = linalg::pod_modes(snapshots, x);
  const int rank = static_cast<int>(thin.sigma.size());
  if (rank < n_required)
    throw Error("pod compress: numerical rank " +
                        std::to_string(rank) + " below the required " +
                        std::to_string(n_required) + " modes");
  PodBasis out;
  out.sigma = thin.sigma;
  out.energy = energy_curve(thin.sigma, squared);
  out.z = thin.u.leftCols(std::min(n_keep, rank));
  return out;
}

std::vector<FamilyResult> nested_pod(const std::vector<FamilyInput>& families,
                                     int n_t_pod, int n_max, bool squared,
                                     int workers) {
  const int n_fam = static_cast<int>(families.size());
  std::vector<FamilyResult> out(n_fam);
  std::vector<std::vector<Mat>> modes(n_fam);
  std::vector<std::pair<int, int>> jobs;
  for (int f = 0; f < n_fam; ++f) {
    const int n_mu = static_cast<int>(families[f].snapshots.size());
    out[f].name = families[f].name;
    out[f].temporal_sigma.resize(n_mu);
    modes[f].resize(n_mu);
    for (int m = 0; m < n_mu; ++m) jobs.emplace_back(f, m);
  }

  par::for_each(static_cast<int>(jobs.size()), workers, [&](int j) {
    const auto [f, m] = jobs[j];
    try {
      PodBasis b =
          compress(families[f].snapshots[m], families[f].x, n_t_pod,
                   n_t_pod, squared);
      out[f].temporal_sigma[m] = b.sigma;
      modes[f][m] = b.z;
    } catch (const Error& e) {
      throw Error("family " + families[f].name + ", trajectory " +
                          std::to_string(m) + ": " + e.what());
    }
  });

  par::for_each(n_fam, workers, [&](int f) {
    int total = 0;
    for (const Mat& z : modes[f]) total += static_cast<int>(z.cols());
    if (total == 0)
      throw Error("family " + families[f].name +
                          ": no stage-1 modes to merge");
    Mat stacked(modes[f][0].rows(), total);
    int at = 0;
    for (const Mat& z : modes[f]) {
      stacked.middleCols(at, static_cast<int>(z.cols())) = z;
      at += static_cast<int>(z.cols());
    }
    out[f].stacked_columns = total;
    out[f].parametric = compress(stacked, families[f].x, n_max, 0, squared);
  });

  return out;
}

Mat merge_enriched(const Mat& z_vel, const Mat& z_sup, const SpMat* xv,
                   double drop_tol) {
  if (z_sup.cols() > 0 && z_sup.rows() != z_vel.rows())
    throw Error("merge_enriched: height mismatch");
  Mat joint(z_vel.rows(), z_vel.cols() + z_sup.cols());
  joint.leftCols(z_vel.cols()) = z_vel;
  if (z_sup.cols() > 0) joint.rightCols(z_sup.cols()) = z_sup;
  return linalg::orthonormalize(joint, xv, drop_tol);
}

}  // namespace ocflow::rom
