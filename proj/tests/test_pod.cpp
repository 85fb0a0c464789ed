#include "doctest.h"

#include "ocflow/core/linalg.hpp"
#include "ocflow/rom/pod.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace ocflow;

namespace {

Mat random_cols(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

SpMat random_spd(int n, unsigned seed) {
  const Mat b = random_cols(n, n, seed);
  const Mat dense = b * b.transpose() + double(n) * Mat::Identity(n, n);
  return SpMat(dense.sparseView());
}

/// Snapshot matrix with a prescribed descending spectrum in the X inner
/// product: S = U diag(sigma) V^T with X-orthonormal U.
Mat snapshots_with_spectrum(const SpMat& x, const Vec& sigma, unsigned seed) {
  const int n = static_cast<int>(x.rows());
  const int k = static_cast<int>(sigma.size());
  const Mat u = linalg::orthonormalize(random_cols(n, k, seed), &x);
  Mat v = random_cols(k + 2, k, seed + 1);
  v = Eigen::HouseholderQR<Mat>(v).householderQ() * Mat::Identity(k + 2, k);
  return u * sigma.asDiagonal() * v.transpose();
}

}  // namespace

TEST_CASE("energy bookkeeping follows the plain arithmetic") {
  Vec sigma(3);
  sigma << 9.0, 0.9, 0.1;

  const Vec plain = rom::energy_curve(sigma, false);
  CHECK(plain.size() == 3);
  CHECK(plain[0] == doctest::Approx(0.9));
  CHECK(plain[1] == doctest::Approx(0.99));
  CHECK(plain[2] == 1.0);  // exactly, by construction

  const Vec sq = rom::energy_curve(sigma, true);
  const double total = 81.0 + 0.81 + 0.01;
  CHECK(sq[0] == doctest::Approx(81.0 / total));
  CHECK(sq[2] == 1.0);

  CHECK(rom::energy_fraction(sigma, 1, false) == doctest::Approx(0.9));
  CHECK(rom::energy_fraction(sigma, 3, false) == 1.0);
  CHECK(rom::energy_fraction(sigma, 0, false) == 0.0);

  CHECK(rom::select_modes(sigma, 0.2, false) == 1);    // 0.9 >= 0.8
  CHECK(rom::select_modes(sigma, 0.05, false) == 2);   // needs 0.99
  CHECK(rom::select_modes(sigma, 1e-12, false) == 3);  // essentially exact
  CHECK(rom::select_modes(sigma, 1.0, false) >= 1);    // never empty
}

TEST_CASE("weighted compression reproduces a planted spectrum") {
  const int n = 40;
  const SpMat x = random_spd(n, 2);
  Vec sigma(5);
  sigma << 4.0, 2.0, 0.5, 1e-4, 1e-9;
  const Mat s = snapshots_with_spectrum(x, sigma, 7);

  const rom::PodBasis pod = rom::compress(s, &x, 5, 0, false);
  REQUIRE(pod.sigma.size() >= 5);
  for (int i = 0; i < 5; ++i)
    CHECK(pod.sigma[i] == doctest::Approx(sigma[i]).epsilon(1e-8));

  // Modes are X-orthonormal and span the snapshot range: projecting the
  // snapshots onto them loses nothing.
  const Mat gram = pod.z.transpose() * x * pod.z;
  CHECK((gram - Mat::Identity(gram.rows(), gram.cols())).norm() <= 1e-12);
  const Mat proj = pod.z * (pod.z.transpose() * x * s);
  CHECK((proj - s).norm() <= 1e-8 * s.norm());

  // Truncation keeps the leading modes of the same decomposition.
  const rom::PodBasis cut = rom::compress(s, &x, 2, 0, false);
  REQUIRE(cut.z.cols() == 2);
  for (int j = 0; j < 2; ++j) {
    const double align =
        std::abs(cut.z.col(j).dot(x * pod.z.col(j)));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-9));
  }
  // The reported spectrum is not cut with the basis.
  CHECK(cut.sigma.size() == pod.sigma.size());

  // Energy diagnostics: monotone, ending exactly at one.
  for (int i = 1; i < cut.energy.size(); ++i)
    CHECK(cut.energy[i] >= cut.energy[i - 1]);
  CHECK(cut.energy[cut.energy.size() - 1] == 1.0);
}

TEST_CASE("compression refuses to fabricate rank") {
  const int n = 30;
  const SpMat x = random_spd(n, 4);
  // Rank-2 snapshot set, three modes demanded.
  const Mat basis = random_cols(n, 2, 9);
  const Mat coeffs = random_cols(2, 6, 10);
  const Mat s = basis * coeffs;
  CHECK_THROWS_AS(rom::compress(s, &x, 3, 3, false), Error);
  // Accepting any rank simply returns the two real directions.
  const rom::PodBasis pod = rom::compress(s, &x, 3, 0, false);
  CHECK(pod.z.cols() == 2);
}

TEST_CASE("nested compression keeps the requested per-trajectory counts") {
  const int n = 35, n_t = 6, n_params = 3, n_t_pod = 4, n_max = 8;
  const SpMat x = random_spd(n, 5);

  rom::FamilyInput fam;
  fam.name = "v";
  fam.x = &x;
  for (int m = 0; m < n_params; ++m)
    fam.snapshots.push_back(random_cols(n, n_t, 20 + static_cast<unsigned>(m)));

  rom::FamilyInput plain;  // unweighted family with its own sizes
  plain.name = "u";
  plain.x = nullptr;
  for (int m = 0; m < n_params; ++m)
    plain.snapshots.push_back(
        random_cols(12, n_t, 40 + static_cast<unsigned>(m)));

  const std::vector<rom::FamilyResult> out =
      rom::nested_pod({fam, plain}, n_t_pod, n_max, false, 2);
  REQUIRE(out.size() == 2);
  for (const rom::FamilyResult& r : out) {
    CHECK(r.temporal_sigma.size() == n_params);
    // Stage 2 sees exactly n_t_pod columns per trajectory.
    CHECK(r.stacked_columns == n_params * n_t_pod);
    CHECK(r.parametric.z.cols() <= n_max);
    CHECK(r.parametric.z.cols() > 0);
    for (const Vec& sig : r.temporal_sigma) {
      CHECK(sig.size() >= n_t_pod);
      for (int i = 1; i < sig.size(); ++i) CHECK(sig[i] <= sig[i - 1]);
    }
  }
  // Weighted family: stage-2 modes X-orthonormal.
  const Mat gram = out[0].parametric.z.transpose() * x * out[0].parametric.z;
  CHECK((gram - Mat::Identity(gram.rows(), gram.cols())).norm() <= 1e-11);
  const Mat gram2 = out[1].parametric.z.transpose() * out[1].parametric.z;
  CHECK((gram2 - Mat::Identity(gram2.rows(), gram2.cols())).norm() <= 1e-11);

  // Worker count must not change the result.
  const std::vector<rom::FamilyResult> serial =
      rom::nested_pod({fam, plain}, n_t_pod, n_max, false, 1);
  CHECK((serial[0].parametric.z - out[0].parametric.z).norm() == 0.0);
  CHECK((serial[1].parametric.z - out[1].parametric.z).norm() == 0.0);
}

TEST_CASE("nested compression names the offending trajectory") {
  const int n = 20;
  rom::FamilyInput fam;
  fam.name = "w";
  fam.x = nullptr;
  fam.snapshots.push_back(random_cols(n, 5, 60));
  // Second trajectory is rank deficient: only 2 independent columns.
  const Mat thin = random_cols(n, 2, 61);
  fam.snapshots.push_back(thin * random_cols(2, 5, 62));

  try {
    rom::nested_pod({fam}, 4, 8, false, 1);
    FAIL("expected a rank failure");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("w") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);  // zero-based trajectory index
  }
}

TEST_CASE("nested compression of consistent data reproduces the snapshots") {
  // All trajectories drawn from the same 3-dimensional subspace: two stages
  // of compression must lose nothing and the final basis must span it.
  const int n = 30, k = 3;
  const SpMat x = random_spd(n, 6);
  const Mat span = random_cols(n, k, 70);

  rom::FamilyInput fam;
  fam.name = "v";
  fam.x = &x;
  for (int m = 0; m < 4; ++m)
    fam.snapshots.push_back(span * random_cols(k, 7, 80 + static_cast<unsigned>(m)));

  const std::vector<rom::FamilyResult> out =
      rom::nested_pod({fam}, k, 10, false, 1);
  const Mat& z = out[0].parametric.z;
  REQUIRE(z.cols() == k);
  for (const Mat& s : fam.snapshots) {
    const Mat proj = z * (z.transpose() * x * s);
    CHECK((proj - s).norm() <= 1e-9 * s.norm());
  }
}

TEST_CASE("enrichment produces an orthonormal union without duplicates") {
  const int n = 25;
  const SpMat x = random_spd(n, 8);
  const Mat zv = linalg::orthonormalize(random_cols(n, 3, 90), &x);
  Mat zs(n, 3);
  zs.col(0) = random_cols(n, 1, 91);
  zs.col(1) = zv.col(0);                       // duplicate of a velocity mode
  zs.col(2) = 0.5 * zv.col(1) + 2.0 * zs.col(0);  // dependent combination

  const Mat merged = rom::merge_enriched(zv, zs, &x, 1e-10);
  // 3 velocity + 1 genuinely new supremizer direction.
  REQUIRE(merged.cols() == 4);
  const Mat gram = merged.transpose() * x * merged;
  CHECK((gram - Mat::Identity(4, 4)).norm() <= 1e-12);
  // The original velocity modes come first (up to re-orthonormalization
  // roundoff).
  CHECK((merged.leftCols(3) - zv).norm() <= 1e-12);
}
