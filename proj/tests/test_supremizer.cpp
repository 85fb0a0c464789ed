#include "doctest.h"

#include "ocflow/fem/assemble.hpp"
#include "ocflow/fem/space.hpp"
#include "ocflow/geometry/generate.hpp"
#include "ocflow/rom/supremizer.hpp"

#include <Eigen/Dense>

#include <random>

using namespace ocflow;

namespace {

struct Setup {
  geom::Mesh mesh;
  fem::VectorSpaces vs;
  fem::Operators ops;
  SpMat xv;

  explicit Setup(double target_h) {
    geom::ChannelSpec spec;
    spec.half_width = 1.0;
    spec.length = 2.0;
    spec.target_h = target_h;
    mesh = geom::make_channel(spec);
    vs = fem::build_spaces(mesh);
    ops = fem::assemble_operators(vs, 3.6);
    xv = ops.M + ops.K1;
  }
};

Mat random_cols(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("interior maps are mutually inverse and skip Dirichlet rows") {
  Setup s(0.5);
  const rom::InteriorMap map = rom::velocity_interior(s.vs);
  CHECK(map.n_full == s.vs.n_vel());
  CHECK(map.n_interior() > 0);
  CHECK(map.n_interior() < s.vs.n_vel());

  int seen = 0;
  for (int dof = 0; dof < s.vs.n_vel(); ++dof) {
    const int n = dof / s.vs.dim;
    const bool fixed = s.vs.node_bc[static_cast<std::size_t>(n)].dirichlet();
    const int ii = map.int_of_dof[static_cast<std::size_t>(dof)];
    if (fixed) {
      CHECK(ii == -1);
    } else {
      CHECK(map.dof_of_int[static_cast<std::size_t>(ii)] == dof);
      ++seen;
    }
  }
  CHECK(seen == map.n_interior());
}

TEST_CASE("gather and scatter are exact partial inverses") {
  Setup s(0.5);
  const rom::InteriorMap map = rom::velocity_interior(s.vs);
  const Mat full = random_cols(s.vs.n_vel(), 3, 11);

  const Mat inner = rom::gather_rows(full, map);
  REQUIRE(inner.rows() == map.n_interior());
  REQUIRE(inner.cols() == 3);

  const Mat back = rom::scatter_rows(inner, map);
  REQUIRE(back.rows() == s.vs.n_vel());
  for (int dof = 0; dof < s.vs.n_vel(); ++dof) {
    const int ii = map.int_of_dof[static_cast<std::size_t>(dof)];
    for (int j = 0; j < 3; ++j) {
      if (ii < 0)
        CHECK(back(dof, j) == 0.0);  // exact zero, not merely small
      else
        CHECK(back(dof, j) == full(dof, j));
    }
  }
  // gather(scatter(x)) is the identity on interior blocks.
  CHECK(rom::gather_rows(back, map) == inner);
}

TEST_CASE("interior block agrees with the dense submatrix") {
  Setup s(0.7);
  const rom::InteriorMap map = rom::velocity_interior(s.vs);
  const SpMat xii = rom::interior_block(s.xv, map);
  REQUIRE(xii.rows() == map.n_interior());
  REQUIRE(xii.cols() == map.n_interior());

  const Mat dense_full = Mat(s.xv);
  const Mat dense_ii = Mat(xii);
  for (int i = 0; i < map.n_interior(); ++i)
    for (int j = 0; j < map.n_interior(); ++j)
      CHECK(dense_ii(i, j) ==
            dense_full(map.dof_of_int[static_cast<std::size_t>(i)],
                       map.dof_of_int[static_cast<std::size_t>(j)]));
}

TEST_CASE("supremizers satisfy the defining energy identity") {
  Setup s(0.5);
  const rom::SupremizerSolver solver(s.vs, s.xv, s.ops.B);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 3; ++trial) {
    Vec p(s.vs.n_pr());
    for (int i = 0; i < p.size(); ++i) p[i] = dist(rng);

    const Vec sup = solver.apply(p);
    REQUIRE(sup.size() == s.vs.n_vel());

    // Dirichlet rows are exactly zero.
    for (int n = 0; n < s.vs.n_scalar; ++n) {
      if (!s.vs.node_bc[static_cast<std::size_t>(n)].dirichlet()) continue;
      for (int c = 0; c < s.vs.dim; ++c)
        CHECK(sup[s.vs.vel_dof(n, c)] == 0.0);
    }

    // Riesz property: (s, z)_X = b(p, z) for interior test fields z, hence
    // in particular b(p, s) = ||s||_X^2 > 0.
    const double energy = sup.dot(s.xv * sup);
    const double coupling = p.dot(s.ops.B * sup);
    CHECK(energy > 0.0);
    CHECK(coupling == doctest::Approx(energy).epsilon(1e-10));

    // Residual of the interior solve itself.
    const rom::InteriorMap& map = solver.map();
    const Vec lhs = s.xv * sup;          // full-height X s
    const Vec rhs = s.ops.B.transpose() * p;
    double worst = 0.0;
    for (int i = 0; i < map.n_interior(); ++i) {
      const int dof = map.dof_of_int[static_cast<std::size_t>(i)];
      worst = std::max(worst, std::abs(lhs[dof] - rhs[dof]));
    }
    CHECK(worst <= 1e-10 * rhs.norm());
  }
}

TEST_CASE("column-wise supremizers match one-at-a-time solves") {
  Setup s(0.7);
  const rom::SupremizerSolver solver(s.vs, s.xv, s.ops.B);
  const Mat p_cols = random_cols(s.vs.n_pr(), 4, 5);
  const Mat all = solver.apply_all(p_cols);
  REQUIRE(all.rows() == s.vs.n_vel());
  REQUIRE(all.cols() == 4);
  for (int j = 0; j < 4; ++j)
    CHECK((all.col(j) - solver.apply(p_cols.col(j))).norm() == 0.0);
}

TEST_CASE("supremizer enrichment restores the reduced coupling rank") {
  Setup s(0.5);
  const rom::SupremizerSolver solver(s.vs, s.xv, s.ops.B);

  // A velocity basis made of discretely divergence-free fields has zero
  // reduced coupling with any pressure basis. Build one by projecting
  // random interior fields onto the kernel of B (via the saddle system),
  // then watch enrichment lift the inf-sup constant.
  const rom::InteriorMap map = rom::velocity_interior(s.vs);
  const SpMat xii = rom::interior_block(s.xv, map);
  const Mat b_int_dense = rom::gather_rows(Mat(s.ops.B.transpose()), map);
  // Kernel projection: minimize ||z - r||_X subject to B z = 0 (interior).
  const int ni = map.n_interior(), np = s.vs.n_pr();
  Mat saddle = Mat::Zero(ni + np, ni + np);
  saddle.topLeftCorner(ni, ni) = Mat(xii);
  saddle.topRightCorner(ni, np) = b_int_dense;
  saddle.bottomLeftCorner(np, ni) = b_int_dense.transpose();
  const Eigen::PartialPivLU<Mat> lu(saddle);

  const int nv = 4, npr = 2;
  Mat zv(s.vs.n_vel(), nv);
  const Mat raw = random_cols(ni, nv, 17);
  for (int j = 0; j < nv; ++j) {
    Vec rhs = Vec::Zero(ni + np);
    rhs.head(ni) = Mat(xii) * raw.col(j);
    const Vec sol = lu.solve(rhs);
    Vec full = Vec::Zero(s.vs.n_vel());
    for (int i = 0; i < ni; ++i)
      full[map.dof_of_int[static_cast<std::size_t>(i)]] = sol[i];
    zv.col(j) = full / std::sqrt(full.dot(s.xv * full));
  }
  Mat zp = random_cols(np, npr, 23);
  zp = Eigen::HouseholderQR<Mat>(zp).householderQ() * Mat::Identity(np, npr);

  const double bare = rom::reduced_infsup(zv, s.ops.B, zp);
  CHECK(bare <= 1e-10);

  Mat enriched(s.vs.n_vel(), nv + npr);
  enriched.leftCols(nv) = zv;
  enriched.rightCols(npr) = solver.apply_all(zp);
  const double lifted = rom::reduced_infsup(enriched, s.ops.B, zp);
  CHECK(lifted > 1e-6);

  // Structural rank deficiency: fewer velocity than pressure columns.
  CHECK(rom::reduced_infsup(zv.leftCols(1), s.ops.B, zp) == 0.0);
}
