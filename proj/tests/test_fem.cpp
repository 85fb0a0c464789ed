#include "doctest.h"

#include "ocflow/fem/assemble.hpp"
#include "ocflow/fem/quadrature.hpp"
#include "ocflow/fem/space.hpp"
#include "ocflow/geometry/generate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

using namespace ocflow;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

/// Mean value of the barycentric monomial prod L_k^{e_k} over the unit
/// simplex with d+1 barycentric coordinates:
///   (prod e_k!) * d! / (sum e_k + d)!
double simplex_monomial_mean(const std::vector<int>& expo) {
  const int d = static_cast<int>(expo.size()) - 1;
  double num = factorial(d);
  int total = 0;
  for (int e : expo) {
    num *= factorial(e);
    total += e;
  }
  return num / factorial(total + d);
}

double quadrature_monomial_mean(const fem::QuadratureRule& rule,
                                const std::vector<int>& expo) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    double term = rule.weights[q];
    for (std::size_t k = 0; k < expo.size(); ++k)
      term *= std::pow(rule.points[q][k], expo[k]);
    s += term;
  }
  return s;
}

void check_rule_exact_to_degree(const fem::QuadratureRule& rule, int n_bary,
                                int degree) {
  REQUIRE(rule.n_bary == n_bary);
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  // Every monomial of total degree <= `degree` in the barycentric
  // coordinates, enumerated recursively.
  std::vector<int> expo(static_cast<std::size_t>(n_bary), 0);
  std::function<void(int, int)> walk = [&](int pos, int left) {
    if (pos == n_bary) {
      CHECK(quadrature_monomial_mean(rule, expo) ==
            doctest::Approx(simplex_monomial_mean(expo)).epsilon(1e-13));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      expo[static_cast<std::size_t>(pos)] = e;
      walk(pos + 1, left - e);
    }
    expo[static_cast<std::size_t>(pos)] = 0;
  };
  walk(0, degree);
}

/// Nodal interpolant of an analytic velocity field.
Vec interpolate(const fem::VectorSpaces& vs,
                const std::function<double(const geom::Point&, int)>& f) {
  Vec v = Vec::Zero(vs.n_vel());
  for (int n = 0; n < vs.n_scalar; ++n)
    for (int c = 0; c < vs.dim; ++c)
      v[vs.vel_dof(n, c)] = f(vs.node_xyz[static_cast<std::size_t>(n)], c);
  return v;
}

Vec random_field(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

struct Fixture {
  geom::Mesh mesh;
  fem::VectorSpaces vs;
  fem::Operators ops;
  explicit Fixture(double nu = 1.25) {
    geom::ChannelSpec spec;
    spec.half_width = 1.0;
    spec.length = 2.0;
    spec.target_h = 0.4;
    mesh = geom::make_channel(spec);
    vs = fem::build_spaces(mesh);
    ops = fem::assemble_operators(vs, nu);
  }
};

}  // namespace

TEST_CASE("quadrature rules integrate every monomial to degree 5") {
  check_rule_exact_to_degree(fem::edge_rule(), 2, 5);
  check_rule_exact_to_degree(fem::triangle_rule(), 3, 5);
  check_rule_exact_to_degree(fem::tet_rule(), 4, 5);
  CHECK(&fem::cell_rule(2) == &fem::triangle_rule());
  CHECK(&fem::cell_rule(3) == &fem::tet_rule());
  CHECK(&fem::facet_rule(2) == &fem::edge_rule());
  CHECK(&fem::facet_rule(3) == &fem::triangle_rule());
}

TEST_CASE("quadratic basis is nodal and a partition of unity") {
  for (int dim : {2, 3}) {
    const int npc = dim == 2 ? 6 : 10;
    // Canonical reference nodes: vertices then edge midpoints.
    std::vector<std::array<double, 4>> nodes;
    for (int v = 0; v <= dim; ++v) {
      std::array<double, 4> b{0, 0, 0, 0};
      b[static_cast<std::size_t>(v)] = 1.0;
      nodes.push_back(b);
    }
    for (int a = 0; a <= dim; ++a)
      for (int b = a + 1; b <= dim; ++b) {
        std::array<double, 4> m{0, 0, 0, 0};
        m[static_cast<std::size_t>(a)] = 0.5;
        m[static_cast<std::size_t>(b)] = 0.5;
        nodes.push_back(m);
      }
    REQUIRE(static_cast<int>(nodes.size()) == npc);
    // Values at the reference nodes form a permutation of the identity.
    std::vector<int> hit(static_cast<std::size_t>(npc), 0);
    for (const auto& pt : nodes) {
      double vals[10];
      fem::eval_p2(dim, pt, vals);
      int ones = 0, where = -1;
      for (int i = 0; i < npc; ++i) {
        if (std::abs(vals[i] - 1.0) <= 1e-14) {
          ++ones;
          where = i;
        } else {
          CHECK(std::abs(vals[i]) <= 1e-14);
        }
      }
      CHECK(ones == 1);
      ++hit[static_cast<std::size_t>(where)];
    }
    for (int i = 0; i < npc; ++i) CHECK(hit[static_cast<std::size_t>(i)] == 1);
    // Partition of unity and vanishing derivative sums at random points.
    std::mt19937 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
      std::array<double, 4> b{0, 0, 0, 0};
      double s = 0.0;
      for (int k = 0; k <= dim; ++k) {
        b[static_cast<std::size_t>(k)] =
            std::uniform_real_distribution<double>(0.0, 1.0)(gen);
        s += b[static_cast<std::size_t>(k)];
      }
      for (int k = 0; k <= dim; ++k) b[static_cast<std::size_t>(k)] /= s;
      double vals[10];
      fem::eval_p2(dim, b, vals);
      double total = 0.0;
      for (int i = 0; i < npc; ++i) total += vals[i];
      CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
      // The barycentric coordinates are unconstrained variables here, so
      // the unity sum is flat only along directions with sum(t) = 0:
      // its derivative sum must be identical for every coordinate.
      std::array<std::array<double, 4>, 10> dl;
      fem::eval_p2_dL(dim, b, dl);
      std::array<double, 4> dsum{0, 0, 0, 0};
      for (int k = 0; k <= dim; ++k)
        for (int i = 0; i < npc; ++i)
          dsum[static_cast<std::size_t>(k)] +=
              dl[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      for (int k = 1; k <= dim; ++k)
        CHECK(std::abs(dsum[static_cast<std::size_t>(k)] - dsum[0]) <= 1e-12);
    }
  }
}

TEST_CASE("mass matrix integrates quartic polynomials exactly") {
  const Fixture fx;
  // f = (x^2, 0), g = (y^2, 0): f^T M g = int x^2 y^2 over [0,2]x[-1,1].
  const Vec f = interpolate(fx.vs, [](const geom::Point& p, int c) {
    return c == 0 ? p[0] * p[0] : 0.0;
  });
  const Vec g = interpolate(fx.vs, [](const geom::Point& p, int c) {
    return c == 0 ? p[1] * p[1] : 0.0;
  });
  const double exact = (8.0 / 3.0) * (2.0 / 3.0);
  CHECK(f.dot(fx.ops.M * g) == doctest::Approx(exact).epsilon(1e-13));
  // Observation mass currently coincides with the kinematic mass.
  CHECK((fx.ops.Md - fx.ops.M).norm() == 0.0);
}

TEST_CASE("stiffness matrix integrates quadratic gradients exactly") {
  const Fixture fx;
  // f = (x^2, 0): int |grad f|^2 = int (2x)^2 = 4 * (8/3) * 2.
  const Vec f = interpolate(fx.vs, [](const geom::Point& p, int c) {
    return c == 0 ? p[0] * p[0] : 0.0;
  });
  CHECK(f.dot(fx.ops.K1 * f) ==
        doctest::Approx(4.0 * (8.0 / 3.0) * 2.0).epsilon(1e-13));
  // A is the viscous scaling of K1.
  CHECK((fx.ops.A - 1.25 * fx.ops.K1).norm() <= 1e-14 * fx.ops.A.norm());
}

TEST_CASE("divergence operator vanishes on solenoidal fields") {
  const Fixture fx;
  const Vec rot = interpolate(fx.vs, [](const geom::Point& p, int c) {
    return c == 0 ? -p[1] : p[0];  // rigid rotation, div = 0
  });
  CHECK((fx.ops.B * rot).norm() <= 1e-13);
  // v = (x, 0) has div = 1; testing against the all-ones pressure vector
  // integrates -div v over the domain (linear partition of unity).
  const Vec vx = interpolate(fx.vs, [](const geom::Point& p, int c) {
    return c == 0 ? p[0] : 0.0;
  });
  const Vec ones = Vec::Ones(fx.vs.n_pr());
  CHECK(ones.dot(fx.ops.B * vx) ==
        doctest::Approx(-fx.mesh.total_measure()).epsilon(1e-13));
}

TEST_CASE("fixed operators have the expected structure") {
  const Fixture fx;
  auto asym = [](const SpMat& a) {
    const Mat d = Mat(a) - Mat(a).transpose();
    return d.norm() / std::max(1.0, Mat(a).norm());
  };
  CHECK(asym(fx.ops.M) <= 1e-15);
  CHECK(asym(fx.ops.K1) <= 1e-15);
  CHECK(asym(fx.ops.Mp) <= 1e-15);
  CHECK(asym(fx.ops.R) <= 1e-15);
  // Positive definiteness on random vectors.
  for (unsigned s = 0; s < 3; ++s) {
    const Vec v = random_field(fx.vs.n_vel(), 100 + s);
    const Vec p = random_field(fx.vs.n_pr(), 200 + s);
    const Vec u = random_field(fx.vs.n_ctrl(), 300 + s);
    CHECK(v.dot(fx.ops.M * v) > 0.0);
    CHECK(v.dot(fx.ops.K1 * v) >= 0.0);
    CHECK(p.dot(fx.ops.Mp * p) > 0.0);
    CHECK(u.dot(fx.ops.R * u) > 0.0);
  }
  CHECK(fx.ops.B.rows() == fx.vs.n_pr());
  CHECK(fx.ops.B.cols() == fx.vs.n_vel());
  CHECK(fx.ops.Mg.rows() == fx.vs.n_ctrl());
  CHECK(fx.ops.Mg.cols() == fx.vs.n_vel());
  CHECK(fx.ops.nu == 1.25);
}

TEST_CASE("trace operators integrate over the outflow boundary") {
  const Fixture fx;
  // Constant control (1,1) against constant velocity (1,1):
  // u^T Mg v = int_outlet (1,1).(1,1) = 2 * |outlet|, with |outlet| = 2.
  const Vec u = Vec::Ones(fx.vs.n_ctrl());
  const Vec v = Vec::Ones(fx.vs.n_vel());
  CHECK(u.dot(fx.ops.Mg * v) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(u.dot(fx.ops.R * u) == doctest::Approx(4.0).epsilon(1e-13));
  // Mg restricted to control columns equals R: the trace coupling tested
  // against boundary fields is the control Gram itself.
  for (unsigned s = 0; s < 3; ++s) {
    const Vec a = random_field(fx.vs.n_ctrl(), 400 + s);
    const Vec b = random_field(fx.vs.n_ctrl(), 500 + s);
    Vec b_vel = Vec::Zero(fx.vs.n_vel());
    for (std::size_t slot = 0; slot < fx.vs.ctrl_nodes.size(); ++slot)
      for (int c = 0; c < fx.vs.dim; ++c)
        b_vel[fx.vs.vel_dof(fx.vs.ctrl_nodes[slot], c)] =
            b[fx.vs.ctrl_dof(static_cast<int>(slot), c)];
    CHECK(a.dot(fx.ops.Mg * b_vel) ==
          doctest::Approx(a.dot(fx.ops.R * b)).epsilon(1e-12));
  }
}

TEST_CASE("convection matrices agree with direct quadrature") {
  const Fixture fx;
  for (unsigned s = 0; s < 3; ++s) {
    const Vec a = random_field(fx.vs.n_vel(), 600 + s);
    const Vec b = random_field(fx.vs.n_vel(), 700 + s);
    const Vec c = random_field(fx.vs.n_vel(), 800 + s);
    const double direct = fem::trilinear(fx.vs, a, b, c);
    // Advection route: e(a, b, c) = c^T E(a) b.
    CHECK(c.dot(fem::conv_advection(fx.vs, a) * b) ==
          doctest::Approx(direct).epsilon(1e-11));
    // Gradient route: c^T X(b) a = ((a . grad) b, c) as well.
    CHECK(c.dot(fem::conv_gradient(fx.vs, b) * a) ==
          doctest::Approx(direct).epsilon(1e-11));
    // Outer route: a^T Phi(c) m picks the m-th column pairing; contracted
    // with b it evaluates e(b, a, c).
    CHECK(a.dot(fem::conv_outer(fx.vs, c) * b) ==
          doctest::Approx(fem::trilinear(fx.vs, b, a, c)).epsilon(1e-11));
  }
}

TEST_CASE("convection of an exact polynomial field") {
  const Fixture fx;
  // a = (1, 0), b = (x, 0), c = (1, 0): ((a.grad) b, c) = int 1 = measure.
  const Vec a = interpolate(fx.vs, [](const geom::Point&, int c) {
    return c == 0 ? 1.0 : 0.0;
  });
  const Vec b = interpolate(fx.vs, [](const geom::Point& p, int c) {
    return c == 0 ? p[0] : 0.0;
  });
  CHECK(fem::trilinear(fx.vs, a, b, a) ==
        doctest::Approx(fx.mesh.total_measure()).epsilon(1e-13));
}

TEST_CASE("adjoint-convection derivative identity holds to rounding") {
  // d/dv [(E(v) + X(v))^T w] applied to dv equals
  // (Phi(w) + Phi(w)^T) dv, both contracted against a test field z:
  //   z^T (E(dv) + X(dv))^T w = z^T (Phi(w) + Phi(w)^T) dv.
  const Fixture fx;
  const Vec w = random_field(fx.vs.n_vel(), 900);
  const Vec dv = random_field(fx.vs.n_vel(), 901);
  const Vec z = random_field(fx.vs.n_vel(), 902);
  const SpMat e_dv = fem::conv_advection(fx.vs, dv);
  const SpMat x_dv = fem::conv_gradient(fx.vs, dv);
  const SpMat phi_w = fem::conv_outer(fx.vs, w);
  const double lhs = z.dot((e_dv + x_dv).transpose() * w);
  const double rhs = z.dot(phi_w * dv) + z.dot(phi_w.transpose() * dv);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
}

TEST_CASE("facet gradients are exact for linear fields") {
  const Fixture fx;
  const double al = 0.7, be = -1.3, ga = 0.4, de = 2.1;
  const Vec v = interpolate(fx.vs, [&](const geom::Point& p, int c) {
    return c == 0 ? al * p[0] + be * p[1] : ga * p[0] + de * p[1];
  });
  for (std::size_t fi = 0; fi < fx.vs.facets.size(); ++fi) {
    const fem::FacetGradients fg =
        fem::facet_velocity_gradients(fx.vs, static_cast<int>(fi), v);
    REQUIRE(!fg.grad.empty());
    double wsum = 0.0;
    for (std::size_t q = 0; q < fg.grad.size(); ++q) {
      CHECK(fg.grad[q](0, 0) == doctest::Approx(al).epsilon(1e-12));
      CHECK(fg.grad[q](0, 1) == doctest::Approx(be).epsilon(1e-12));
      CHECK(fg.grad[q](1, 0) == doctest::Approx(ga).epsilon(1e-12));
      CHECK(fg.grad[q](1, 1) == doctest::Approx(de).epsilon(1e-12));
      wsum += fg.weight[q];
    }
    CHECK(wsum == doctest::Approx(fx.vs.facets[fi].measure).epsilon(1e-13));
  }
}

TEST_CASE("boundary classification matches the channel geometry") {
  const Fixture fx;
  int walls = 0, inlets = 0, outlets = 0, interior = 0;
  for (int n = 0; n < fx.vs.n_scalar; ++n) {
    const geom::Point& p = fx.vs.node_xyz[static_cast<std::size_t>(n)];
    const fem::NodeBoundary& bc = fx.vs.node_bc[static_cast<std::size_t>(n)];
    if (bc.wall) {
      CHECK(std::abs(std::abs(p[1]) - 1.0) <= 1e-12);
      ++walls;
    }
    if (bc.inlet != 0) {
      CHECK(bc.inlet == 1);
      CHECK(std::abs(p[0]) <= 1e-12);
      ++inlets;
    }
    if (bc.outlet) {
      CHECK(std::abs(p[0] - 2.0) <= 1e-12);
      ++outlets;
    }
    if (!bc.wall && bc.inlet == 0 && !bc.outlet) ++interior;
  }
  CHECK(walls > 0);
  CHECK(inlets > 0);
  CHECK(outlets > 0);
  CHECK(interior > 0);
  // Control slots cover exactly the outlet nodes.
  int n_outlet = 0;
  for (const fem::NodeBoundary& bc : fx.vs.node_bc)
    if (bc.outlet) ++n_outlet;
  CHECK(static_cast<int>(fx.vs.ctrl_nodes.size()) == n_outlet);
  for (std::size_t slot = 0; slot < fx.vs.ctrl_nodes.size(); ++slot)
    CHECK(fx.vs.ctrl_slot[static_cast<std::size_t>(
              fx.vs.ctrl_nodes[slot])] == static_cast<int>(slot));
}
