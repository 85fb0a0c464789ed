#include "ocflow/fem/quadrature.hpp"

#include <cmath>

namespace ocflow::fem {

namespace {

QuadratureRule make_edge_rule() {
  QuadratureRule r;
  r.n_bary = 2;
  const double g = std::sqrt(3.0 / 5.0);
  const double ts[3] = {0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
  const double ws[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (int i = 0; i < 3; ++i) {
    r.points.push_back({1.0 - ts[i], ts[i], 0.0, 0.0});
    r.weights.push_back(ws[i]);
  }
  return r;
}

QuadratureRule make_triangle_rule() {
  QuadratureRule r;
  r.n_bary = 3;
  const double s15 = std::sqrt(15.0);
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0});
  r.weights.push_back(9.0 / 40.0);
  const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
  const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
  for (const auto& [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({b, a, a, 0.0});
    r.points.push_back({a, b, a, 0.0});
    r.points.push_back({a, a, b, 0.0});
    r.weights.push_back(w);
    r.weights.push_back(w);
    r.weights.push_back(w);
  }
  return r;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Grundmann-Moller rule of index s on the d-simplex, degree 2s+1.
QuadratureRule make_gm_rule(int d, int s) {
  QuadratureRule r;
  r.n_bary = d + 1;
  double total = 0.0;
  for (int i = 0; i <= s; ++i) {
    const double denom = d + 2 * s + 1 - 2 * i;
    double w = std::pow(2.0, -2.0 * s) * std::pow(denom, 2 * s + 1) /
               (factorial(i) * factorial(d + 2 * s + 1 - i));
    if (i % 2) w = -w;
    // Enumerate k in N^{d+1} with |k| = s - i.
    std::array<int, 4> k{0, 0, 0, 0};
    const int target = s - i;
    // Simple odometer over compositions of `target` into d+1 parts.
    std::vector<std::array<int, 4>> combos;
    std::array<int, 4> c{0, 0, 0, 0};
    // recursive enumeration
    auto rec = [&](auto&& self, int pos, int left) -> void {
      if (pos == d) {
        c[pos] = left;
        combos.push_back(c);
        return;
      }
      for (int v = 0; v <= left; ++v) {
        c[pos] = v;
        self(self, pos + 1, left - v);
      }
    };
    rec(rec, 0, target);
    (void)k;
    for (const auto& combo : combos) {
      std::array<double, 4> bary{0, 0, 0, 0};
      for (int j = 0; j <= d; ++j) bary[j] = (2.0 * combo[j] + 1.0) / denom;
      r.points.push_back(bary);
      r.weights.push_back(w);
      total += w;
    }
  }
  for (double& w : r.weights) w /= total;  // normalize to sum 1
  return r;
}

}  // namespace

const QuadratureRule& edge_rule() {
  static const QuadratureRule r = make_edge_rule();
  return r;
}

const QuadratureRule& triangle_rule() {
  static const QuadratureRule r = make_triangle_rule();
  return r;
}

const QuadratureRule& tet_rule() {
  static const QuadratureRule r = make_gm_rule(3, 2);
  return r;
}

const QuadratureRule& cell_rule(int dim) {
  return dim == 2 ? triangle_rule() : tet_rule();
}

const QuadratureRule& facet_rule(int dim) {
  return dim == 2 ? edge_rule() : triangle_rule();
}

}  // namespace ocflow::fem
