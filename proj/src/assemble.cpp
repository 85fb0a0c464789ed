#include "ocflow/fem/assemble.hpp"

#include "ocflow/fem/quadrature.hpp"

#include <array>

namespace ocflow::fem {

namespace {

/// Per-cell affine geometry: physical gradients of the barycentric
/// coordinates and the cell measure.
struct CellGeom {
  std::array<std::array<double, 3>, 4> grad_l{};  // grad L_k, k = 0..dim
  double measure = 0.0;
};

CellGeom cell_geom(const VectorSpaces& vs, int c) {
  const geom::Mesh& mesh = *vs.mesh;
  const auto& k = mesh.cells[static_cast<std::size_t>(c)];
  CellGeom g;
  g.measure = mesh.cell_measure(c);
  const int dim = vs.dim;
  const geom::Point& p0 = mesh.vertices[static_cast<std::size_t>(k[0])];
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
  for (int col = 0; col < dim; ++col) {
    const geom::Point d =
        geom::sub(mesh.vertices[static_cast<std::size_t>(k[col + 1])], p0);
    for (int row = 0; row < dim; ++row) j(row, col) = d[row];
  }
  const Eigen::Matrix3d jinv_t = j.inverse().transpose();
  //  L_{k+1} (k = 0..dim-1) are the reference coordinates; grad = column k.
  for (int k1 = 0; k1 < dim; ++k1)
    for (int d = 0; d < dim; ++d)
      g.grad_l[static_cast<std::size_t>(k1 + 1)][static_cast<std::size_t>(d)] =
          jinv_t(d, k1);
  for (int d = 0; d < dim; ++d) {
    double s = 0.0;
    for (int k1 = 1; k1 <= dim; ++k1)
      s += g.grad_l[static_cast<std::size_t>(k1)][static_cast<std::size_t>(d)];
    g.grad_l[0][static_cast<std::size_t>(d)] = -s;
  }
  return g;
}

/// Reference-level basis tables at the cell quadrature points.
struct BasisTables {
  int nq = 0, nn = 0;
  std::vector<std::array<double, 10>> n;                    // values
  std::vector<std::array<std::array<double, 4>, 10>> dndl;  // d/dL
  std::vector<std::array<double, 4>> bary;
  std::vector<double> w;
};

const BasisTables& basis_tables(int dim) {
  static const BasisTables t2 = [] {
    BasisTables t;
    const QuadratureRule& q = triangle_rule();
    t.nq = static_cast<int>(q.points.size());
    t.nn = 6;
    for (int i = 0; i < t.nq; ++i) {
      std::array<double, 10> vals{};
      eval_p2(2, q.points[static_cast<std::size_t>(i)], vals.data());
      t.n.push_back(vals);
      std::array<std::array<double, 4>, 10> d{};
      eval_p2_dL(2, q.points[static_cast<std::size_t>(i)], d);
      t.dndl.push_back(d);
      t.bary.push_back(q.points[static_cast<std::size_t>(i)]);
      t.w.push_back(q.weights[static_cast<std::size_t>(i)]);
    }
    return t;
  }();
  static const BasisTables t3 = [] {
    BasisTables t;
    const QuadratureRule& q = tet_rule();
    t.nq = static_cast<int>(q.points.size());
    t.nn = 10;
    for (int i = 0; i < t.nq; ++i) {
      std::array<double, 10> vals{};
      eval_p2(3, q.points[static_cast<std::size_t>(i)], vals.data());
      t.n.push_back(vals);
      std::array<std::array<double, 4>, 10> d{};
      eval_p2_dL(3, q.points[static_cast<std::size_t>(i)], d);
      t.dndl.push_back(d);
      t.bary.push_back(q.points[static_cast<std::size_t>(i)]);
      t.w.push_back(q.weights[static_cast<std::size_t>(i)]);
    }
    return t;
  }();
  return dim == 2 ? t2 : t3;
}

/// Physical basis gradients at one quadrature point.
void physical_grads(const BasisTables& t, const CellGeom& g, int dim, int q,
                    std::array<std::array<double, 3>, 10>& out) {
  for (int i = 0; i < t.nn; ++i) {
    for (int d = 0; d < dim; ++d) {
      double s = 0.0;
      for (int k = 0; k <= dim; ++k)
        s += t.dndl[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)]
                   [static_cast<std::size_t>(k)] *
             g.grad_l[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)];
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] = s;
    }
  }
}

/// Facet trace shape functions (quadratic) at a facet quadrature point.
void facet_shapes(int dim, const std::array<double, 4>& bary, double* out) {
  if (dim == 2) {  // edge: nodes (v0, v1, midpoint)
    const double l0 = bary[0], l1 = bary[1];
    out[0] = l0 * (2.0 * l0 - 1.0);
    out[1] = l1 * (2.0 * l1 - 1.0);
    out[2] = 4.0 * l0 * l1;
  } else {  // triangle: 2D quadratic on the facet
    eval_p2(2, bary, out);
  }
}

}  // namespace

Operators assemble_operators(const VectorSpaces& vs, double nu) {
  if (nu <= 0.0) throw Error("assemble_operators: viscosity must be positive");
  const int dim = vs.dim;
  const BasisTables& t = basis_tables(dim);
  const int nn = t.nn;
  const int n_vel = vs.n_vel(), n_pr = vs.n_pr(), n_ctrl = vs.n_ctrl();

  std::vector<Triplet> tm, tk, tb, tmp, tr, tmg;
  std::array<std::array<double, 3>, 10> dn{};

  for (int c = 0; c < vs.mesh->n_cells(); ++c) {
    const CellGeom g = cell_geom(vs, c);
    const auto& nodes = vs.cell_nodes[static_cast<std::size_t>(c)];
    for (int q = 0; q < t.nq; ++q) {
      const double w = t.w[static_cast<std::size_t>(q)] * g.measure;
      physical_grads(t, g, dim, q, dn);
      const auto& nv = t.n[static_cast<std::size_t>(q)];
      const auto& bary = t.bary[static_cast<std::size_t>(q)];
      for (int i = 0; i < nn; ++i) {
        const int ni = nodes[static_cast<std::size_t>(i)];
        for (int j = 0; j < nn; ++j) {
          const int nj = nodes[static_cast<std::size_t>(j)];
          const double mij = w * nv[static_cast<std::size_t>(i)] *
                             nv[static_cast<std::size_t>(j)];
          double kij = 0.0;
          for (int d = 0; d < dim; ++d)
            kij += dn[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] *
                   dn[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];
          kij *= w;
          for (int d = 0; d < dim; ++d) {
            tm.emplace_back(vs.vel_dof(ni, d), vs.vel_dof(nj, d), mij);
            tk.emplace_back(vs.vel_dof(ni, d), vs.vel_dof(nj, d), kij);
          }
        }
        // divergence rows: linear test functions are the barycentrics
        for (int p = 0; p <= dim; ++p) {
          const int np =
              vs.mesh->cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
          for (int d = 0; d < dim; ++d)
            tb.emplace_back(np, vs.vel_dof(ni, d),
                            -w * bary[static_cast<std::size_t>(p)] *
                                dn[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]);
        }
      }
      for (int p = 0; p <= dim; ++p)
        for (int r = 0; r <= dim; ++r) {
          const auto& k = vs.mesh->cells[static_cast<std::size_t>(c)];
          tmp.emplace_back(k[static_cast<std::size_t>(p)], k[static_cast<std::size_t>(r)],
                           w * bary[static_cast<std::size_t>(p)] *
                               bary[static_cast<std::size_t>(r)]);
        }
    }
  }

  // --- outflow trace operators.
  const QuadratureRule& fq = facet_rule(dim);
  const int nfn = dim == 2 ? 3 : 6;
  std::array<double, 6> fs{};
  for (const FacetInfo& f : vs.facets) {
    if (f.tag != geom::kOutlet) continue;
    for (std::size_t q = 0; q < fq.points.size(); ++q) {
      const double w = fq.weights[q] * f.measure;
      facet_shapes(dim, fq.points[q], fs.data());
      for (int i = 0; i < nfn; ++i) {
        const int si = vs.ctrl_slot[static_cast<std::size_t>(
            f.nodes[static_cast<std::size_t>(i)])];
        if (si < 0) throw Error("assemble_operators: outflow node without slot");
        for (int j = 0; j < nfn; ++j) {
          const int nj = f.nodes[static_cast<std::size_t>(j)];
          const int sj = vs.ctrl_slot[static_cast<std::size_t>(nj)];
          const double mij =
              w * fs[static_cast<std::size_t>(i)] * fs[static_cast<std::size_t>(j)];
          for (int d = 0; d < dim; ++d) {
            tr.emplace_back(vs.ctrl_dof(si, d), vs.ctrl_dof(sj, d), mij);
            tmg.emplace_back(vs.ctrl_dof(si, d), vs.vel_dof(nj, d), mij);
          }
        }
      }
    }
  }

  Operators ops;
  ops.nu = nu;
  ops.M.resize(n_vel, n_vel);
  ops.M.setFromTriplets(tm.begin(), tm.end());
  ops.K1.resize(n_vel, n_vel);
  ops.K1.setFromTriplets(tk.begin(), tk.end());
  ops.A = nu * ops.K1;
  ops.Md = ops.M;
  ops.B.resize(n_pr, n_vel);
  ops.B.setFromTriplets(tb.begin(), tb.end());
  ops.Mp.resize(n_pr, n_pr);
  ops.Mp.setFromTriplets(tmp.begin(), tmp.end());
  ops.R.resize(n_ctrl, n_ctrl);
  ops.R.setFromTriplets(tr.begin(), tr.end());
  ops.Mg.resize(n_ctrl, n_vel);
  ops.Mg.setFromTriplets(tmg.begin(), tmg.end());
  return ops;
}

namespace {

/// Shared driver for the three convection matrices.
template <typename Emit>
void convection_sweep(const VectorSpaces& vs, const Vec& f, Emit&& emit) {
  if (f.size() != vs.n_vel())
    throw Error("convection assembly: field size mismatch");
  const int dim = vs.dim;
  const BasisTables& t = basis_tables(dim);
  const int nn = t.nn;
  std::array<std::array<double, 3>, 10> dn{};

  for (int c = 0; c < vs.mesh->n_cells(); ++c) {
    const CellGeom g = cell_geom(vs, c);
    const auto& nodes = vs.cell_nodes[static_cast<std::size_t>(c)];
    for (int q = 0; q < t.nq; ++q) {
      const double w = t.w[static_cast<std::size_t>(q)] * g.measure;
      physical_grads(t, g, dim, q, dn);
      const auto& nv = t.n[static_cast<std::size_t>(q)];
      // field value and gradient at the quadrature point
      std::array<double, 3> fval{};
      std::array<std::array<double, 3>, 3> fgrad{};  // [comp][dir]
      for (int i = 0; i < nn; ++i) {
        const int ni = nodes[static_cast<std::size_t>(i)];
        for (int comp = 0; comp < dim; ++comp) {
          const double coef = f[vs.vel_dof(ni, comp)];
          fval[static_cast<std::size_t>(comp)] +=
              coef * nv[static_cast<std::size_t>(i)];
          for (int d = 0; d < dim; ++d)
            fgrad[static_cast<std::size_t>(comp)][static_cast<std::size_t>(d)] +=
                coef *
                dn[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
        }
      }
      emit(c, q, w, nodes, nv, dn, fval, fgrad);
    }
  }
}

}  // namespace

SpMat conv_advection(const VectorSpaces& vs, const Vec& f) {
  const int dim = vs.dim;
  const BasisTables& t = basis_tables(dim);
  std::vector<Triplet> trip;
  convection_sweep(vs, f,
                   [&](int, int, double w, const auto& nodes, const auto& nv,
                       const auto& dn, const auto& fval, const auto&) {
                     for (int i = 0; i < t.nn; ++i)
                       for (int j = 0; j < t.nn; ++j) {
                         double adv = 0.0;
                         for (int d = 0; d < dim; ++d)
                           adv += fval[static_cast<std::size_t>(d)] *
                                  dn[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];
                         const double val =
                             w * adv * nv[static_cast<std::size_t>(i)];
                         for (int c2 = 0; c2 < dim; ++c2)
                           trip.emplace_back(
                               vs.vel_dof(nodes[static_cast<std::size_t>(i)], c2),
                               vs.vel_dof(nodes[static_cast<std::size_t>(j)], c2),
                               val);
                       }
                   });
  SpMat m(vs.n_vel(), vs.n_vel());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat conv_gradient(const VectorSpaces& vs, const Vec& f) {
  const int dim = vs.dim;
  const BasisTables& t = basis_tables(dim);
  std::vector<Triplet> trip;
  convection_sweep(
      vs, f,
      [&](int, int, double w, const auto& nodes, const auto& nv, const auto&,
          const auto&, const auto& fgrad) {
        for (int i = 0; i < t.nn; ++i)
          for (int j = 0; j < t.nn; ++j) {
            const double nij = w * nv[static_cast<std::size_t>(i)] *
                               nv[static_cast<std::size_t>(j)];
            // [(phi_j e_c . grad) f] . (phi_i e_cp) = N_j N_i df_cp/dx_c
            for (int cp = 0; cp < dim; ++cp)
              for (int c2 = 0; c2 < dim; ++c2)
                trip.emplace_back(
                    vs.vel_dof(nodes[static_cast<std::size_t>(i)], cp),
                    vs.vel_dof(nodes[static_cast<std::size_t>(j)], c2),
                    nij * fgrad[static_cast<std::size_t>(cp)][static_cast<std::size_t>(c2)]);
          }
      });
  SpMat m(vs.n_vel(), vs.n_vel());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat conv_outer(const VectorSpaces& vs, const Vec& f) {
  const int dim = vs.dim;
  const BasisTables& t = basis_tables(dim);
  std::vector<Triplet> trip;
  convection_sweep(
      vs, f,
      [&](int, int, double w, const auto& nodes, const auto& nv, const auto& dn,
          const auto& fval, const auto&) {
        for (int i = 0; i < t.nn; ++i)
          for (int mnode = 0; mnode < t.nn; ++mnode) {
            // [(phi_m e_cm . grad) (phi_i e_ci)] . f = N_m dN_i/dx_cm f_ci
            for (int ci = 0; ci < dim; ++ci)
              for (int cm = 0; cm < dim; ++cm)
                trip.emplace_back(
                    vs.vel_dof(nodes[static_cast<std::size_t>(i)], ci),
                    vs.vel_dof(nodes[static_cast<std::size_t>(mnode)], cm),
                    w * nv[static_cast<std::size_t>(mnode)] *
                        dn[static_cast<std::size_t>(i)][static_cast<std::size_t>(cm)] *
                        fval[static_cast<std::size_t>(ci)]);
          }
      });
  SpMat m(vs.n_vel(), vs.n_vel());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double trilinear(const VectorSpaces& vs, const Vec& a, const Vec& b,
                 const Vec& c) {
  if (a.size() != vs.n_vel() || b.size() != vs.n_vel() || c.size() != vs.n_vel())
    throw Error("trilinear: field size mismatch");
  const int dim = vs.dim;
  const BasisTables& t = basis_tables(dim);
  const int nn = t.nn;
  std::array<std::array<double, 3>, 10> dn{};
  double total = 0.0;
  for (int cell = 0; cell < vs.mesh->n_cells(); ++cell) {
    const CellGeom g = cell_geom(vs, cell);
    const auto& nodes = vs.cell_nodes[static_cast<std::size_t>(cell)];
    for (int q = 0; q < t.nq; ++q) {
      const double w = t.w[static_cast<std::size_t>(q)] * g.measure;
      physical_grads(t, g, dim, q, dn);
      const auto& nv = t.n[static_cast<std::size_t>(q)];
      std::array<double, 3> av{}, cv{};
      std::array<std::array<double, 3>, 3> bg{};
      for (int i = 0; i < nn; ++i) {
        const int ni = nodes[static_cast<std::size_t>(i)];
        for (int comp = 0; comp < dim; ++comp) {
          av[static_cast<std::size_t>(comp)] +=
              a[vs.vel_dof(ni, comp)] * nv[static_cast<std::size_t>(i)];
          cv[static_cast<std::size_t>(comp)] +=
              c[vs.vel_dof(ni, comp)] * nv[static_cast<std::size_t>(i)];
          for (int d = 0; d < dim; ++d)
            bg[static_cast<std::size_t>(comp)][static_cast<std::size_t>(d)] +=
                b[vs.vel_dof(ni, comp)] *
                dn[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
        }
      }
      double val = 0.0;
      for (int comp = 0; comp < dim; ++comp) {
        double conv = 0.0;
        for (int d = 0; d < dim; ++d)
          conv += av[static_cast<std::size_t>(d)] *
                  bg[static_cast<std::size_t>(comp)][static_cast<std::size_t>(d)];
        val += conv * cv[static_cast<std::size_t>(comp)];
      }
      total += w * val;
    }
  }
  return total;
}

FacetGradients facet_velocity_gradients(const VectorSpaces& vs, int fi,
                                        const Vec& f) {
  if (f.size() != vs.n_vel())
    throw Error("facet_velocity_gradients: field size mismatch");
  const int dim = vs.dim;
  const FacetInfo& facet = vs.facets[static_cast<std::size_t>(fi)];
  const CellGeom g = cell_geom(vs, facet.cell);
  const auto& nodes = vs.cell_nodes[static_cast<std::size_t>(facet.cell)];
  const QuadratureRule& fq = facet_rule(dim);
  const int nn = vs.nodes_per_cell();

  FacetGradients out;
  std::array<std::array<double, 4>, 10> dndl{};
  for (std::size_t q = 0; q < fq.points.size(); ++q) {
    // facet barycentric -> owner-cell barycentric
    std::array<double, 4> cell_bary{0, 0, 0, 0};
    for (int i = 0; i < vs.mesh->vertices_per_facet(); ++i)
      cell_bary[static_cast<std::size_t>(
          facet.cell_local_vertex[static_cast<std::size_t>(i)])] =
          fq.points[q][static_cast<std::size_t>(i)];
    eval_p2_dL(dim, cell_bary, dndl);
    Mat grad = Mat::Zero(dim, dim);
    for (int i = 0; i < nn; ++i) {
      std::array<double, 3> dni{};
      for (int d = 0; d < dim; ++d) {
        double s = 0.0;
        for (int k = 0; k <= dim; ++k)
          s += dndl[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
               g.grad_l[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)];
        dni[static_cast<std::size_t>(d)] = s;
      }
      const int ni = nodes[static_cast<std::size_t>(i)];
      for (int comp = 0; comp < dim; ++comp)
        for (int d = 0; d < dim; ++d)
          grad(comp, d) +=
              f[vs.vel_dof(ni, comp)] * dni[static_cast<std::size_t>(d)];
    }
    out.grad.push_back(grad);
    out.weight.push_back(fq.weights[q] * facet.measure);
  }
  return out;
}

}  // namespace ocflow::fem
