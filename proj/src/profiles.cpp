#include "ocflow/scenarios/profiles.hpp"

#include <cmath>
#include <map>

namespace ocflow::scen {

std::vector<InletShape> inlet_lift_shapes(const fem::VectorSpaces& vs,
                                          double nu, double r_in) {
  if (nu <= 0.0 || r_in <= 0.0)
    throw Error("inlet_lift_shapes: nu and r_in must be positive");

  // Area-weighted centroid and normal per inlet tag.
  struct InletGeom {
    geom::Point centroid{};
    geom::Point normal{};
    double area = 0.0;
  };
  std::map<int, InletGeom> inlets;
  for (std::size_t fi = 0; fi < vs.facets.size(); ++fi) {
    const fem::FacetInfo& f = vs.facets[fi];
    if (f.tag == geom::kWall || f.tag == geom::kOutlet) continue;
    InletGeom& g = inlets[f.tag];
    const geom::Point c = vs.mesh->facet_centroid(vs.mesh->facets[fi]);
    g.centroid = geom::add(g.centroid, geom::scale(f.measure, c));
    g.normal = geom::add(g.normal, geom::scale(f.measure, f.normal));
    g.area += f.measure;
  }
  if (inlets.empty()) throw Error("inlet_lift_shapes: mesh has no inlets");

  std::vector<InletShape> out;
  for (auto& [tag, g] : inlets) {
    g.centroid = geom::scale(1.0 / g.area, g.centroid);
    const double nn = geom::norm(g.normal);
    if (nn <= 0.0) throw Error("inlet_lift_shapes: degenerate inlet normal");
    g.normal = geom::scale(1.0 / nn, g.normal);

    InletShape s;
    s.tag = tag;
    s.shape = Vec::Zero(vs.n_vel());
    for (int n = 0; n < vs.n_scalar; ++n) {
      const fem::NodeBoundary& bc = vs.node_bc[static_cast<std::size_t>(n)];
      if (bc.inlet != tag || bc.wall) continue;  // walls pin the rim to zero
      const geom::Point d =
          geom::sub(vs.node_xyz[static_cast<std::size_t>(n)], g.centroid);
      const double axial = geom::dot(d, g.normal);
      const geom::Point in_plane = geom::sub(d, geom::scale(axial, g.normal));
      const double r = geom::norm(in_plane);
      const double profile = 1.0 - (r * r) / (r_in * r_in);
      const double mag = -(nu / r_in) * std::max(profile, 0.0);
      for (int c = 0; c < vs.dim; ++c)
        s.shape[vs.vel_dof(n, c)] = mag * g.normal[static_cast<std::size_t>(c)];
    }
    out.push_back(std::move(s));
  }
  return out;
}

double inlet_coefficient(double re, double t) {
  if (t <= 0.0) return 0.0;
  return re * (0.02 + 0.02 * std::sin(M_PI * t));
}

double inlet_reynolds(const Vec& mu, int i) {
  if (mu.size() == 0) throw Error("inlet_reynolds: empty parameter");
  return i < mu.size() ? mu[i] : mu[mu.size() - 1];
}

Vec lift_field(const std::vector<InletShape>& shapes, const Vec& mu,
               double t) {
  if (shapes.empty()) throw Error("lift_field: no inlet shapes");
  Vec out = Vec::Zero(shapes[0].shape.size());
  for (std::size_t i = 0; i < shapes.size(); ++i)
    out += inlet_coefficient(inlet_reynolds(mu, static_cast<int>(i)), t) *
           shapes[i].shape;
  return out;
}

Vec target_field(const fem::VectorSpaces& vs, double v_const) {
  const geom::Centerline& cl = vs.mesh->centerline;
  Vec vd = Vec::Zero(vs.n_vel());
  for (int n = 0; n < vs.n_scalar; ++n) {
    const geom::LocateResult loc =
        cl.locate(vs.node_xyz[static_cast<std::size_t>(n)]);
    const double profile =
        1.0 - (loc.dist * loc.dist) / (loc.radius * loc.radius);
    for (int c = 0; c < vs.dim; ++c)
      vd[vs.vel_dof(n, c)] =
          v_const * profile * loc.tangent[static_cast<std::size_t>(c)];
  }
  return vd;
}

}  // namespace ocflow::scen
