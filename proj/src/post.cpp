#include "ocflow/post/post.hpp"

#include "ocflow/core/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ocflow::post {

namespace {

double quad_form(const SpMat& m, const Vec& x) {
  if (x.size() == 0) return 0.0;
  return x.dot(m * x);
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k)
    acc += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
  return acc;
}

Vec field_or_zero(const Vec& x, int n) {
  if (x.size() == n) return x;
  if (x.size() == 0) return Vec::Zero(n);
  throw Error("error_norms: field length mismatch between trajectories");
}

ErrorSeries series_for(const fom::Trajectory& a, const fom::Trajectory& b,
                       Vec fom::FlowFields::* field, const SpMat* x,
                       const std::vector<double>& times) {
  const int n_t = static_cast<int>(times.size());
  ErrorSeries out;
  out.abs.assign(n_t, 0.0);
  out.rel.assign(n_t, 0.0);

  int n = 0;
  for (int k = 0; k < n_t; ++k) {
    n = std::max(n, static_cast<int>((a.states[k].*field).size()));
    n = std::max(n, static_cast<int>((b.states[k].*field).size()));
  }
  if (n == 0) return out;  // absent on both sides everywhere
  if (x && (x->rows() != n || x->cols() != n))
    throw Error("error_norms: inner-product matrix shape mismatch");

  std::vector<double> abs2(n_t), ref2(n_t), ref(n_t);
  double ref_max = 0.0;
  for (int k = 0; k < n_t; ++k) {
    const Vec ak = field_or_zero(a.states[k].*field, n);
    const Vec bk = field_or_zero(b.states[k].*field, n);
    const Vec d = ak - bk;
    abs2[k] = x ? quad_form(*x, d) : d.squaredNorm();
    ref2[k] = x ? quad_form(*x, bk) : bk.squaredNorm();
    abs2[k] = std::max(abs2[k], 0.0);
    ref2[k] = std::max(ref2[k], 0.0);
    out.abs[k] = std::sqrt(abs2[k]);
    ref[k] = std::sqrt(ref2[k]);
    ref_max = std::max(ref_max, ref[k]);
  }
  const double floor = std::max(ref_max * 1e-14, 1e-300);
  for (int k = 0; k < n_t; ++k)
    out.rel[k] = out.abs[k] / std::max(ref[k], floor);
  const double num = trapezoid(times, abs2);
  const double den = trapezoid(times, ref2);
  out.rel_time_avg = std::sqrt(num / std::max(den, 1e-300));
  return out;
}

}  // namespace

CostReport cost_functional(const fom::Trajectory& traj, const SpMat& md,
                           const SpMat& r, double alpha, const Vec& vd) {
  const int n_t = traj.n_stored();
  if (n_t != static_cast<int>(traj.times.size()))
    throw Error("cost_functional: stored state and time counts differ");
  CostReport rep;
  rep.times = traj.times;
  rep.tracking_series.resize(n_t);
  rep.penalty_series.resize(n_t);
  for (int k = 0; k < n_t; ++k) {
    const Vec& v = traj.states[k].v;
    if (v.size() != vd.size())
      throw Error("cost_functional: velocity/target length mismatch");
    const Vec d = v - vd;
    rep.tracking_series[k] = 0.5 * quad_form(md, d);
    rep.penalty_series[k] = 0.5 * alpha * quad_form(r, traj.states[k].u);
  }
  rep.tracking = trapezoid(rep.times, rep.tracking_series);
  rep.penalty = trapezoid(rep.times, rep.penalty_series);
  rep.total = rep.tracking + rep.penalty;
  return rep;
}

ErrorReport error_norms(const fom::Trajectory& a, const fom::Trajectory& b,
                        const SpMat* xv, const SpMat* xp, const SpMat* xu) {
  if (a.n_stored() != b.n_stored())
    throw Error("error_norms: trajectories store different time counts");
  const int n_t = a.n_stored();
  for (int k = 0; k < n_t; ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-9)
      throw Error("error_norms: trajectories live on different time grids");

  ErrorReport rep;
  rep.times = a.times;
  rep.v = series_for(a, b, &fom::FlowFields::v, xv, rep.times);
  rep.p = series_for(a, b, &fom::FlowFields::p, xp, rep.times);
  rep.u = series_for(a, b, &fom::FlowFields::u, xu, rep.times);
  rep.w = series_for(a, b, &fom::FlowFields::w, xv, rep.times);
  rep.q = series_for(a, b, &fom::FlowFields::q, xp, rep.times);
  return rep;
}

std::vector<WssSample> wall_shear(const fem::VectorSpaces& vs, const Vec& v,
                                  double nu) {
  if (v.size() != vs.n_vel())
    throw Error("wall_shear: velocity length mismatch");
  std::vector<WssSample> out;
  const geom::Mesh& mesh = *vs.mesh;
  for (int fi = 0; fi < static_cast<int>(vs.facets.size()); ++fi) {
    const fem::FacetInfo& info = vs.facets[fi];
    if (info.tag != geom::kWall) continue;
    const fem::FacetGradients fg = fem::facet_velocity_gradients(vs, fi, v);
    const int dim = vs.dim;
    double acc = 0.0;
    for (std::size_t q = 0; q < fg.grad.size(); ++q) {
      const Mat& g = fg.grad[q];
      Vec traction = Vec::Zero(dim);
      for (int c = 0; c < dim; ++c)
        for (int d = 0; d < dim; ++d)
          traction[c] += nu * (g(c, d) + g(d, c)) * info.normal[d];
      double tn = 0.0;
      for (int c = 0; c < dim; ++c) tn += traction[c] * info.normal[c];
      double tang2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double tc = traction[c] - tn * info.normal[c];
        tang2 += tc * tc;
      }
      acc += fg.weight[q] * std::sqrt(tang2);
    }
    WssSample s;
    s.facet = fi;
    s.centroid = mesh.facet_centroid(mesh.facets[fi]);
    s.measure = info.measure;
    s.tau = acc / info.measure;
    out.push_back(s);
  }
  if (out.empty()) throw Error("wall_shear: mesh has no wall facets");
  return out;
}

double mirror_asymmetry(const fem::VectorSpaces& vs,
                        const std::vector<WssSample>& samples) {
  const geom::Mesh& mesh = *vs.mesh;
  using Key = std::vector<geom::Point>;
  auto facet_key = [&](int fi, bool mirrored) {
    const geom::Facet& f = mesh.facets[fi];
    Key key;
    for (int j = 0; j < mesh.vertices_per_facet(); ++j) {
      geom::Point p = mesh.vertices[f.v[j]];
      if (mirrored) p[1] = -p[1];
      key.push_back(p);
    }
    std::sort(key.begin(), key.end());
    return key;
  };

  std::map<Key, int> sample_of_key;  // wall facet key -> sample index
  for (std::size_t i = 0; i < samples.size(); ++i)
    sample_of_key[facet_key(samples[i].facet, false)] =
        static_cast<int>(i);

  double num = 0.0, den = 0.0;
  for (const WssSample& s : samples) {
    const auto it = sample_of_key.find(facet_key(s.facet, true));
    if (it == sample_of_key.end())
      throw Error("mirror_asymmetry: wall facet has no mirror partner");
    const double diff = s.tau - samples[it->second].tau;
    num += diff * diff * s.measure;
    den += s.tau * s.tau * s.measure;
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

void write_cost_csv(const std::string& path, const CostReport& report,
                    const std::vector<std::string>& header) {
  std::ostringstream os;
  for (const std::string& h : header) os << "# " << h << "\n";
  os << "# total=" << io::format_double(report.total)
     << " tracking=" << io::format_double(report.tracking)
     << " penalty=" << io::format_double(report.penalty) << "\n";
  os << "time,tracking,penalty\n";
  for (std::size_t k = 0; k < report.times.size(); ++k)
    os << io::format_double(report.times[k]) << ','
       << io::format_double(report.tracking_series[k]) << ','
       << io::format_double(report.penalty_series[k]) << "\n";
  io::write_text_file(path, os.str());
}

void write_error_csv(const std::string& path, const ErrorReport& report,
                     const std::vector<std::string>& header) {
  std::ostringstream os;
  for (const std::string& h : header) os << "# " << h << "\n";
  os << "# rel_time_avg v=" << io::format_double(report.v.rel_time_avg)
     << " p=" << io::format_double(report.p.rel_time_avg)
     << " u=" << io::format_double(report.u.rel_time_avg)
     << " w=" << io::format_double(report.w.rel_time_avg)
     << " q=" << io::format_double(report.q.rel_time_avg) << "\n";
  os << "time,v_abs,v_rel,p_abs,p_rel,u_abs,u_rel,w_abs,w_rel,q_abs,q_rel\n";
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    os << io::format_double(report.times[k]);
    for (const ErrorSeries* s : {&report.v, &report.p, &report.u, &report.w,
                                 &report.q})
      os << ',' << io::format_double(s->abs[k]) << ','
         << io::format_double(s->rel[k]);
    os << "\n";
  }
  io::write_text_file(path, os.str());
}

void write_wss_csv(const std::string& path,
                   const std::vector<WssSample>& samples,
                   const std::vector<std::string>& header) {
  std::ostringstream os;
  for (const std::string& h : header) os << "# " << h << "\n";
  os << "facet,x,y,z,measure,tau\n";
  for (const WssSample& s : samples)
    os << s.facet << ',' << io::format_double(s.centroid[0]) << ','
       << io::format_double(s.centroid[1]) << ','
       << io::format_double(s.centroid[2]) << ','
       << io::format_double(s.measure) << ',' << io::format_double(s.tau)
       << "\n";
  io::write_text_file(path, os.str());
}

}  // namespace ocflow::post
