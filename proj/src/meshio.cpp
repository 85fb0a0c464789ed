#include "ocflow/geometry/meshio.hpp"

#include "ocflow/core/io.hpp"

#include <sstream>
#include <vector>

namespace ocflow::geom {

namespace {

struct LineReader {
  std::vector<std::string> lines;
  std::size_t next = 0;
  std::string origin;

  [[noreturn]] void fail(std::size_t line_no, const std::string& msg) const {
    std::ostringstream os;
    os << "mesh file " << origin << " line " << line_no << ": " << msg;
    throw Error(os.str());
  }

  /// Next non-empty line split into tokens; returns its 1-based number.
  std::size_t tokens(std::vector<std::string>& out, const std::string& expect) {
    while (next < lines.size()) {
      const std::string& raw = lines[next];
      ++next;
      out.clear();
      std::istringstream ss(raw);
      std::string tok;
      while (ss >> tok) out.push_back(tok);
      if (!out.empty()) return next;
    }
    fail(lines.size(), "unexpected end of file, expected " + expect);
  }
};

long long parse_id(const std::string& tok, const LineReader& r,
                   std::size_t line_no, const std::string& what) {
  try {
    return io::parse_int(tok, what);
  } catch (const Error& e) {
    r.fail(line_no, e.what());
  }
}

double parse_num(const std::string& tok, const LineReader& r,
                 std::size_t line_no, const std::string& what) {
  try {
    return io::parse_double(tok, what);
  } catch (const Error& e) {
    r.fail(line_no, e.what());
  }
}

}  // namespace

std::string mesh_to_string(const Mesh& m) {
  std::ostringstream os;
  os << "OCPMESH1\n";
  os << "dim " << m.dim << "\n";
  os << "vertices " << m.n_vertices() << "\n";
  for (const Point& p : m.vertices)
    os << io::format_double(p[0]) << ' ' << io::format_double(p[1]) << ' '
       << io::format_double(p[2]) << "\n";
  os << "cells " << m.n_cells() << "\n";
  const int nvc = m.vertices_per_cell();
  for (const auto& c : m.cells) {
    for (int i = 0; i < nvc; ++i) os << (i ? " " : "") << c[i];
    os << "\n";
  }
  os << "facets " << m.facets.size() << "\n";
  const int nvf = m.vertices_per_facet();
  for (const auto& f : m.facets) {
    os << f.tag;
    for (int i = 0; i < nvf; ++i) os << ' ' << f.v[i];
    os << "\n";
  }
  os << "branches " << m.centerline.branches.size() << "\n";
  for (const Branch& b : m.centerline.branches) {
    os << io::format_double(b.a[0]) << ' ' << io::format_double(b.a[1]) << ' '
       << io::format_double(b.a[2]) << ' ' << io::format_double(b.b[0]) << ' '
       << io::format_double(b.b[1]) << ' ' << io::format_double(b.b[2]) << ' '
       << b.radius_bins.size() << "\n";
    for (std::size_t i = 0; i < b.radius_bins.size(); ++i)
      os << (i ? " " : "") << io::format_double(b.radius_bins[i]);
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

Mesh mesh_from_string(const std::string& text, const std::string& origin) {
  LineReader r;
  r.origin = origin;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) r.lines.push_back(line);

  std::vector<std::string> t;
  std::size_t ln = r.tokens(t, "header");
  if (t.size() != 1 || t[0] != "OCPMESH1")
    r.fail(ln, "expected header 'OCPMESH1'");

  Mesh m;
  ln = r.tokens(t, "dim");
  if (t.size() != 2 || t[0] != "dim") r.fail(ln, "expected 'dim <2|3>'");
  m.dim = static_cast<int>(parse_id(t[1], r, ln, "dim"));
  if (m.dim != 2 && m.dim != 3) r.fail(ln, "dim must be 2 or 3");
  const int nvc = m.vertices_per_cell(), nvf = m.vertices_per_facet();

  ln = r.tokens(t, "vertices");
  if (t.size() != 2 || t[0] != "vertices")
    r.fail(ln, "expected 'vertices <count>'");
  const long long nv = parse_id(t[1], r, ln, "vertex count");
  if (nv < 0) r.fail(ln, "vertex count must be non-negative");
  m.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    ln = r.tokens(t, "vertex coordinates");
    if (t.size() != 3) r.fail(ln, "expected 3 vertex coordinates");
    m.vertices.push_back({parse_num(t[0], r, ln, "x"),
                          parse_num(t[1], r, ln, "y"),
                          parse_num(t[2], r, ln, "z")});
  }

  ln = r.tokens(t, "cells");
  if (t.size() != 2 || t[0] != "cells") r.fail(ln, "expected 'cells <count>'");
  const long long nc = parse_id(t[1], r, ln, "cell count");
  for (long long i = 0; i < nc; ++i) {
    ln = r.tokens(t, "cell vertex ids");
    if (static_cast<int>(t.size()) != nvc)
      r.fail(ln, "expected " + std::to_string(nvc) + " cell vertex ids");
    std::array<int, 4> c{-1, -1, -1, -1};
    for (int k = 0; k < nvc; ++k) {
      const long long id = parse_id(t[static_cast<std::size_t>(k)], r, ln, "vertex id");
      if (id < 0 || id >= nv) r.fail(ln, "vertex id out of range");
      c[k] = static_cast<int>(id);
    }
    m.cells.push_back(c);
  }

  ln = r.tokens(t, "facets");
  if (t.size() != 2 || t[0] != "facets")
    r.fail(ln, "expected 'facets <count>'");
  const long long nf = parse_id(t[1], r, ln, "facet count");
  for (long long i = 0; i < nf; ++i) {
    ln = r.tokens(t, "facet tag and vertex ids");
    if (static_cast<int>(t.size()) != 1 + nvf)
      r.fail(ln, "expected tag plus " + std::to_string(nvf) + " vertex ids");
    Facet f;
    f.tag = static_cast<int>(parse_id(t[0], r, ln, "facet tag"));
    for (int k = 0; k < nvf; ++k) {
      const long long id = parse_id(t[static_cast<std::size_t>(k + 1)], r, ln, "vertex id");
      if (id < 0 || id >= nv) r.fail(ln, "facet vertex id out of range");
      f.v[k] = static_cast<int>(id);
    }
    m.facets.push_back(f);
  }

  ln = r.tokens(t, "branches");
  if (t.size() != 2 || t[0] != "branches")
    r.fail(ln, "expected 'branches <count>'");
  const long long nb = parse_id(t[1], r, ln, "branch count");
  for (long long i = 0; i < nb; ++i) {
    ln = r.tokens(t, "branch endpoints");
    if (t.size() != 7) r.fail(ln, "expected 6 coordinates and a bin count");
    Branch b;
    for (int k = 0; k < 3; ++k) b.a[k] = parse_num(t[static_cast<std::size_t>(k)], r, ln, "ax");
    for (int k = 0; k < 3; ++k) b.b[k] = parse_num(t[static_cast<std::size_t>(k + 3)], r, ln, "bx");
    const long long nbins = parse_id(t[6], r, ln, "bin count");
    if (nbins <= 0) r.fail(ln, "bin count must be positive");
    ln = r.tokens(t, "radius bins");
    if (static_cast<long long>(t.size()) != nbins)
      r.fail(ln, "expected " + std::to_string(nbins) + " radius values");
    for (const auto& tok : t)
      b.radius_bins.push_back(parse_num(tok, r, ln, "radius"));
    m.centerline.branches.push_back(std::move(b));
  }

  ln = r.tokens(t, "'end'");
  if (t.size() != 1 || t[0] != "end") r.fail(ln, "expected 'end'");

  m.validate();
  return m;
}

void save_mesh(const std::string& path, const Mesh& m) {
  io::write_text_file(path, mesh_to_string(m));
}

Mesh load_mesh(const std::string& path) {
  return mesh_from_string(io::read_text_file(path), path);
}

}  // namespace ocflow::geom
