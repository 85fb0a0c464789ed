/// @file meshio.hpp
/// Plain-text mesh serialization.  The format is line-oriented:
///
///   OCPMESH1
///   dim <2|3>
///   vertices <N>
///   <x> <y> <z>                  (N lines, %.17g, bit-exact round trip)
///   cells <M>
///   <a> <b> <c> [<d>]            (M lines, vertex ids)
///   facets <K>
///   <tag> <v0> <v1> [<v2>]       (K lines)
///   branches <B>
///   <ax> <ay> <az> <bx> <by> <bz> <nbins>
///   <r0> ... <r_{nbins-1}>       (two lines per branch)
///   end
///
/// Malformed input is rejected with the failing line number.

#pragma once

#include "ocflow/geometry/mesh.hpp"

#include <string>

namespace ocflow::geom {

void save_mesh(const std::string& path, const Mesh& m);
Mesh load_mesh(const std::string& path);

std::string mesh_to_string(const Mesh& m);
Mesh mesh_from_string(const std::string& text, const std::string& origin);

}  // namespace ocflow::geom
