/// @file io.hpp
/// File I/O primitives: text helpers plus a checksummed binary container for
/// named dense matrices (bases, trajectories, reduced operators).
///
/// Binary layout ("OCPROM1"):
///   8 bytes   magic "OCPROM1\n"
///   u64       number of entries
///   entry *   u32 name length, name bytes, u64 rows, u64 cols,
///             rows*cols little-endian doubles (column-major)
///   u64       FNV-1a checksum of everything after the magic
/// Readers verify magic and checksum and report the offending path.

#pragma once

#include "ocflow/core/linalg.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ocflow::io {

/// Reads a whole file; throws ocflow::Error (with path) when unreadable.
std::string read_text_file(const std::string& path);

/// Writes a whole file atomically (temp file + rename); throws on failure.
void write_text_file(const std::string& path, const std::string& content);

/// Creates a directory (and parents) if missing.
void ensure_dir(const std::string& path);

bool file_exists(const std::string& path);

/// Round-trip decimal form of a double (printf %.17g).
std::string format_double(double v);

/// Strict double parse; throws ocflow::Error naming `what` on junk input.
double parse_double(const std::string& text, const std::string& what);

/// Strict integer parse (base 10).
long long parse_int(const std::string& text, const std::string& what);

/// Named dense matrices, ordered as written.
using MatrixBundle = std::vector<std::pair<std::string, Mat>>;

void write_matrix_bundle(const std::string& path, const MatrixBundle& bundle);

/// Loads a bundle; verifies magic and checksum.
MatrixBundle read_matrix_bundle(const std::string& path);

/// In-memory forms of the same container.
std::string serialize_matrix_bundle(const MatrixBundle& bundle);
MatrixBundle parse_matrix_bundle(const std::string& bytes,
                                 const std::string& origin);

/// 64-bit fingerprints ride inside bundles as 1x2 matrices holding the low
/// and high 32-bit halves (both exactly representable as doubles).
Mat split_u64(std::uint64_t v);
std::uint64_t join_u64(const Mat& m, const std::string& what);

/// Map view of a bundle; duplicate names are rejected.
std::map<std::string, Mat> bundle_as_map(const MatrixBundle& bundle);

/// Fetches one entry or throws naming the missing entry and path context.
const Mat& bundle_get(const std::map<std::string, Mat>& m,
                      const std::string& name, const std::string& context);

}  // namespace ocflow::io
