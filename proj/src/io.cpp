#include "ocflow/core/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ocflow::io {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("read error on file: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + tmp);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write error on file: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " to " + path + ": " +
                      ec.message());
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw Error("cannot create directory " + path + ": " + ec.message());
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return fs::exists(path, ec);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0') || errno == ERANGE)
    throw Error(what + ": cannot parse '" + text + "' as a number");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 10);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0') || errno == ERANGE)
    throw Error(what + ": cannot parse '" + text + "' as an integer");
  return v;
}

namespace {

constexpr char kMagic[8] = {'O', 'C', 'P', 'R', 'O', 'M', '1', '\n'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

struct Cursor {
  const unsigned char* p;
  std::size_t left;
  std::string path;
  void need(std::size_t n) const {
    if (left < n) throw Error("truncated matrix file: " + path);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    p += 4;
    left -= 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    p += 8;
    left -= 8;
    return v;
  }
};

static_assert(sizeof(double) == 8, "binary format assumes 8-byte doubles");

}  // namespace

std::string serialize_matrix_bundle(const MatrixBundle& bundle) {
  std::string body;
  put_u64(body, bundle.size());
  for (const auto& [name, m] : bundle) {
    linalg::require_finite(m, "matrix bundle entry '" + name + "'");
    put_u32(body, static_cast<std::uint32_t>(name.size()));
    body.append(name);
    put_u64(body, static_cast<std::uint64_t>(m.rows()));
    put_u64(body, static_cast<std::uint64_t>(m.cols()));
    const std::size_t bytes = sizeof(double) * m.size();
    if (bytes) {
      const std::size_t pos = body.size();
      body.resize(pos + bytes);
      std::memcpy(body.data() + pos, m.data(), bytes);
    }
  }
  std::string out(kMagic, sizeof kMagic);
  out += body;
  put_u64(out, linalg::fnv1a64(body.data(), body.size()));
  return out;
}

void write_matrix_bundle(const std::string& path, const MatrixBundle& bundle) {
  write_text_file(path, serialize_matrix_bundle(bundle));
}

MatrixBundle parse_matrix_bundle(const std::string& raw,
                                 const std::string& path) {
  if (raw.size() < sizeof kMagic + 16 ||
      std::memcmp(raw.data(), kMagic, sizeof kMagic) != 0)
    throw Error("not a matrix bundle (bad magic): " + path);

  const std::size_t body_len = raw.size() - sizeof kMagic - 8;
  const char* body = raw.data() + sizeof kMagic;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= std::uint64_t(
                  static_cast<unsigned char>(raw[sizeof kMagic + body_len + i]))
              << (8 * i);
  if (linalg::fnv1a64(body, body_len) != stored)
    throw Error("matrix bundle checksum mismatch (file corrupt): " + path);

  Cursor c{reinterpret_cast<const unsigned char*>(body), body_len, path};
  const std::uint64_t n = c.u64();
  MatrixBundle bundle;
  bundle.reserve(n);
  for (std::uint64_t e = 0; e < n; ++e) {
    const std::uint32_t name_len = c.u32();
    c.need(name_len);
    std::string name(reinterpret_cast<const char*>(c.p), name_len);
    c.p += name_len;
    c.left -= name_len;
    const std::uint64_t rows = c.u64();
    const std::uint64_t cols = c.u64();
    if (rows > (1u << 28) || cols > (1u << 28))
      throw Error("matrix bundle entry '" + name + "' has absurd shape in " +
                  path);
    const std::size_t bytes = sizeof(double) * rows * cols;
    c.need(bytes);
    Mat m(rows, cols);
    if (bytes) std::memcpy(m.data(), c.p, bytes);
    c.p += bytes;
    c.left -= bytes;
    bundle.emplace_back(std::move(name), std::move(m));
  }
  return bundle;
}

MatrixBundle read_matrix_bundle(const std::string& path) {
  return parse_matrix_bundle(read_text_file(path), path);
}

Mat split_u64(std::uint64_t v) {
  Mat m(1, 2);
  m(0, 0) = static_cast<double>(v & 0xffffffffull);
  m(0, 1) = static_cast<double>(v >> 32);
  return m;
}

std::uint64_t join_u64(const Mat& m, const std::string& what) {
  if (m.rows() != 1 || m.cols() != 2)
    throw Error(what + ": malformed fingerprint entry");
  return static_cast<std::uint64_t>(m(0, 0)) |
         (static_cast<std::uint64_t>(m(0, 1)) << 32);
}

std::map<std::string, Mat> bundle_as_map(const MatrixBundle& bundle) {
  std::map<std::string, Mat> m;
  for (const auto& [name, mat] : bundle)
    if (!m.emplace(name, mat).second)
      throw Error("matrix bundle has duplicate entry '" + name + "'");
  return m;
}

const Mat& bundle_get(const std::map<std::string, Mat>& m,
                      const std::string& name, const std::string& context) {
  auto it = m.find(name);
  if (it == m.end())
    throw Error(context + ": missing required entry '" + name + "'");
  return it->second;
}

}  // namespace ocflow::io
