#include "doctest.h"

#include "ocflow/core/io.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

using namespace ocflow;

namespace {

/// Fresh scratch directory per test case, removed on destruction.
struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("ocflow_io_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string operator/(const std::string& name) const {
    return (dir / name).string();
  }
};

}  // namespace

TEST_CASE("text files round trip, including embedded newlines") {
  TempDir tmp;
  const std::string path = tmp / "note.txt";
  const std::string body = "line one\nline two\n\ttabbed\n";
  io::write_text_file(path, body);
  CHECK(io::read_text_file(path) == body);
  CHECK(io::file_exists(path));
  CHECK_FALSE(io::file_exists(tmp / "absent.txt"));
}

TEST_CASE("reading a missing file names the path") {
  try {
    io::read_text_file("/nonexistent/really/not/here.txt");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("here.txt") != std::string::npos);
  }
}

TEST_CASE("directory creation is recursive and idempotent") {
  TempDir tmp;
  const std::string nested = tmp / "a/b/c";
  io::ensure_dir(nested);
  io::ensure_dir(nested);
  CHECK(std::filesystem::is_directory(nested));
}

TEST_CASE("format_double round trips doubles exactly") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    double v;
    const std::uint64_t bits = gen();
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(io::parse_double(io::format_double(v), "test") == v);
  }
  CHECK(io::parse_double(io::format_double(0.1), "test") == 0.1);
  CHECK(io::parse_double("1e-300", "test") == 1e-300);
}

TEST_CASE("strict parsers reject junk") {
  CHECK_THROWS_AS(io::parse_double("1.5x", "test"), Error);
  CHECK_THROWS_AS(io::parse_double("", "test"), Error);
  CHECK_THROWS_AS(io::parse_int("12.5", "test"), Error);
  CHECK(io::parse_int("-42", "test") == -42);
}

TEST_CASE("matrix bundles round trip bit-exactly") {
  TempDir tmp;
  std::mt19937 gen(17);
  std::normal_distribution<double> dist;
  Mat a(7, 3), b(1, 1);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 7; ++i) a(i, j) = dist(gen);
  b(0, 0) = -0.1 + 1e-17;
  const io::MatrixBundle bundle{{"alpha", a}, {"beta", b}, {"empty", Mat()}};
  const std::string path = tmp / "bundle.bin";
  io::write_matrix_bundle(path, bundle);
  const io::MatrixBundle back = io::read_matrix_bundle(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].first == "alpha");
  CHECK(back[0].second == a);  // element-wise bit-exact
  CHECK(back[1].second(0, 0) == b(0, 0));
  CHECK(back[2].second.rows() == 0);
  CHECK(back[2].second.cols() == 0);
}

TEST_CASE("bundle reader rejects a truncated or corrupted file") {
  TempDir tmp;
  const std::string path = tmp / "bundle.bin";
  io::write_matrix_bundle(path, {{"m", Mat::Ones(4, 4)}});
  std::string bytes = io::read_text_file(path);

  SUBCASE("bad magic") {
    bytes[0] = 'X';
    io::write_text_file(path, bytes);
    CHECK_THROWS_AS(io::read_matrix_bundle(path), Error);
  }
  SUBCASE("flipped payload byte breaks the checksum") {
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    io::write_text_file(path, bytes);
    CHECK_THROWS_AS(io::read_matrix_bundle(path), Error);
  }
  SUBCASE("truncation") {
    io::write_text_file(path, bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_AS(io::read_matrix_bundle(path), Error);
  }
}

TEST_CASE("bundle map view fetches by name and rejects duplicates") {
  const io::MatrixBundle bundle{{"one", Mat::Ones(2, 2)},
                                {"two", Mat::Zero(1, 3)}};
  const auto map = io::bundle_as_map(bundle);
  CHECK(io::bundle_get(map, "one", "ctx")(0, 0) == 1.0);
  CHECK_THROWS_AS(io::bundle_get(map, "three", "ctx"), Error);
  const io::MatrixBundle dup{{"x", Mat()}, {"x", Mat()}};
  CHECK_THROWS_AS(io::bundle_as_map(dup), Error);
}

TEST_CASE("64-bit fingerprints survive the double-matrix detour") {
  for (std::uint64_t v :
       {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{0xdeadbeefcafef00d},
        std::numeric_limits<std::uint64_t>::max(),
        std::uint64_t{14695981039346656037ull}}) {
    const Mat m = io::split_u64(v);
    REQUIRE(m.rows() == 1);
    REQUIRE(m.cols() == 2);
    CHECK(io::join_u64(m, "test") == v);
  }
  CHECK_THROWS_AS(io::join_u64(Mat::Zero(2, 2), "test"), Error);
}

TEST_CASE("atomic writes never leave a half-written target behind") {
  TempDir tmp;
  const std::string path = tmp / "state.txt";
  io::write_text_file(path, "first");
  io::write_text_file(path, "second");
  CHECK(io::read_text_file(path) == "second");
  // No stray temporaries in the directory.
  int entries = 0;
  for (const auto& de : std::filesystem::directory_iterator(tmp.dir)) {
    (void)de;
    ++entries;
  }
  CHECK(entries == 1);
}
