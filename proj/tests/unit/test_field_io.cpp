#include <cstring>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "gzk/errors.hpp"
#include "gzk/field_io.hpp"

using namespace gzk;

namespace {

RealField2D sample_field() {
  const SpectralGrid g(32, 64, 7.5, 11.25);
  return RealField2D::sample(g, [](double x, double y) { return std::sin(x) * y + 1e-300 * x; });
}

}  // namespace

TEST_CASE("stream round trip is bit exact") {
  const RealField2D f = sample_field();
  std::stringstream ss;
  write_field(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 8 + f.size() * 8);
  CHECK(bytes.substr(0, 4) == "GZKF");
  const RealField2D g = read_field(ss);
  CHECK(g.grid() == f.grid());
  CHECK(std::memcmp(g.data(), f.data(), f.size() * sizeof(double)) == 0);
}

TEST_CASE("header fields are little-endian at fixed offsets") {
  std::stringstream ss;
  write_field(ss, sample_field());
  const std::string b = ss.str();
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(b[off + k]);
    return v;
  };
  CHECK(u32(4) == kFieldFormatVersion);
  CHECK(u32(8) == 32);
  CHECK(u32(12) == 64);
}

TEST_CASE("corrupt snapshots are rejected") {
  std::stringstream ss;
  write_field(ss, sample_field());
  const std::string good = ss.str();

  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    std::stringstream in(b);
    CHECK_THROWS_AS(read_field(in), IoError);
  }
  SUBCASE("unknown version") {
    std::string b = good;
    b[4] = 9;
    std::stringstream in(b);
    CHECK_THROWS_AS(read_field(in), IoError);
  }
  SUBCASE("truncated payload") {
    std::stringstream in(good.substr(0, good.size() - 8));
    CHECK_THROWS_AS(read_field(in), IoError);
  }
  SUBCASE("implausible grid") {
    std::string b = good;
    b[11] = 0x7f;
    std::stringstream in(b);
    CHECK_THROWS_AS(read_field(in), IoError);
  }
  SUBCASE("invalid grid size") {
    std::string b = good;
    b[8] = 3;
    std::stringstream in(b);
    CHECK_THROWS_AS(read_field(in), InvalidArgument);
  }
}

TEST_CASE("file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "gzk_field_io_test.gzkf";
  const RealField2D f = sample_field();
  save_field(path, f);
  const RealField2D g = load_field(path);
  CHECK(std::memcmp(g.data(), f.data(), f.size() * sizeof(double)) == 0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_field(path), IoError);
}
