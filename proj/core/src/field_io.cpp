#include "gzk/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "gzk/errors.hpp"

namespace gzk {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw IoError("truncated field snapshot");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_field(std::ostream& out, const RealField2D& f) {
  const SpectralGrid& g = f.grid();
  out.write("GZKF", 4);
  put<std::uint32_t>(out, kFieldFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n1()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n2()));
  put<double>(out, g.l1());
  put<double>(out, g.l2());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
  } else {
    for (double v : f.values()) put<double>(out, v);
  }
  if (!out) throw IoError("failed writing field snapshot");
}

RealField2D read_field(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GZKF", 4) != 0)
    throw IoError("not a GZKF field snapshot");
  const auto version = get<std::uint32_t>(in);
  if (version != kFieldFormatVersion)
    throw IoError("unsupported GZKF version " + std::to_string(version));
  const auto n1 = get<std::uint32_t>(in);
  const auto n2 = get<std::uint32_t>(in);
  const auto l1 = get<double>(in);
  const auto l2 = get<double>(in);
  if (n1 > 65536 || n2 > 65536) throw IoError("GZKF header declares an implausible grid");
  RealField2D f(SpectralGrid(static_cast<int>(n1), static_cast<int>(n2), l1, l2));
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(f.data()),
                 static_cast<std::streamsize>(f.size() * sizeof(double))))
      throw IoError("truncated field snapshot");
  } else {
    for (auto& v : f.values()) v = get<double>(in);
  }
  return f;
}

void save_field(const std::filesystem::path& path, const RealField2D& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_field(out, f);
}

RealField2D load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_field(in);
}

}  // namespace gzk
