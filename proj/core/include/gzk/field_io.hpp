#pragma once

#include <filesystem>
#include <iosfwd>

#include "gzk/grid.hpp"

namespace gzk {

/// Field snapshot format: "GZKF", u32 version (1), u32 N1, u32 N2, f64 L1,
/// f64 L2, then N1*N2 f64 samples, row-major (index i1*N2 + i2). All
/// little-endian.
inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field(std::ostream& out, const RealField2D& f);
RealField2D read_field(std::istream& in);

void save_field(const std::filesystem::path& path, const RealField2D& f);
RealField2D load_field(const std::filesystem::path& path);

}  // namespace gzk
