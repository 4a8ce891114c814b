#include "gzk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gzk/errors.hpp"

namespace gzk {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

}  // namespace

SpectralGrid::SpectralGrid(int n1, int n2, double l1, double l2)
    : n1_(n1), n2_(n2), l1_(l1), l2_(l2) {
  if (n1 < 16 || n2 < 16 || !is_power_of_two(n1) || !is_power_of_two(n2)) {
    throw InvalidArgument("grid sizes must be powers of two >= 16, got " +
                          std::to_string(n1) + "x" + std::to_string(n2));
  }
  if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
    throw InvalidArgument("box lengths must be positive and finite");
  }
}

double SpectralGrid::k1(int row) const noexcept {
  return 2.0 * std::numbers::pi * mode1(row) / l1_;
}

double SpectralGrid::k2(int col) const noexcept {
  return 2.0 * std::numbers::pi * mode2(col) / l2_;
}

bool RealField2D::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double RealField2D::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

RealField2D& RealField2D::operator+=(const RealField2D& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

RealField2D& RealField2D::operator-=(const RealField2D& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

RealField2D& RealField2D::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

RealField2D& RealField2D::axpy(double s, const RealField2D& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
  return *this;
}

RealField2D operator+(RealField2D a, const RealField2D& b) { return a += b; }
RealField2D operator-(RealField2D a, const RealField2D& b) { return a -= b; }
RealField2D operator*(double s, RealField2D a) { return a *= s; }

RealField2D pointwise_product(const RealField2D& a, const RealField2D& b) {
  require_same_grid(a.grid(), b.grid());
  RealField2D out(a.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

void ComplexSpectrum2D::zero_nyquist() noexcept {
  const int n1 = grid_.n1();
  const int nc = cols();
  const int ny = n1 / 2;
  for (int c = 0; c < nc; ++c) (*this)(ny, c) = 0.0;
  for (int r = 0; r < n1; ++r) (*this)(r, nc - 1) = 0.0;
}

}  // namespace gzk
