#pragma once

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <span>
#include <vector>

namespace gzk {

/// 64-byte aligned allocator so FFTW plans made on one buffer can run SIMD
/// kernels on any other buffer of the same shape.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + kAlignment - 1) / kAlignment) * kAlignment;
    if (bytes == 0) bytes = kAlignment;
    void* p = std::aligned_alloc(kAlignment, bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

using Complex = std::complex<double>;

/// Uniform periodic grid on [-L1/2, L1/2) x [-L2/2, L2/2).
///
/// Axis 1 is the propagation direction x1 and is the slow (row) index of
/// every sample array; axis 2 is contiguous. Angular wavenumbers are
/// k = 2*pi*m/L with m in [-N/2, N/2); the single m = -N/2 entry is the
/// Nyquist mode.
class SpectralGrid {
 public:
  SpectralGrid() = default;
  /// Throws InvalidArgument unless N1, N2 are powers of two >= 16 and L1, L2 > 0.
  SpectralGrid(int n1, int n2, double l1, double l2);
  /// Square grid shorthand.
  SpectralGrid(int n, double l) : SpectralGrid(n, n, l, l) {}

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  double l1() const noexcept { return l1_; }
  double l2() const noexcept { return l2_; }
  double h1() const noexcept { return l1_ / n1_; }
  double h2() const noexcept { return l2_ / n2_; }
  double cell_area() const noexcept { return h1() * h2(); }
  double area() const noexcept { return l1_ * l2_; }

  std::size_t size() const noexcept { return static_cast<std::size_t>(n1_) * n2_; }
  /// Columns of the half (r2c) spectrum.
  int spectral_cols() const noexcept { return n2_ / 2 + 1; }
  std::size_t spectral_size() const noexcept {
    return static_cast<std::size_t>(n1_) * spectral_cols();
  }

  double x1(int i1) const noexcept { return -0.5 * l1_ + i1 * h1(); }
  double x2(int i2) const noexcept { return -0.5 * l2_ + i2 * h2(); }
  std::size_t index(int i1, int i2) const noexcept {
    return static_cast<std::size_t>(i1) * n2_ + i2;
  }

  /// Signed integer mode for a row of the half spectrum.
  int mode1(int row) const noexcept { return row < n1_ / 2 ? row : row - n1_; }
  /// Signed integer mode for a column of the half spectrum (always >= 0).
  int mode2(int col) const noexcept { return col; }
  double k1(int row) const noexcept;
  double k2(int col) const noexcept;
  bool nyquist1(int row) const noexcept { return row == n1_ / 2; }
  bool nyquist2(int col) const noexcept { return col == n2_ / 2; }

  bool operator==(const SpectralGrid& o) const noexcept {
    return n1_ == o.n1_ && n2_ == o.n2_ && l1_ == o.l1_ && l2_ == o.l2_;
  }

 private:
  int n1_ = 0;
  int n2_ = 0;
  double l1_ = 0.0;
  double l2_ = 0.0;
};

/// Real samples of a function on a SpectralGrid, row-major with index i1*N2 + i2.
class RealField2D {
 public:
  RealField2D() = default;
  explicit RealField2D(const SpectralGrid& grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}

  /// Samples f(x1, x2) at every node.
  template <class F>
  static RealField2D sample(const SpectralGrid& grid, F&& f) {
    RealField2D out(grid);
    for (int i = 0; i < grid.n1(); ++i) {
      const double x1 = grid.x1(i);
      for (int j = 0; j < grid.n2(); ++j) out(i, j) = f(x1, grid.x2(j));
    }
    return out;
  }

  const SpectralGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double& operator()(int i1, int i2) noexcept { return values_[grid_.index(i1, i2)]; }
  double operator()(int i1, int i2) const noexcept { return values_[grid_.index(i1, i2)]; }
  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  RealField2D& operator+=(const RealField2D& o);
  RealField2D& operator-=(const RealField2D& o);
  RealField2D& operator*=(double s) noexcept;
  /// this += s * o
  RealField2D& axpy(double s, const RealField2D& o);

 private:
  SpectralGrid grid_;
  AlignedVector<double> values_;
};

RealField2D operator+(RealField2D a, const RealField2D& b);
RealField2D operator-(RealField2D a, const RealField2D& b);
RealField2D operator*(double s, RealField2D a);
/// Pointwise (collocation) product. Use dealiased_product for Galerkin products.
RealField2D pointwise_product(const RealField2D& a, const RealField2D& b);

/// Half (r2c) spectrum: N1 rows by N2/2+1 columns of Fourier coefficients.
///
/// Normalisation: f(x) = sum_k c_k exp(i k.x), c_k = (1/(N1 N2)) sum_x f(x) exp(-i k.x).
/// With this convention integrate(f^2) = L1 L2 sum_k |c_k|^2 over the full spectrum.
class ComplexSpectrum2D {
 public:
  ComplexSpectrum2D() = default;
  explicit ComplexSpectrum2D(const SpectralGrid& grid)
      : grid_(grid), coeffs_(grid.spectral_size(), Complex(0.0, 0.0)) {}

  const SpectralGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  int cols() const noexcept { return grid_.spectral_cols(); }
  Complex* data() noexcept { return coeffs_.data(); }
  const Complex* data() const noexcept { return coeffs_.data(); }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }

  Complex& operator()(int row, int col) noexcept {
    return coeffs_[static_cast<std::size_t>(row) * cols() + col];
  }
  Complex operator()(int row, int col) const noexcept {
    return coeffs_[static_cast<std::size_t>(row) * cols() + col];
  }
  Complex& operator[](std::size_t k) noexcept { return coeffs_[k]; }
  Complex operator[](std::size_t k) const noexcept { return coeffs_[k]; }

  /// Zero the Nyquist row and column.
  void zero_nyquist() noexcept;

 private:
  SpectralGrid grid_;
  AlignedVector<Complex> coeffs_;
};

/// Multiplicity of a half-spectrum column in the full spectrum (1 or 2).
inline double hermitian_weight(const SpectralGrid& g, int col) noexcept {
  return (col == 0 || col == g.n2() / 2) ? 1.0 : 2.0;
}

}  // namespace gzk
