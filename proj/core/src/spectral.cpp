#include "gzk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gzk/errors.hpp"
#include "gzk/fft.hpp"

namespace gzk {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

// Scratch storage for padded transforms, reused per thread to avoid
// mapping fresh pages on every nonlinear evaluation.
struct PaddedScratch {
  AlignedVector<double> real;
  AlignedVector<Complex> spec;
  std::vector<AlignedVector<double>> extra_real;
};

PaddedScratch& scratch() {
  thread_local PaddedScratch s;
  return s;
}

// Copy the |m| < N/2 band of `spec` into an M1 x (M2/2+1) zeroed half spectrum.
void pad_spectrum(const ComplexSpectrum2D& spec, int m1, int m2, AlignedVector<Complex>& out) {
  const SpectralGrid& g = spec.grid();
  const int mc = m2 / 2 + 1;
  out.assign(static_cast<std::size_t>(m1) * mc, Complex(0.0, 0.0));
  const int half1 = g.n1() / 2;
  const int ncols = g.n2() / 2;  // columns 0 .. N2/2 - 1 (Nyquist dropped)
  for (int r = 0; r < g.n1(); ++r) {
    if (r == half1) continue;
    const int m = g.mode1(r);
    const int pr = m >= 0 ? m : m1 + m;
    const Complex* src = spec.data() + static_cast<std::size_t>(r) * spec.cols();
    Complex* dst = out.data() + static_cast<std::size_t>(pr) * mc;
    std::copy(src, src + ncols, dst);
  }
}

// Truncate an M1 x (M2/2+1) unnormalised spectrum back into the N band.
ComplexSpectrum2D truncate_spectrum(const AlignedVector<Complex>& padded, int m1, int m2,
                                    const SpectralGrid& g) {
  ComplexSpectrum2D out(g);
  const int mc = m2 / 2 + 1;
  const double scale = 1.0 / (static_cast<double>(m1) * m2);
  const int half1 = g.n1() / 2;
  const int ncols = g.n2() / 2;
  for (int r = 0; r < g.n1(); ++r) {
    if (r == half1) continue;
    const int m = g.mode1(r);
    const int pr = m >= 0 ? m : m1 + m;
    const Complex* src = padded.data() + static_cast<std::size_t>(pr) * mc;
    Complex* dst = out.data() + static_cast<std::size_t>(r) * out.cols();
    for (int c = 0; c < ncols; ++c) dst[c] = src[c] * scale;
  }
  return out;
}

void check_padding(int m1, int m2, const DealiasOptions& opts) {
  const std::size_t samples = static_cast<std::size_t>(m1) * m2;
  if (samples > opts.max_padded_samples) {
    throw InvalidArgument("dealiasing needs a " + std::to_string(m1) + "x" + std::to_string(m2) +
                          " padded grid (" + std::to_string(samples) +
                          " samples), above the configured cap of " +
                          std::to_string(opts.max_padded_samples));
  }
}

// Periodic trigonometric-interpolation basis for even N (Nyquist as cosine).
double cardinal(int n, double theta) {
  const double s = std::sin(0.5 * theta);
  if (std::abs(s) < 1e-14) {
    // theta at a multiple of 2 pi: the basis equals cos(N theta / 2) there.
    return std::cos(0.5 * n * theta) >= 0.0 ? 1.0 : -1.0;
  }
  return std::sin(0.5 * n * theta) * std::cos(0.5 * theta) / (n * s);
}

// rows: targets, cols: nodes.
std::vector<double> interpolation_matrix(int n, double length, double scale) {
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  const double h = length / n;
  const double lo = -0.5 * length;
  const double hi = 0.5 * length;
  for (int i = 0; i < n; ++i) {
    double target = std::clamp(scale * (lo + i * h), lo, hi);
    for (int j = 0; j < n; ++j) {
      const double theta = 2.0 * kPi * (target - (lo + j * h)) / length;
      a[static_cast<std::size_t>(i) * n + j] = cardinal(n, theta);
    }
  }
  return a;
}

}  // namespace

ComplexSpectrum2D transform_forward(const RealField2D& f) {
  if (!f.all_finite()) throw NonFiniteValue("transform_forward: non-finite sample");
  const SpectralGrid& g = f.grid();
  ComplexSpectrum2D out(g);
  fft::r2c(g.n1(), g.n2(), f.data(), out.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& c : out.coeffs()) c *= scale;
  return out;
}

RealField2D transform_inverse(const ComplexSpectrum2D& spec) {
  const SpectralGrid& g = spec.grid();
  ComplexSpectrum2D work = spec;
  RealField2D out(g);
  fft::c2r(g.n1(), g.n2(), work.data(), out.data());
  return out;
}

double spectral_l2_squared(const ComplexSpectrum2D& spec) {
  const SpectralGrid& g = spec.grid();
  double sum = 0.0;
  for (int r = 0; r < g.n1(); ++r)
    for (int c = 0; c < spec.cols(); ++c) sum += hermitian_weight(g, c) * std::norm(spec(r, c));
  return g.area() * sum;
}

Axis axis_from_int(int axis) {
  if (axis == 1) return Axis::kX1;
  if (axis == 2) return Axis::kX2;
  throw InvalidArgument("axis must be 1 or 2, got " + std::to_string(axis));
}

ComplexSpectrum2D apply_symbol(const ComplexSpectrum2D& spec,
                               const std::function<Complex(double, double)>& symbol) {
  const SpectralGrid& g = spec.grid();
  ComplexSpectrum2D out(g);
  for (int r = 0; r < g.n1(); ++r) {
    const double k1 = g.k1(r);
    for (int c = 0; c < spec.cols(); ++c) out(r, c) = symbol(k1, g.k2(c)) * spec(r, c);
  }
  out.zero_nyquist();
  return out;
}

RealField2D ddx(const RealField2D& f, Axis axis) {
  const auto spec = transform_forward(f);
  const bool first = axis == Axis::kX1;
  return transform_inverse(apply_symbol(spec, [first](double k1, double k2) {
    return Complex(0.0, first ? k1 : k2);
  }));
}

RealField2D laplacian(const RealField2D& f) {
  const auto spec = transform_forward(f);
  return transform_inverse(
      apply_symbol(spec, [](double k1, double k2) { return Complex(-(k1 * k1 + k2 * k2), 0.0); }));
}

RealField2D helmholtz_solve(const RealField2D& f, double a) {
  if (!(a > 0.0)) throw InvalidArgument("helmholtz_solve needs a > 0");
  const auto spec = transform_forward(f);
  return transform_inverse(apply_symbol(
      spec, [a](double k1, double k2) { return Complex(1.0 / (a + k1 * k1 + k2 * k2), 0.0); }));
}

RealField2D antiderivative_x1(const RealField2D& f) {
  const SpectralGrid& g = f.grid();
  const auto spec = transform_forward(f);
  const RealField2D periodic = transform_inverse(apply_symbol(spec, [](double k1, double) {
    return k1 == 0.0 ? Complex(0.0, 0.0) : Complex(0.0, -1.0 / k1);
  }));
  std::vector<double> mean(g.n2(), 0.0);
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) mean[j] += f(i, j);
  for (double& m : mean) m /= g.n1();

  RealField2D out(g);
  for (int i = 0; i < g.n1(); ++i) {
    const double ramp = g.x1(i) + 0.5 * g.l1();
    for (int j = 0; j < g.n2(); ++j)
      out(i, j) = periodic(i, j) - periodic(0, j) + mean[j] * ramp;
  }
  return out;
}

std::vector<double> row_integrals_x1(const RealField2D& f) {
  const SpectralGrid& g = f.grid();
  std::vector<double> out(g.n2(), 0.0);
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) out[j] += f(i, j);
  for (double& v : out) v *= g.h1();
  return out;
}

double integrate(const RealField2D& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_area();
}

double inner(const RealField2D& f, const RealField2D& g) {
  require_same_grid(f.grid(), g.grid());
  double s = 0.0;
  const std::size_t n = f.size();
  const double* a = f.data();
  const double* b = g.data();
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s * f.grid().cell_area();
}

double l2_norm(const RealField2D& f) { return std::sqrt(inner(f, f)); }

double h1_inner(const RealField2D& f, const RealField2D& g) {
  require_same_grid(f.grid(), g.grid());
  const SpectralGrid& grid = f.grid();
  const auto a = transform_forward(f);
  const auto b = transform_forward(g);
  double s = 0.0;
  for (int r = 0; r < grid.n1(); ++r) {
    if (grid.nyquist1(r)) continue;
    const double k1 = grid.k1(r);
    for (int c = 0; c < a.cols(); ++c) {
      if (grid.nyquist2(c)) continue;
      const double k2 = grid.k2(c);
      s += hermitian_weight(grid, c) * (k1 * k1 + k2 * k2) * std::real(a(r, c) * std::conj(b(r, c)));
    }
  }
  return inner(f, g) + grid.area() * s;
}

double gradient_norm_squared(const RealField2D& f) { return h1_inner(f, f) - inner(f, f); }

double h1_norm(const RealField2D& f) { return std::sqrt(h1_inner(f, f)); }

int dealias_size(int n, int degree) {
  const int needed = (n * (degree + 1) + 1) / 2;
  return fft::good_size(std::max(needed, n));
}

void to_padded(const ComplexSpectrum2D& spec, int m1, int m2, AlignedVector<double>& samples) {
  AlignedVector<Complex> work;
  pad_spectrum(spec, m1, m2, work);
  samples.resize(static_cast<std::size_t>(m1) * m2);
  fft::c2r(m1, m2, work.data(), samples.data());
}

ComplexSpectrum2D from_padded(const AlignedVector<double>& samples, int m1, int m2,
                              const SpectralGrid& grid) {
  auto& s = scratch();
  s.spec.resize(static_cast<std::size_t>(m1) * (m2 / 2 + 1));
  fft::r2c(m1, m2, samples.data(), s.spec.data());
  return truncate_spectrum(s.spec, m1, m2, grid);
}

ComplexSpectrum2D dealiased_power(const ComplexSpectrum2D& spec, int p, const DealiasOptions& opts) {
  if (p < 2 || p > 8) throw InvalidArgument("dealiased_power supports 2 <= p <= 8");
  const SpectralGrid& g = spec.grid();
  const int m1 = dealias_size(g.n1(), p);
  const int m2 = dealias_size(g.n2(), p);
  check_padding(m1, m2, opts);
  auto& s = scratch();
  pad_spectrum(spec, m1, m2, s.spec);
  s.real.resize(static_cast<std::size_t>(m1) * m2);
  fft::c2r(m1, m2, s.spec.data(), s.real.data());
  for (double& v : s.real) {
    const double b = v;
    double r = b * b;
    for (int k = 2; k < p; ++k) r *= b;
    v = r;
  }
  s.spec.resize(static_cast<std::size_t>(m1) * (m2 / 2 + 1));
  fft::r2c(m1, m2, s.real.data(), s.spec.data());
  return truncate_spectrum(s.spec, m1, m2, g);
}

RealField2D dealiased_power(const RealField2D& f, int p, const DealiasOptions& opts) {
  return transform_inverse(dealiased_power(transform_forward(f), p, opts));
}

RealField2D dealiased_map(std::span<const RealField2D* const> fields, int degree,
                          const std::function<double(std::span<const double>)>& fn,
                          const DealiasOptions& opts) {
  if (fields.empty()) throw InvalidArgument("dealiased_map needs at least one field");
  const SpectralGrid& g = fields.front()->grid();
  for (const auto* f : fields) require_same_grid(g, f->grid());
  const int m1 = dealias_size(g.n1(), std::max(degree, 1));
  const int m2 = dealias_size(g.n2(), std::max(degree, 1));
  check_padding(m1, m2, opts);
  const std::size_t msize = static_cast<std::size_t>(m1) * m2;

  std::vector<AlignedVector<double>> padded(fields.size());
  AlignedVector<Complex> work;
  for (std::size_t q = 0; q < fields.size(); ++q) {
    pad_spectrum(transform_forward(*fields[q]), m1, m2, work);
    padded[q].resize(msize);
    fft::c2r(m1, m2, work.data(), padded[q].data());
  }
  AlignedVector<double> result(msize);
  std::vector<double> args(fields.size());
  for (std::size_t k = 0; k < msize; ++k) {
    for (std::size_t q = 0; q < fields.size(); ++q) args[q] = padded[q][k];
    result[k] = fn(args);
  }
  work.resize(static_cast<std::size_t>(m1) * (m2 / 2 + 1));
  fft::r2c(m1, m2, result.data(), work.data());
  return transform_inverse(truncate_spectrum(work, m1, m2, g));
}

RealField2D dealiased_product(const RealField2D& f, const RealField2D& g) {
  const RealField2D* fields[] = {&f, &g};
  return dealiased_map(fields, 2, [](std::span<const double> v) { return v[0] * v[1]; });
}

ComplexSpectrum2D shift(const ComplexSpectrum2D& spec, double shift1, double shift2) {
  return apply_symbol(spec, [shift1, shift2](double k1, double k2) {
    const double phase = k1 * shift1 + k2 * shift2;
    return Complex(std::cos(phase), std::sin(phase));
  });
}

RealField2D shift(const RealField2D& f, double shift1, double shift2) {
  return transform_inverse(shift(transform_forward(f), shift1, shift2));
}

RealField2D resample_scaled(const RealField2D& f, double scale1, double scale2) {
  if (!(scale1 > 0.0) || !(scale2 > 0.0)) throw InvalidArgument("resample scales must be > 0");
  const SpectralGrid& g = f.grid();
  if (scale1 == 1.0 && scale2 == 1.0) return f;
  const int n1 = g.n1();
  const int n2 = g.n2();
  const auto a1 = interpolation_matrix(n1, g.l1(), scale1);
  const auto a2 = interpolation_matrix(n2, g.l2(), scale2);
  // tmp = A1 * F  (n1 x n2), out = tmp * A2^T
  std::vector<double> tmp(static_cast<std::size_t>(n1) * n2, 0.0);
  for (int i = 0; i < n1; ++i) {
    double* trow = tmp.data() + static_cast<std::size_t>(i) * n2;
    for (int k = 0; k < n1; ++k) {
      const double w = a1[static_cast<std::size_t>(i) * n1 + k];
      const double* frow = f.data() + static_cast<std::size_t>(k) * n2;
      for (int j = 0; j < n2; ++j) trow[j] += w * frow[j];
    }
  }
  RealField2D out(g);
  for (int i = 0; i < n1; ++i) {
    const double* trow = tmp.data() + static_cast<std::size_t>(i) * n2;
    for (int j = 0; j < n2; ++j) {
      const double* arow = a2.data() + static_cast<std::size_t>(j) * n2;
      double s = 0.0;
      for (int k = 0; k < n2; ++k) s += arow[k] * trow[k];
      out(i, j) = s;
    }
  }
  return out;
}

double interpolate_periodic_1d(std::span<const double> row, double length, double x) {
  const int n = static_cast<int>(row.size());
  const double h = length / n;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double theta = 2.0 * kPi * (x - (-0.5 * length + j * h)) / length;
    s += row[j] * cardinal(n, theta);
  }
  return s;
}

RealField2D multiply_coordinate(const RealField2D& f, Axis axis) {
  const SpectralGrid& g = f.grid();
  RealField2D out(g);
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j)
      out(i, j) = f(i, j) * (axis == Axis::kX1 ? g.x1(i) : g.x2(j));
  return out;
}

double edge_ratio(const RealField2D& f) {
  const SpectralGrid& g = f.grid();
  const double peak = f.max_abs();
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  for (int j = 0; j < g.n2(); ++j)
    edge = std::max({edge, std::abs(f(0, j)), std::abs(f(g.n1() - 1, j))});
  for (int i = 0; i < g.n1(); ++i)
    edge = std::max({edge, std::abs(f(i, 0)), std::abs(f(i, g.n2() - 1))});
  return edge / peak;
}

}  // namespace gzk
