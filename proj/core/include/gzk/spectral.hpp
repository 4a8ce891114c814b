#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "gzk/grid.hpp"

namespace gzk {

/// Forward transform to Fourier coefficients (see ComplexSpectrum2D for the
/// normalisation). Throws NonFiniteValue on NaN/Inf input.
ComplexSpectrum2D transform_forward(const RealField2D& f);
/// Inverse transform; the Nyquist content of the spectrum is used as stored.
RealField2D transform_inverse(const ComplexSpectrum2D& spec);

/// L1 L2 sum_k |c_k|^2 over the full spectrum (equals integrate(f^2)).
double spectral_l2_squared(const ComplexSpectrum2D& spec);

enum class Axis { kX1 = 1, kX2 = 2 };
/// Maps 1/2 to an Axis, throws InvalidArgument otherwise.
Axis axis_from_int(int axis);

/// Spectral first derivative; the Nyquist mode is zeroed.
RealField2D ddx(const RealField2D& f, Axis axis);
RealField2D laplacian(const RealField2D& f);
/// Returns (a - Laplacian)^{-1} f. Requires a > 0.
RealField2D helmholtz_solve(const RealField2D& f, double a);

/// Multiplies every coefficient by symbol(k1, k2). The Nyquist mode is zeroed.
ComplexSpectrum2D apply_symbol(const ComplexSpectrum2D& spec,
                               const std::function<Complex(double, double)>& symbol);

/// g(x1, x2) = integral of f(z, x2) dz from the left box edge to x1.
///
/// Evaluated exactly for the trigonometric interpolant of each row: the row
/// mean contributes a linear ramp and the zero-mean part is integrated mode by
/// mode. g vanishes at the left edge.
RealField2D antiderivative_x1(const RealField2D& f);
/// Per-row integral of f over the full x1 period (the value of the
/// antiderivative at the right box edge).
std::vector<double> row_integrals_x1(const RealField2D& f);

double integrate(const RealField2D& f);
double inner(const RealField2D& f, const RealField2D& g);
double l2_norm(const RealField2D& f);
double gradient_norm_squared(const RealField2D& f);
double h1_norm(const RealField2D& f);
/// H1 inner product (f,g) + (grad f, grad g).
double h1_inner(const RealField2D& f, const RealField2D& g);

/// Padded grid size per axis for an exact degree-`degree` product.
int dealias_size(int n, int degree);

struct DealiasOptions {
  /// Refuse paddings whose padded sample count exceeds this many doubles.
  std::size_t max_padded_samples = std::size_t{1} << 26;
};

/// f^p computed on a zero-padded grid with at least N (p+1)/2 modes per axis
/// and projected back to the N-mode band (Galerkin truncation). Exact for
/// band-limited f. 2 <= p <= 8.
RealField2D dealiased_power(const RealField2D& f, int p, const DealiasOptions& opts = {});
/// Spectrum-in, spectrum-out form used by the time stepper.
ComplexSpectrum2D dealiased_power(const ComplexSpectrum2D& spec, int p,
                                  const DealiasOptions& opts = {});
/// Galerkin-truncated product of two band-limited fields.
RealField2D dealiased_product(const RealField2D& f, const RealField2D& g);

/// Evaluates a pointwise polynomial map of several band-limited fields on a
/// grid padded for total degree `degree` and truncates the result back.
RealField2D dealiased_map(std::span<const RealField2D* const> fields, int degree,
                          const std::function<double(std::span<const double>)>& fn,
                          const DealiasOptions& opts = {});

/// Samples of the trigonometric interpolant of `spec` (Nyquist dropped) on an
/// m1 x m2 grid covering the same box.
void to_padded(const ComplexSpectrum2D& spec, int m1, int m2, AlignedVector<double>& samples);
/// Forward transform of m1 x m2 samples truncated to the |m| < N/2 band of
/// `grid`. `samples` is used as scratch and left unspecified.
ComplexSpectrum2D from_padded(const AlignedVector<double>& samples, int m1, int m2,
                              const SpectralGrid& grid);

/// Returns x -> f(x + shift) for the trigonometric interpolant (Nyquist dropped).
RealField2D shift(const RealField2D& f, double shift1, double shift2);
ComplexSpectrum2D shift(const ComplexSpectrum2D& spec, double shift1, double shift2);

/// Returns x -> f(scale1 * x1, scale2 * x2) by separable Fourier interpolation.
/// Target coordinates beyond the box are clamped to the nearest edge, which
/// for a decayed profile continues it by its (tiny, flat) edge value instead
/// of wrapping the far side of the torus back in.
RealField2D resample_scaled(const RealField2D& f, double scale1, double scale2);

/// Value of the trigonometric interpolant of row data `row` (period `length`,
/// node 0 at -length/2) at arbitrary x. Test oracles use this.
double interpolate_periodic_1d(std::span<const double> row, double length, double x);

/// f multiplied by the coordinate x1 or x2.
RealField2D multiply_coordinate(const RealField2D& f, Axis axis);

/// max |f| over the outermost ring of nodes divided by max |f|.
double edge_ratio(const RealField2D& f);

}  // namespace gzk
