#include "gzk/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gzk/errors.hpp"
#include "gzk/functionals.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

namespace {

// sum_k w |a_k|^2 scaled to an L2 norm squared.
double parseval_inner(const ComplexSpectrum2D& a, const ComplexSpectrum2D& b) {
  const SpectralGrid& g = a.grid();
  double s = 0.0;
  for (int r = 0; r < g.n1(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      s += hermitian_weight(g, c) * std::real(a(r, c) * std::conj(b(r, c)));
  return g.area() * s;
}

void fill_derived(GroundState& q) {
  q.residual = equation_residual(q.profile, q.p, q.c);
  q.mass = mass(q.profile);
  q.energy = energy(q.profile, q.p);
  const double grad2 = gradient_norm_squared(q.profile);
  q.pohozaev_gap = integrate_power(q.profile, q.p + 1) - (q.p + 1.0) / (q.p - 1.0) * grad2;
}

void validate_p(int p) {
  if (p < 3 || p > 6) throw InvalidArgument("ground states are supported for p in {3,4,5,6}");
}

}  // namespace

double GroundState::peak() const noexcept {
  const SpectralGrid& g = grid();
  return profile(g.n1() / 2, g.n2() / 2);
}

double equation_residual(const RealField2D& q, int p, double c) {
  const auto qh = transform_forward(q);
  const auto nh = dealiased_power(qh, p);
  const SpectralGrid& g = q.grid();
  ComplexSpectrum2D r(g);
  for (int row = 0; row < g.n1(); ++row) {
    const double k1 = g.k1(row);
    for (int col = 0; col < r.cols(); ++col) {
      const double k2 = g.k2(col);
      r(row, col) = (c + k1 * k1 + k2 * k2) * qh(row, col) - nh(row, col);
    }
  }
  r.zero_nyquist();
  return std::sqrt(spectral_l2_squared(r));
}

GroundState refine_ground_state(int p, double c, RealField2D guess,
                                const PetviashviliOptions& opts) {
  validate_p(p);
  if (!(c > 0.0)) throw InvalidArgument("speed c must be positive");
  const SpectralGrid& g = guess.grid();
  const double gamma = static_cast<double>(p) / (p - 1);

  ComplexSpectrum2D qh = transform_forward(guess);
  qh.zero_nyquist();
  ComplexSpectrum2D symbol(g);
  for (int row = 0; row < g.n1(); ++row) {
    const double k1 = g.k1(row);
    for (int col = 0; col < qh.cols(); ++col) {
      const double k2 = g.k2(col);
      symbol(row, col) = c + k1 * k1 + k2 * k2;
    }
  }

  double rel = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it <= opts.max_iter; ++it) {
    const auto nh = dealiased_power(qh, p);
    ComplexSpectrum2D lq(g);
    for (std::size_t k = 0; k < lq.size(); ++k) lq[k] = symbol[k] * qh[k];
    ComplexSpectrum2D res(g);
    for (std::size_t k = 0; k < res.size(); ++k) res[k] = lq[k] - nh[k];
    const double qn = std::sqrt(parseval_inner(qh, qh));
    rel = std::sqrt(parseval_inner(res, res)) / qn;
    if (!std::isfinite(rel)) break;
    if (rel < opts.tol) break;
    if (it == opts.max_iter) break;
    const double num = parseval_inner(lq, qh);
    const double den = parseval_inner(nh, qh);
    if (!(den > 0.0)) {
      throw ConvergenceError("Petviashvili iteration lost positivity (<Q^p,Q> <= 0)", rel, it);
    }
    const double m = std::pow(num / den, gamma);
    for (std::size_t k = 0; k < qh.size(); ++k) qh[k] = m * nh[k] / symbol[k];
    qh.zero_nyquist();
  }
  if (!(rel < opts.tol)) {
    throw ConvergenceError("Petviashvili iteration did not converge: relative residual " +
                               std::to_string(rel) + " after " + std::to_string(it) +
                               " iterations",
                           rel, it);
  }

  GroundState q;
  q.p = p;
  q.c = c;
  q.profile = transform_inverse(qh);
  const double peak = q.profile.max_abs();
  double lowest = 0.0;
  for (double v : q.profile.values()) lowest = std::min(lowest, v);
  if (lowest < -1e-6 * peak) {
    throw Error("ground state has a negative lobe (min " + std::to_string(lowest) +
                "); box too small or bad initial guess");
  }
  fill_derived(q);
  return q;
}

GroundState solve_ground_state(int p, const SpectralGrid& grid, const PetviashviliOptions& opts) {
  validate_p(p);
  auto guess = RealField2D::sample(
      grid, [](double x1, double x2) { return std::exp(-(x1 * x1 + x2 * x2) / 4.0); });
  return refine_ground_state(p, 1.0, std::move(guess), opts);
}

GroundState dilate(const GroundState& q, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("dilation speed must be positive");
  if (c == 1.0 && q.c == 1.0) return q;
  // Relative to the stored speed: Q_c = (c/c0)^{1/(p-1)} Q_{c0}(sqrt(c/c0) x).
  const double ratio = c / q.c;
  const double amp = std::pow(ratio, 1.0 / (q.p - 1));
  const double scale = std::sqrt(ratio);
  RealField2D guess = resample_scaled(q.profile, scale, scale);
  guess *= amp;
  const double edge = edge_ratio(guess);
  if (edge > 1e-6) {
    throw Error("dilated profile is not decayed at the box edge (edge ratio " +
                std::to_string(edge) + "); use a larger box");
  }
  PetviashviliOptions opts;
  opts.tol = 1e-10;
  opts.max_iter = 200;
  return refine_ground_state(q.p, c, std::move(guess), opts);
}

RealField2D lambda_apply(const RealField2D& f, int p) {
  if (p < 2) throw InvalidArgument("lambda_apply needs p >= 2");
  RealField2D out = f;
  out *= 1.0 / (p - 1);
  out.axpy(0.5, multiply_coordinate(ddx(f, Axis::kX1), Axis::kX1));
  out.axpy(0.5, multiply_coordinate(ddx(f, Axis::kX2), Axis::kX2));
  return out;
}

RealField2D scaled_profile(const GroundState& q, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("dilation factor must be positive");
  RealField2D u = resample_scaled(q.profile, lambda, lambda);
  u *= lambda;
  return u;
}

RealField2D unstable_initial_data(const GroundState& q, int n) {
  if (n < 1) throw InvalidArgument("unstable_initial_data needs n >= 1");
  return scaled_profile(q, 1.0 + 1.0 / n);
}

double radial_log_slope(const RealField2D& f, double r_min, double r_max) {
  const SpectralGrid& g = f.grid();
  const int i0 = g.n1() / 2;
  const int j0 = g.n2() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = i0; i < g.n1(); ++i) {
    const double r = g.x1(i);
    if (r < r_min || r > r_max) continue;
    const double v = std::abs(f(i, j0));
    if (!(v > 0.0)) continue;
    const double y = std::log(std::sqrt(r) * v);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    ++n;
  }
  if (n < 2) throw InvalidArgument("radial_log_slope: fewer than two samples in range");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

double band_tail_sum(const RealField2D& f) {
  const SpectralGrid& g = f.grid();
  const ComplexSpectrum2D s = transform_forward(f);
  double sum = 0.0;
  for (int r = 0; r < g.n1(); ++r) {
    const double a = std::abs(g.mode1(r)) / (0.5 * g.n1());
    for (int c = 0; c < s.cols(); ++c) {
      if (std::max(a, c / (0.5 * g.n2())) <= 0.75) continue;
      // r2c storage holds one of each conjugate pair off the edge columns
      sum += std::abs(s(r, c)) * (c == 0 || c == g.n2() / 2 ? 1.0 : 2.0);
    }
  }
  return sum;
}

}  // namespace

GroundStateChecks check_ground_state(const GroundState& q, double tol) {
  GroundStateChecks out;
  const RealField2D& f = q.profile;
  const SpectralGrid& g = f.grid();
  const int i0 = g.n1() / 2;
  const int j0 = g.n2() / 2;
  const double peak = f.max_abs();
  out.resolution_floor = band_tail_sum(f);
  const double slack = std::max(1e-12 * peak, out.resolution_floor);

  out.positive = true;
  const double decay_radius = 0.75 * 0.5 * std::min(g.l1(), g.l2());
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      const double r = std::hypot(g.x1(i), g.x2(j));
      if (r <= decay_radius && !(f(i, j) > -slack)) out.positive = false;
      if (f(i, j) < -slack) out.positive = false;
    }
  if (!out.positive) out.failures.push_back("profile not positive in the decay region");

  out.peak_at_origin = f(i0, j0) == peak;
  if (!out.peak_at_origin) out.failures.push_back("maximum is not at the origin node");

  out.monotone_axes = true;
  for (int i = i0 + 1; i < g.n1(); ++i)
    if (f(i, j0) > f(i - 1, j0) + slack) out.monotone_axes = false;
  for (int i = i0 - 1; i >= 0; --i)
    if (f(i, j0) > f(i + 1, j0) + slack) out.monotone_axes = false;
  for (int j = j0 + 1; j < g.n2(); ++j)
    if (f(i0, j) > f(i0, j - 1) + slack) out.monotone_axes = false;
  for (int j = j0 - 1; j >= 0; --j)
    if (f(i0, j) > f(i0, j + 1) + slack) out.monotone_axes = false;
  if (!out.monotone_axes) out.failures.push_back("profile not radially nonincreasing on axes");

  out.decay_slope = radial_log_slope(f, 2.0, 8.0);
  const double expected = -std::sqrt(q.c);
  out.decay_ok = std::abs(out.decay_slope - expected) <= 0.05 * std::abs(expected);
  if (!out.decay_ok)
    out.failures.push_back("decay slope " + std::to_string(out.decay_slope) + " vs " +
                           std::to_string(expected));

  out.relative_residual = equation_residual(f, q.p, q.c) / l2_norm(f);
  if (!(out.relative_residual <= tol))
    out.failures.push_back("residual " + std::to_string(out.relative_residual) + " above tol");
  out.edge_ratio = edge_ratio(f);
  return out;
}

}  // namespace gzk
