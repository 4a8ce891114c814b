#include "gzk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gzk/errors.hpp"
#include "gzk/functionals.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

namespace {

constexpr double kFloor = 1e-12;

// Least squares y = a + b x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) return {n > 0 ? sy / n : 0.0, 0.0};
  const double b = (n * sxy - sx * sy) / den;
  return {(sy - b * sx) / n, b};
}

}  // namespace

std::pair<double, double> fit_x2_decay(const RealField2D& f) {
  const SpectralGrid& g = f.grid();
  std::vector<double> xs, ys;
  const double hi = 0.75 * 0.5 * g.l2();
  for (int j = 0; j < g.n2(); ++j) {
    const double x2 = std::abs(g.x2(j));
    if (x2 < 2.0 || x2 > hi) continue;
    double sup = 0.0;
    for (int i = 0; i < g.n1(); ++i) sup = std::max(sup, std::abs(f(i, j)));
    if (sup <= kFloor) continue;
    xs.push_back(x2);
    ys.push_back(std::log(sup));
  }
  if (xs.size() < 2) return {0.0, 0.0};
  const auto [a, b] = linear_fit(xs, ys);
  return {std::exp(a), -b};
}

VirialKernel build_virial_kernel(const GroundState& ground, const EigenPair& chi0) {
  if (!(chi0.eigenvalue < 0.0)) throw InvalidArgument("chi0 must belong to the negative eigenvalue");
  VirialKernel k;
  k.chi0 = chi0.eigenfunction;
  k.lambda0 = -chi0.eigenvalue;
  k.beta = compute_beta(ground, k.chi0);
  k.phi = lambda_apply(ground.profile, ground.p);
  k.phi.axpy(k.beta, k.chi0);
  k.F = antiderivative_x1(k.phi);
  k.F_x2 = ddx(k.F, Axis::kX2);
  k.right_edge = row_integrals_x1(k.phi);
  k.sup_F = k.F.max_abs();
  if (!std::isfinite(k.sup_F)) throw NonFiniteValue("virial kernel F is not finite");
  const auto [amp, rate] = fit_x2_decay(k.F);
  k.x2_decay_amplitude = amp;
  k.x2_decay_rate = rate;
  return k;
}

WeightProfile::WeightProfile(double M) : m_(M) {
  if (!(M > 0.0) || !std::isfinite(M)) throw InvalidArgument("weight parameter M must be positive");
}

double WeightProfile::psi(double x) const {
  // Left half by reflection: 1 - (1 - y) == y for y in [1/2, 1], so
  // psi(-x) = 1 - psi(x) holds bit for bit on both sides.
  if (x < 0.0) return 1.0 - psi(-x);
  const double z = x / m_;
  if (z > 700.0) return 1.0;
  return 0.5 + std::atan(std::sinh(z)) / std::numbers::pi;
}

double WeightProfile::dpsi(double x) const {
  const double z = x / m_;
  if (std::abs(z) > 700.0) return 2.0 * std::exp(-std::abs(z)) / (std::numbers::pi * m_);
  return 1.0 / (std::numbers::pi * m_ * std::cosh(z));
}

double WeightProfile::d3psi(double x) const {
  const double z = x / m_;
  if (std::abs(z) > 700.0) {
    return 2.0 * std::exp(-std::abs(z)) / (std::numbers::pi * m_ * m_ * m_);
  }
  const double sech = 1.0 / std::cosh(z);
  return sech * (1.0 - 2.0 * sech * sech) / (std::numbers::pi * m_ * m_ * m_);
}

std::vector<double> WeightProfile::psi_samples(const SpectralGrid& grid) const {
  std::vector<double> out(grid.n1());
  for (int i = 0; i < grid.n1(); ++i) out[i] = psi(grid.x1(i));
  return out;
}

double virial_J(const RealField2D& eps, const VirialKernel& kernel) {
  return inner(eps, kernel.F);
}

VirialTerms dJdt_terms(const RealField2D& eps, const VirialKernel& kernel,
                       const ModulationBasis& basis, double y1p, double y2p) {
  const RealField2D& q = basis.ground->profile;
  VirialTerms t;
  t.leading = kernel.beta * kernel.lambda0 * inner(eps, kernel.chi0);
  t.q_eps = inner(q, eps);
  t.y1_term = -(y1p - 1.0) * inner(eps, kernel.phi);
  t.y2_eps_term = -y2p * inner(eps, kernel.F_x2);
  t.y2_q_term = -y2p * inner(q, kernel.F_x2);
  t.remainder_term = -inner(remainder_R(eps, q, basis.p()), kernel.F);
  // <d1 G, F> = -<G, d1 F> exactly on the grid; d1 F differs from phi only by
  // the jump of F across the seam.
  const LinearizedOperator op(basis.ground);
  RealField2D gfield = op.apply(eps);
  RealField2D qe = q;
  qe += eps;
  gfield.axpy(y1p - 1.0, qe);
  RealField2D jump = kernel.phi;
  jump -= ddx(kernel.F, Axis::kX1);
  t.seam = inner(gfield, jump);
  return t;
}

double dJdt_formula(const ModulationPoint& point, const VirialKernel& kernel,
                    const ModulationBasis& basis, double y1p, double y2p) {
  return dJdt_terms(point.eps, kernel, basis, y1p, y2p).total();
}

WeinsteinReport weinstein_expansion_check(const GroundState& ground, const LinearizedOperator& op,
                                          const RealField2D& phi, std::span<const double> s_values) {
  WeinsteinReport rep;
  const int p = ground.p;
  const double w0 = weinstein(ground.profile, p);
  rep.quadratic_form = op.quadratic_form(phi);
  std::vector<double> lx, ly;
  for (double s : s_values) {
    RealField2D u = ground.profile;
    u.axpy(s, phi);
    const double r = weinstein(u, p) - w0 - 0.5 * s * s * rep.quadratic_form;
    rep.s.push_back(s);
    rep.remainder.push_back(r);
    if (s > 0.0 && std::abs(r) > 0.0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(std::abs(r)));
    }
  }
  if (lx.size() >= 2) rep.slope = linear_fit(lx, ly).second;
  return rep;
}

double monotonicity_I(const RealField2D& u, const WeightProfile& weight, double x0, double t0,
                      double t, double y1_t0) {
  const SpectralGrid& g = u.grid();
  double s = 0.0;
  for (int i = 0; i < g.n1(); ++i) {
    const double w = weight.psi(g.x1(i) - y1_t0 + 0.5 * (t0 - t) - x0);
    double row = 0.0;
    for (int j = 0; j < g.n2(); ++j) row += u(i, j) * u(i, j);
    s += w * row;
  }
  return s * g.cell_area();
}

MonotonicityReport almost_monotonicity_check(std::span<const RunSample> run,
                                             const WeightProfile& weight,
                                             std::span<const double> x0_grid, double margin) {
  if (run.size() < 2) throw InvalidArgument("monotonicity check needs at least two samples");
  const SpectralGrid& g = run.front().u->grid();
  const double limit = 0.5 * g.l1() - margin;
  const double xmax = *std::max_element(x0_grid.begin(), x0_grid.end());
  for (const auto& s : run) {
    if (xmax + 0.5 * s.t + std::abs(s.y1) >= limit) {
      throw WindowError("monotonicity window violated at t0 = " + std::to_string(s.t) +
                        ": max(x0) + t0/2 + |y1(t0)| = " +
                        std::to_string(xmax + 0.5 * s.t + std::abs(s.y1)) + " >= L/2 - margin = " +
                        std::to_string(limit));
    }
  }
  MonotonicityReport rep;
  for (double x0 : x0_grid) {
    double dmax = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < run.size(); ++b) {
      const double t0 = run[b].t;
      const double i0 = monotonicity_I(*run[b].u, weight, x0, t0, t0, run[b].y1);
      rep.rows.push_back({t0, t0, x0, i0});
      for (std::size_t a = 0; a < b; ++a) {
        const double it = monotonicity_I(*run[a].u, weight, x0, t0, run[a].t, run[b].y1);
        rep.rows.push_back({run[a].t, t0, x0, it});
        dmax = std::max(dmax, i0 - it);
      }
    }
    rep.x0.push_back(x0);
    rep.D.push_back(dmax);
  }
  rep.theta = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < rep.x0.size(); ++k) {
    rep.theta = std::max(rep.theta, rep.D[k] * std::exp(rep.x0[k] / weight.M()));
    lx.push_back(rep.x0[k]);
    ly.push_back(std::log(std::max(rep.D[k], kFloor)));
  }
  const auto [a, b] = linear_fit(lx, ly);
  rep.fitted_amplitude = std::exp(a);
  rep.fitted_rate = -b;
  bool all_below_floor = true;
  for (double d : rep.D) all_below_floor = all_below_floor && d <= kFloor;
  rep.pass = all_below_floor || rep.fitted_rate >= 1.0 / (2.0 * weight.M());
  return rep;
}

double right_mass(const RealField2D& u, double x0, double y1) {
  const RealField2D v = y1 == 0.0 ? u : shift(u, y1, 0.0);
  const SpectralGrid& g = v.grid();
  double s = 0.0;
  for (int i = 0; i < g.n1(); ++i) {
    if (!(g.x1(i) > x0)) continue;
    for (int j = 0; j < g.n2(); ++j) s += v(i, j) * v(i, j);
  }
  return s * g.cell_area();
}

DecayFit fit_decay(std::span<const double> x0, std::span<const double> values) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x0.size(); ++k) {
    if (values[k] > kFloor) {
      lx.push_back(x0[k]);
      ly.push_back(std::log(values[k]));
    }
  }
  DecayFit fit;
  fit.used = static_cast<int>(lx.size());
  if (lx.size() < 2) return fit;
  const auto [a, b] = linear_fit(lx, ly);
  fit.amplitude = std::exp(a);
  fit.rate = -b;
  return fit;
}

DecayFit decay_profile(const RealField2D& u, double y1, std::span<const double> x0_grid,
                       std::vector<double>* values, double margin) {
  const SpectralGrid& g = u.grid();
  const double xmax = *std::max_element(x0_grid.begin(), x0_grid.end());
  if (xmax >= 0.5 * g.l1() - margin) {
    throw WindowError("decay window: max(x0) = " + std::to_string(xmax) + " >= L/2 - margin");
  }
  const RealField2D v = y1 == 0.0 ? u : shift(u, y1, 0.0);
  std::vector<double> rm;
  for (double x0 : x0_grid) rm.push_back(right_mass(v, x0, 0.0));
  const auto fit = fit_decay(x0_grid, rm);
  if (values) *values = std::move(rm);
  return fit;
}

BoundedJReport bounded_J_check(std::span<const double> t, std::span<const double> J,
                               std::span<const double> dJdt_formula) {
  BoundedJReport rep;
  if (J.empty()) return rep;
  bool inc = true, dec = true;
  for (std::size_t i = 0; i < J.size(); ++i) {
    rep.max_abs_J = std::max(rep.max_abs_J, std::abs(J[i]));
    if (i > 0) {
      inc = inc && J[i] >= J[i - 1];
      dec = dec && J[i] <= J[i - 1];
    }
  }
  rep.monotone = inc || dec;
  if (J.size() >= 2) {
    rep.slope = linear_fit(std::vector<double>(t.begin(), t.end()),
                           std::vector<double>(J.begin(), J.end()))
                    .second;
  }
  rep.final_over_initial =
      std::abs(J.front()) > 0.0 ? std::abs(J.back()) / std::abs(J.front()) : INFINITY;
  if (!dJdt_formula.empty()) {
    double sum = 0.0;
    bool pos = true, neg = true;
    rep.a0 = INFINITY;
    for (double d : dJdt_formula) {
      sum += d;
      pos = pos && d > 0.0;
      neg = neg && d < 0.0;
      rep.a0 = std::min(rep.a0, std::abs(d));
    }
    rep.mean_formula = sum / dJdt_formula.size();
    rep.sign_definite = pos || neg;
    if (!rep.sign_definite) rep.a0 = 0.0;
    rep.slope_mismatch = std::abs(rep.mean_formula) > 0.0
                             ? std::abs(rep.slope - rep.mean_formula) / std::abs(rep.mean_formula)
                             : INFINITY;
  }
  return rep;
}

std::vector<DiagnosticRecord> diagnose_track(const ModulationTrack& tr, const VirialKernel& kernel,
                                             const ModulationBasis& basis) {
  std::vector<DiagnosticRecord> out;
  const auto& pts = tr.points;
  const RealField2D& q = basis.ground->profile;
  for (const auto& pt : pts) {
    DiagnosticRecord r;
    r.t = pt.t;
    r.y1 = pt.y1;
    r.J = virial_J(pt.eps, kernel);
    const auto rates = solve_parameter_system(pt.eps, basis);
    r.dJdt_formula = dJdt_formula(pt, kernel, basis, rates.y1p, rates.y2p);
    RealField2D u = q;
    u += pt.eps;
    r.W = weinstein(u, basis.p());
    r.tube_dist = tube_distance(u, *basis.ground).distance;
    r.eps_chi0 = inner(pt.eps, kernel.chi0);
    r.dJdt_fd = std::numeric_limits<double>::quiet_NaN();
    out.push_back(r);
  }
  for (std::size_t i = 1; i + 1 < out.size(); ++i) {
    const double h0 = out[i].t - out[i - 1].t;
    const double h1 = out[i + 1].t - out[i].t;
    // Three-point derivative on a possibly non-uniform stencil.
    out[i].dJdt_fd = (-h1 / (h0 * (h0 + h1))) * out[i - 1].J +
                     ((h1 - h0) / (h0 * h1)) * out[i].J + (h0 / (h1 * (h0 + h1))) * out[i + 1].J;
  }
  return out;
}

}  // namespace gzk
