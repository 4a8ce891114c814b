#include "gzk/modulation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "gzk/errors.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

namespace {

// Phases e^{i k1 y1}, e^{i k2 y2} per row/column for evaluating shifted
// inner products as spectral sums.
struct Phases {
  std::vector<Complex> row, col;
  Phases(const SpectralGrid& g, double y1, double y2) : row(g.n1()), col(g.spectral_cols()) {
    for (int r = 0; r < g.n1(); ++r) row[r] = std::polar(1.0, g.k1(r) * y1);
    for (int c = 0; c < g.spectral_cols(); ++c) col[c] = std::polar(1.0, g.k2(c) * y2);
  }
};

// <u(. + y), g> and its gradient in y, from spectra (Nyquist excluded).
struct ShiftedInner {
  double value = 0.0;
  std::array<double, 2> grad{0.0, 0.0};
};

ShiftedInner shifted_inner(const ComplexSpectrum2D& uh, const ComplexSpectrum2D& gh,
                           const Phases& ph) {
  const SpectralGrid& g = uh.grid();
  ShiftedInner out;
  const int cols = uh.cols();
  for (int r = 0; r < g.n1(); ++r) {
    if (r == g.n1() / 2) continue;
    const double k1 = g.k1(r);
    for (int c = 0; c < cols - 1; ++c) {
      const double k2 = g.k2(c);
      const Complex term = uh(r, c) * ph.row[r] * ph.col[c] * std::conj(gh(r, c));
      const double w = hermitian_weight(g, c);
      out.value += w * term.real();
      // d/dy_j of Re(a e^{i k y}) = Re(i k_j a e^{i k y}) = -k_j Im(...)
      out.grad[0] -= w * k1 * term.imag();
      out.grad[1] -= w * k2 * term.imag();
    }
  }
  out.value *= g.area();
  out.grad[0] *= g.area();
  out.grad[1] *= g.area();
  return out;
}

// |u(. + y) - Q|_{H1}^2 evaluated spectrally.
double shifted_h1_distance2(const ComplexSpectrum2D& uh, const ComplexSpectrum2D& qh,
                            const Phases& ph) {
  const SpectralGrid& g = uh.grid();
  double s = 0.0;
  for (int r = 0; r < g.n1(); ++r) {
    if (r == g.n1() / 2) continue;
    const double k1 = g.k1(r);
    for (int c = 0; c < uh.cols() - 1; ++c) {
      const double k2 = g.k2(c);
      const Complex d = uh(r, c) * ph.row[r] * ph.col[c] - qh(r, c);
      s += hermitian_weight(g, c) * (1.0 + k1 * k1 + k2 * k2) * std::norm(d);
    }
  }
  return g.area() * s;
}

double wrap(double y, double length) {
  return y - length * std::round(y / length);
}

}  // namespace

ModulationBasis ModulationBasis::build(std::shared_ptr<const GroundState> ground) {
  if (!ground) throw InvalidArgument("ModulationBasis needs a ground state");
  ModulationBasis b;
  b.ground = ground;
  const RealField2D& q = ground->profile;
  b.q1 = ddx(q, Axis::kX1);
  b.q2 = ddx(q, Axis::kX2);
  b.q11 = ddx(b.q1, Axis::kX1);
  b.q12 = ddx(b.q1, Axis::kX2);
  b.q22 = ddx(b.q2, Axis::kX2);
  const LinearizedOperator op(ground);
  b.lq11 = op.apply(b.q11);
  b.lq12 = op.apply(b.q12);
  b.q1_norm2 = inner(b.q1, b.q1);
  b.q2_norm2 = inner(b.q2, b.q2);
  b.q_h1 = h1_norm(q);
  return b;
}

ModulationPoint decompose(const RealField2D& u, const ModulationBasis& basis, double y1_guess,
                          double y2_guess, const DecomposeOptions& opts) {
  const SpectralGrid& g = basis.grid();
  if (!(u.grid() == g)) throw GridMismatch("decompose: field is not on the ground-state grid");
  const auto uh = transform_forward(u);
  const auto qh = transform_forward(basis.ground->profile);
  const auto g1 = transform_forward(basis.q1);
  const auto g2 = transform_forward(basis.q2);

  {
    const double d0 = std::sqrt(shifted_h1_distance2(uh, qh, Phases(g, y1_guess, y2_guess)));
    if (!(d0 <= opts.tube_heuristic * basis.q_h1)) {
      throw ModulationError("outside modulation regime: |u(.+y)-Q|_H1 = " + std::to_string(d0) +
                            " exceeds " + std::to_string(opts.tube_heuristic) + "|Q|_H1");
    }
  }
  // <Q, Q_xj> vanishes by symmetry; keep the discrete value for exactness.
  const double c1 = inner(basis.ground->profile, basis.q1);
  const double c2 = inner(basis.ground->profile, basis.q2);

  std::array<double, 2> y{y1_guess, y2_guess};
  double gnorm = 0.0;
  int it = 0;
  const double q1n = std::sqrt(basis.q1_norm2);
  for (; it < opts.max_iter; ++it) {
    const Phases ph(g, y[0], y[1]);
    const auto a = shifted_inner(uh, g1, ph);
    const auto b = shifted_inner(uh, g2, ph);
    const Eigen::Vector2d gv(a.value - c1, b.value - c2);
    gnorm = gv.norm();
    Eigen::Matrix2d jac;
    jac << a.grad[0], a.grad[1], b.grad[0], b.grad[1];
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(jac);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    if (!(smin > 0.0) || smax / smin > opts.max_condition) {
      throw ModulationError("outside modulation regime: Jacobian condition " +
                            std::to_string(smin > 0.0 ? smax / smin : INFINITY));
    }
    const Eigen::Vector2d dy = jac.partialPivLu().solve(-gv);
    y[0] += dy(0);
    y[1] += dy(1);
    if (!std::isfinite(y[0]) || !std::isfinite(y[1]) ||
        std::hypot(y[0] - y1_guess, y[1] - y2_guess) > 0.25 * std::min(g.l1(), g.l2())) {
      throw ModulationError("outside modulation regime: Newton diverged");
    }
    if (dy.norm() <= 1e-15 * (1.0 + std::abs(y[0]) + std::abs(y[1]))) break;
    if (gnorm <= opts.tol * q1n * 1e-3 && dy.norm() < 1e-12) break;
  }

  ModulationPoint pt;
  pt.y1 = y[0];
  pt.y2 = y[1];
  pt.iterations = it + 1;
  pt.eps = shift(u, y[0], y[1]);
  pt.eps -= basis.ground->profile;
  pt.ortho1 = inner(pt.eps, basis.q1);
  pt.ortho2 = inner(pt.eps, basis.q2);
  pt.l2_eps = l2_norm(pt.eps);
  pt.h1_eps = h1_norm(pt.eps);
  const double bound = opts.tol * q1n * std::max(pt.l2_eps, 1e-3);
  if (!(std::abs(pt.ortho1) <= std::max(bound, 1e-10) &&
        std::abs(pt.ortho2) <= std::max(bound, 1e-10))) {
    throw ModulationError("outside modulation regime: Newton did not converge (|G| = " +
                          std::to_string(std::hypot(pt.ortho1, pt.ortho2)) + ")");
  }
  return pt;
}

TubeDistance tube_distance(const RealField2D& u, const GroundState& ground, double near_y1) {
  const SpectralGrid& g = ground.grid();
  if (!(u.grid() == g)) throw GridMismatch("tube_distance: field is not on the ground-state grid");
  const auto uh = transform_forward(u);
  const auto qh = transform_forward(ground.profile);

  // H1 cross-correlation C(s) = <u(. + s), Q>_{H1} at every grid shift.
  ComplexSpectrum2D corr(g);
  for (int r = 0; r < g.n1(); ++r) {
    const double k1 = g.k1(r);
    for (int c = 0; c < corr.cols(); ++c) {
      const double k2 = g.k2(c);
      corr(r, c) = (1.0 + k1 * k1 + k2 * k2) * uh(r, c) * std::conj(qh(r, c));
    }
  }
  corr.zero_nyquist();
  const RealField2D cgrid = transform_inverse(corr);
  int bi = 0, bj = 0;
  double best = -INFINITY;
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j)
      if (cgrid(i, j) > best) {
        best = cgrid(i, j);
        bi = i;
        bj = j;
      }
  std::array<double, 2> y{wrap(bi * g.h1(), g.l1()), wrap(bj * g.h2(), g.l2())};

  // Newton on grad C = 0 with the analytic Hessian; fall back to the grid
  // point if the refinement wanders off.
  const std::array<double, 2> seed = y;
  for (int it = 0; it < 30; ++it) {
    const Phases ph(g, y[0], y[1]);
    double grad[2] = {0, 0};
    double hess[3] = {0, 0, 0};
    for (int r = 0; r < g.n1(); ++r) {
      if (r == g.n1() / 2) continue;
      const double k1 = g.k1(r);
      for (int c = 0; c < corr.cols() - 1; ++c) {
        const double k2 = g.k2(c);
        const Complex term = corr(r, c) * ph.row[r] * ph.col[c];
        const double w = hermitian_weight(g, c);
        grad[0] -= w * k1 * term.imag();
        grad[1] -= w * k2 * term.imag();
        hess[0] -= w * k1 * k1 * term.real();
        hess[1] -= w * k1 * k2 * term.real();
        hess[2] -= w * k2 * k2 * term.real();
      }
    }
    Eigen::Matrix2d h;
    h << hess[0], hess[1], hess[1], hess[2];
    const Eigen::Vector2d gr(grad[0], grad[1]);
    const Eigen::Vector2d dy = h.ldlt().solve(-gr);
    if (!dy.allFinite()) break;
    y[0] += dy(0);
    y[1] += dy(1);
    if (std::hypot(y[0] - seed[0], y[1] - seed[1]) > 2.0 * std::max(g.h1(), g.h2())) {
      y = seed;
      break;
    }
    if (dy.norm() < 1e-14 * (1.0 + std::abs(y[0]) + std::abs(y[1]))) break;
  }

  TubeDistance out;
  RealField2D d = shift(u, y[0], y[1]);
  d -= ground.profile;
  out.distance = h1_norm(d);
  out.y1 = near_y1 + wrap(y[0] - near_y1, g.l1());
  out.y2 = wrap(y[1], g.l2());
  return out;
}

ModulationTrack track(const std::vector<RealField2D>& snapshots, const std::vector<double>& times,
                      const ModulationBasis& basis, const DecomposeOptions& opts) {
  if (snapshots.size() != times.size()) throw InvalidArgument("track: snapshots/times size mismatch");
  ModulationTrack out;
  out.ground = basis.ground;
  out.p = basis.p();
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    double g1 = 0.0, g2 = 0.0;
    const auto& pts = out.points;
    if (pts.size() >= 2) {
      const auto& a = pts[pts.size() - 2];
      const auto& b = pts.back();
      const double f = (times[i] - b.t) / (b.t - a.t);
      g1 = b.y1 + f * (b.y1 - a.y1);
      g2 = b.y2 + f * (b.y2 - a.y2);
    } else if (pts.size() == 1) {
      g1 = pts.back().y1 + (times[i] - pts.back().t);
      g2 = pts.back().y2;
    } else {
      g1 = tube_distance(snapshots[i], *basis.ground).y1;
    }
    try {
      ModulationPoint pt = decompose(snapshots[i], basis, g1, g2, opts);
      pt.t = times[i];
      out.points.push_back(std::move(pt));
    } catch (const ModulationError& e) {
      out.stop_reason = e.what();
      out.stop_time = times[i];
      break;
    }
  }
  return out;
}

RealField2D remainder_R(const RealField2D& eps, const RealField2D& q, int p) {
  if (p < 2) throw InvalidArgument("remainder_R needs p >= 2");
  // Binomial coefficients C(p, k).
  std::vector<double> binom(p + 1, 1.0);
  for (int k = 1; k <= p; ++k) binom[k] = binom[k - 1] * (p - k + 1) / k;
  const RealField2D* fields[] = {&q, &eps};
  const RealField2D poly = dealiased_map(fields, p, [p, &binom](std::span<const double> v) {
    const double qv = v[0];
    const double ev = v[1];
    // sum_{k=2}^p C(p,k) q^{p-k} e^k, Horner in e.
    double acc = 0.0;
    for (int k = p; k >= 2; --k) acc = acc * ev + binom[k] * std::pow(qv, p - k);
    return acc * ev * ev;
  });
  return ddx(poly, Axis::kX1);
}

TrackDerivatives track_derivatives(const ModulationTrack& tr, std::size_t i, int order) {
  if (order != 2 && order != 4) throw InvalidArgument("finite-difference order must be 2 or 4");
  const auto& pts = tr.points;
  const std::size_t half = order / 2;
  if (i < half || i + half >= pts.size()) throw InvalidArgument("track index too close to an end");
  const double h = pts[i + 1].t - pts[i].t;
  static constexpr double kW2[] = {-0.5, 0.0, 0.5};
  static constexpr double kW4[] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
  const double* w = order == 2 ? kW2 : kW4;
  TrackDerivatives d;
  d.eps_t = RealField2D(pts[i].eps.grid());
  for (std::size_t m = 0; m <= 2 * half; ++m) {
    const std::size_t j = i - half + m;
    const double c = w[m] / h;
    if (c == 0.0) continue;
    d.eps_t.axpy(c, pts[j].eps);
    d.y1p += c * pts[j].y1;
    d.y2p += c * pts[j].y2;
  }
  return d;
}

namespace {

void require_uniform(const ModulationTrack& tr) {
  if (tr.points.size() < 5) throw InvalidArgument("track needs at least 5 points");
  const double h = tr.points[1].t - tr.points[0].t;
  for (std::size_t i = 1; i < tr.points.size(); ++i) {
    if (std::abs((tr.points[i].t - tr.points[i - 1].t) - h) > 1e-9 * std::abs(h))
      throw InvalidArgument("track samples are not uniformly spaced");
  }
}

}  // namespace

std::vector<EpsilonResidual> epsilon_equation_residual(const ModulationTrack& tr,
                                                       const ModulationBasis& basis, int fd_order) {
  require_uniform(tr);
  const LinearizedOperator op(basis.ground);
  const RealField2D& q = basis.ground->profile;
  std::vector<EpsilonResidual> out;
  const std::size_t half = fd_order / 2;
  for (std::size_t i = half; i + half < tr.points.size(); ++i) {
    const auto& pt = tr.points[i];
    const auto d = track_derivatives(tr, i, fd_order);
    RealField2D lhs = d.eps_t;
    lhs -= ddx(op.apply(pt.eps), Axis::kX1);
    RealField2D qe = q;
    qe += pt.eps;
    RealField2D rhs = ddx(qe, Axis::kX1);
    rhs *= (d.y1p - 1.0);
    rhs.axpy(d.y2p, ddx(qe, Axis::kX2));
    rhs -= remainder_R(pt.eps, q, basis.p());
    lhs -= rhs;
    EpsilonResidual r;
    r.t = pt.t;
    r.absolute = l2_norm(lhs);
    const double scale = l2_norm(d.eps_t);
    r.relative = scale > 0.0 ? r.absolute / scale : r.absolute;
    out.push_back(r);
  }
  return out;
}

ParameterRates solve_parameter_system(const RealField2D& eps, const ModulationBasis& basis) {
  const RealField2D rem = remainder_R(eps, basis.ground->profile, basis.p());
  const double e11 = inner(eps, basis.q11);
  const double e12 = inner(eps, basis.q12);
  const double e22 = inner(eps, basis.q22);
  Eigen::Matrix2d a;
  a << basis.q1_norm2 - e11, -e12, -e12, basis.q2_norm2 - e22;
  const Eigen::Vector2d rhs(inner(basis.lq11, eps) + inner(rem, basis.q1),
                            inner(basis.lq12, eps) + inner(rem, basis.q2));
  ParameterRates out;
  out.determinant = a.determinant();
  const Eigen::Vector2d sol = a.partialPivLu().solve(rhs);
  out.y1p = 1.0 + sol(0);
  out.y2p = sol(1);
  return out;
}

ParameterControlReport parameter_control_check(const ModulationTrack& tr,
                                               const ModulationBasis& basis, int fd_order) {
  require_uniform(tr);
  ParameterControlReport rep;
  const double threshold = 0.5 * basis.q1_norm2 * basis.q2_norm2;
  const std::size_t half = fd_order / 2;
  for (std::size_t i = half; i + half < tr.points.size(); ++i) {
    const auto& pt = tr.points[i];
    const auto d = track_derivatives(tr, i, fd_order);
    const auto s = solve_parameter_system(pt.eps, basis);
    ParameterControlPoint cp;
    cp.t = pt.t;
    cp.y1p_system = s.y1p;
    cp.y2p_system = s.y2p;
    cp.y1p_fd = d.y1p;
    cp.y2p_fd = d.y2p;
    cp.determinant = s.determinant;
    cp.degenerate = std::abs(s.determinant) < threshold;
    if (cp.degenerate) ++rep.degenerate_count;
    const double dev = std::abs(s.y1p - 1.0) + std::abs(s.y2p);
    cp.control_ratio = pt.l2_eps > 0.0 ? dev / pt.l2_eps : 0.0;
    rep.max_mismatch =
        std::max(rep.max_mismatch, std::abs(s.y1p - d.y1p) + std::abs(s.y2p - d.y2p));
    rep.max_control_ratio = std::max(rep.max_control_ratio, cp.control_ratio);
    rep.points.push_back(cp);
  }
  return rep;
}

}  // namespace gzk
