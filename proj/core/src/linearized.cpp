#include "gzk/linearized.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "gzk/errors.hpp"
#include "gzk/functionals.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

namespace {

class NotDefinite : public Error {
 public:
  using Error::Error;
};

void orthonormalize_against(RealField2D& v, const std::vector<RealField2D>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) v.axpy(-inner(v, b), b);
}

// Drops the Nyquist modes, which L maps to zero; renormalising a nearly
// dependent Krylov vector would otherwise promote FFT roundoff there.
RealField2D band_limit(const RealField2D& f) {
  auto spec = transform_forward(f);
  spec.zero_nyquist();
  return transform_inverse(spec);
}

struct CgResult {
  RealField2D x;
  int iterations = 0;
};

// Preconditioned CG for (L + s) x = b inside the complement of `deflate`
// (orthonormal). Throws NotDefinite on nonpositive curvature.
CgResult solve_shifted(const LinearizedOperator& op, double s, const RealField2D& b,
                       const std::vector<RealField2D>& deflate, double tol, int max_iter) {
  auto project = [&](RealField2D& v) { orthonormalize_against(v, deflate); };
  RealField2D rhs = b;
  project(rhs);
  const double bnorm = l2_norm(rhs);
  RealField2D x(b.grid());
  if (bnorm == 0.0) return {x, 0};
  RealField2D r = rhs;
  RealField2D z = helmholtz_solve(r, 1.0 + s);
  project(z);
  RealField2D p = z;
  double rz = inner(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    RealField2D ap = op.apply(p);
    ap.axpy(s, p);
    project(ap);
    const double pap = inner(p, ap);
    if (!(pap > 0.0)) throw NotDefinite("shifted operator is not positive definite");
    const double alpha = rz / pap;
    x.axpy(alpha, p);
    r.axpy(-alpha, ap);
    if (l2_norm(r) <= tol * bnorm) return {x, it};
    z = helmholtz_solve(r, 1.0 + s);
    project(z);
    const double rz_new = inner(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    RealField2D next = z;
    next.axpy(beta, p);
    p = std::move(next);
  }
  throw ConvergenceError("CG on L + " + std::to_string(s) + " did not converge in " +
                             std::to_string(max_iter) + " iterations (relative residual " +
                             std::to_string(l2_norm(r) / bnorm) + ")",
                         l2_norm(r) / bnorm, max_iter);
}

RealField2D linear_combination(const std::vector<RealField2D>& v, const Eigen::VectorXd& y) {
  RealField2D out(v.front().grid());
  for (std::size_t j = 0; j < v.size(); ++j) out.axpy(y(static_cast<Eigen::Index>(j)), v[j]);
  return out;
}

// Block Krylov Rayleigh-Ritz on (L + s)^{-1} restricted to the complement of
// `deflate`. Returns the `count` lowest eigenpairs of L on that subspace.
std::vector<EigenPair> krylov_lowest(const LinearizedOperator& op, int count, double s,
                                     const std::vector<RealField2D>& deflate,
                                     const SpectrumOptions& opts) {
  const SpectralGrid& grid = op.grid();
  const int block = opts.block_size > 0 ? opts.block_size : count + 2;
  std::vector<RealField2D> basis;
  std::vector<RealField2D> images;

  std::vector<RealField2D> next;
  for (int b = 0; b < block; ++b) {
    next.push_back(random_smooth_field(grid, opts.seed + 7919ULL * b, 3.0));
  }

  std::vector<EigenPair> best;
  double worst_residual = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    while (static_cast<int>(basis.size()) < opts.max_basis) {
      int added = 0;
      for (auto& w : next) {
        orthonormalize_against(w, deflate);
        const double before = l2_norm(w);
        orthonormalize_against(w, basis);
        const double after = l2_norm(w);
        if (!(after > 1e-6 * std::max(before, 1e-300))) continue;
        w = band_limit(w);
        orthonormalize_against(w, deflate);
        orthonormalize_against(w, basis);
        w *= 1.0 / l2_norm(w);
        images.push_back(solve_shifted(op, s, w, deflate, opts.cg_tol, opts.cg_max_iter).x);
        basis.push_back(std::move(w));
        ++added;
      }
      next.clear();
      const auto n = static_cast<Eigen::Index>(basis.size());
      if (n < count) {
        if (added == 0) throw ConvergenceError("Krylov space collapsed", 1.0, 0);
        for (int b = 0; b < added; ++b) next.push_back(images[images.size() - added + b]);
        continue;
      }
      Eigen::MatrixXd h(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
          const double v = 0.5 * (inner(basis[i], images[j]) + inner(basis[j], images[i]));
          h(i, j) = v;
          h(j, i) = v;
        }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
      // Largest theta of the inverse = smallest eigenvalues of L.
      std::vector<EigenPair> pairs;
      worst_residual = 0.0;
      for (int k = 0; k < count; ++k) {
        const Eigen::Index col = n - 1 - k;
        const double theta = eig.eigenvalues()(col);
        const Eigen::VectorXd y = eig.eigenvectors().col(col);
        EigenPair pair;
        pair.eigenvalue = 1.0 / theta - s;
        pair.eigenfunction = linear_combination(basis, y);
        pair.eigenfunction *= 1.0 / l2_norm(pair.eigenfunction);
        RealField2D res = op.apply(pair.eigenfunction);
        res.axpy(-pair.eigenvalue, pair.eigenfunction);
        orthonormalize_against(res, deflate);
        pair.residual = l2_norm(res);
        worst_residual = std::max(worst_residual, pair.residual);
        pairs.push_back(std::move(pair));
      }
      best = std::move(pairs);
      if (worst_residual <= opts.tol) return best;
      if (added == 0) break;
      for (int b = 0; b < added; ++b) next.push_back(images[images.size() - added + b]);
    }
    // Explicit restart from the current Ritz vectors plus the newest directions.
    std::vector<RealField2D> seeds;
    for (auto& pair : best) seeds.push_back(pair.eigenfunction);
    for (int b = 0; b < block && b < static_cast<int>(images.size()); ++b)
      seeds.push_back(images[images.size() - 1 - b]);
    basis.clear();
    images.clear();
    next = std::move(seeds);
  }
  throw ConvergenceError("Krylov eigensolver did not reach residual " + std::to_string(opts.tol) +
                             " (worst " + std::to_string(worst_residual) + ")",
                         worst_residual, opts.max_restarts);
}

}  // namespace

LinearizedOperator::LinearizedOperator(std::shared_ptr<const GroundState> ground)
    : ground_(std::move(ground)) {
  if (!ground_) throw InvalidArgument("LinearizedOperator needs a ground state");
  grid_ = ground_->grid();
  p_ = ground_->p;
  m1_ = dealias_size(grid_.n1(), p_);
  m2_ = dealias_size(grid_.n2(), p_);
  to_padded(transform_forward(ground_->profile), m1_, m2_, padded_potential_);
  for (double& v : padded_potential_) v = p_ * std::pow(v, p_ - 1);
}

LinearizedOperator LinearizedOperator::free(const SpectralGrid& grid) {
  LinearizedOperator op;
  op.grid_ = grid;
  op.p_ = 0;
  return op;
}

RealField2D LinearizedOperator::apply(const RealField2D& f) const {
  if (!(f.grid() == grid_)) throw GridMismatch("apply_L: field is not on the operator grid");
  const auto fh = transform_forward(f);
  ComplexSpectrum2D out(grid_);
  for (int r = 0; r < grid_.n1(); ++r) {
    const double k1 = grid_.k1(r);
    for (int c = 0; c < out.cols(); ++c) {
      const double k2 = grid_.k2(c);
      out(r, c) = (1.0 + k1 * k1 + k2 * k2) * fh(r, c);
    }
  }
  if (!padded_potential_.empty()) {
    AlignedVector<double> samples;
    to_padded(fh, m1_, m2_, samples);
    for (std::size_t k = 0; k < samples.size(); ++k) samples[k] *= padded_potential_[k];
    const auto vf = from_padded(samples, m1_, m2_, grid_);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= vf[k];
  }
  out.zero_nyquist();
  return transform_inverse(out);
}

RealField2D LinearizedOperator::potential() const {
  if (!ground_) return RealField2D(grid_);
  RealField2D v = ground_->profile;
  for (auto& x : v.values()) x = p_ * std::pow(x, p_ - 1);
  return v;
}

double LinearizedOperator::inner_product(const RealField2D& a, const RealField2D& b) {
  return inner(a, b);
}

RealField2D random_smooth_field(const SpectralGrid& grid, std::uint64_t seed, double width) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexSpectrum2D spec(grid);
  for (int r = 0; r < grid.n1(); ++r) {
    const double k1 = grid.k1(r);
    for (int c = 0; c < spec.cols(); ++c) {
      const double k2 = grid.k2(c);
      const double env = std::exp(-(k1 * k1 + k2 * k2) / (2.0 * width * width));
      const double re = normal(rng);
      const double im = normal(rng);
      spec(r, c) = env * Complex(re, im);
    }
  }
  // Enforce Hermitian symmetry on the self-conjugate columns.
  for (int c : {0, grid.n2() / 2}) {
    for (int r = 1; r < grid.n1() / 2; ++r) spec(grid.n1() - r, c) = std::conj(spec(r, c));
    spec(0, c) = spec(0, c).real();
  }
  spec.zero_nyquist();
  RealField2D f = transform_inverse(spec);
  f *= 1.0 / l2_norm(f);
  return f;
}

RealField2D project_out(const RealField2D& f, const std::vector<RealField2D>& basis) {
  if (basis.empty()) return f;
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs(i) = inner(basis[i], f);
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = inner(basis[i], basis[j]);
  }
  const Eigen::VectorXd coef = gram.ldlt().solve(rhs);
  RealField2D out = f;
  for (Eigen::Index i = 0; i < n; ++i) out.axpy(-coef(i), basis[i]);
  // One refinement pass against roundoff.
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = inner(basis[i], out);
  const Eigen::VectorXd fix = gram.ldlt().solve(rhs);
  for (Eigen::Index i = 0; i < n; ++i) out.axpy(-fix(i), basis[i]);
  return out;
}

std::vector<EigenPair> lowest_spectrum(const LinearizedOperator& op, int count,
                                       const SpectrumOptions& opts) {
  if (count < 1 || count > 12) throw InvalidArgument("count must be in [1, 12]");

  std::vector<RealField2D> deflate;
  for (const auto& d : opts.deflate) {
    RealField2D v = d;
    orthonormalize_against(v, deflate);
    v *= 1.0 / l2_norm(v);
    deflate.push_back(std::move(v));
  }

  // Shift from the Rayleigh quotient of Q: <LQ,Q>/<Q,Q> = (1-p) int Q^{p+1} / int Q^2.
  double shift = opts.shift;
  if (!(shift > 0.0)) {
    double estimate = 1.0;
    if (op.p() >= 2) {
      const auto& q = op.ground().profile;
      estimate = (op.p() - 1) * integrate_power(q, op.p() + 1) / mass(q);
    }
    shift = 2.0 * estimate;
  }

  // The negative mode first with the large shift, then everything else with a
  // small shift in its complement, where L + s is definite and the kernel is
  // well separated from the rest of the spectrum.
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      SpectrumOptions first = opts;
      first.block_size = opts.block_size > 0 ? opts.block_size : 2;
      auto lowest = krylov_lowest(op, 1, shift, deflate, first);
      std::vector<EigenPair> out;
      if (lowest.front().eigenvalue < -opts.kernel_threshold) {
        out.push_back(std::move(lowest.front()));
        if (count > 1) {
          auto inner_deflate = deflate;
          RealField2D chi = out.front().eigenfunction;
          orthonormalize_against(chi, inner_deflate);
          chi *= 1.0 / l2_norm(chi);
          inner_deflate.push_back(chi);
          SpectrumOptions rest = opts;
          const double small_shift = 0.5;
          auto others = krylov_lowest(op, count - 1, small_shift, inner_deflate, rest);
          for (auto& pair : others) out.push_back(std::move(pair));
        }
      } else {
        out = krylov_lowest(op, count, shift, deflate, opts);
      }
      std::sort(out.begin(), out.end(),
                [](const EigenPair& a, const EigenPair& b) { return a.eigenvalue < b.eigenvalue; });
      // Recompute residuals independently of the iteration.
      for (auto& pair : out) {
        RealField2D res = op.apply(pair.eigenfunction);
        res.axpy(-pair.eigenvalue, pair.eigenfunction);
        if (deflate.empty()) pair.residual = l2_norm(res);
      }
      // Sign convention: positive central value.
      for (auto& pair : out) {
        const auto& g = pair.eigenfunction.grid();
        if (pair.eigenfunction(g.n1() / 2, g.n2() / 2) < 0.0) pair.eigenfunction *= -1.0;
      }
      const auto summary = classify_spectrum(out, opts.kernel_threshold);
      if (summary.negative > 1) {
        throw Error("L has " + std::to_string(summary.negative) +
                    " negative eigenvalues; the grid is under-resolved");
      }
      return out;
    } catch (const NotDefinite&) {
      shift *= 2.0;
    }
  }
  throw ConvergenceError("could not find a definite shift for L", 0.0, 8);
}

SpectrumSummary classify_spectrum(const std::vector<EigenPair>& pairs, double kernel_threshold) {
  SpectrumSummary s;
  for (const auto& p : pairs) {
    if (std::abs(p.eigenvalue) <= kernel_threshold)
      ++s.kernel;
    else if (p.eigenvalue < 0.0)
      ++s.negative;
    else
      ++s.positive;
  }
  return s;
}

double subspace_angle(const std::vector<RealField2D>& a, const std::vector<RealField2D>& b) {
  auto orthonormal = [](const std::vector<RealField2D>& in) {
    std::vector<RealField2D> out;
    for (const auto& v : in) {
      RealField2D w = v;
      orthonormalize_against(w, out);
      const double n = l2_norm(w);
      if (n > 0.0) {
        w *= 1.0 / n;
        out.push_back(std::move(w));
      }
    }
    return out;
  };
  const auto qa = orthonormal(a);
  const auto qb = orthonormal(b);
  // sin of the largest principal angle = |(I - P_b) Q_a|_2, computed from the
  // residuals directly (the 1 - cos^2 form bottoms out near 1e-8).
  std::vector<RealField2D> res;
  for (const auto& v : qa) {
    RealField2D r = v;
    for (const auto& w : qb) r.axpy(-inner(r, w), w);
    for (const auto& w : qb) r.axpy(-inner(r, w), w);
    res.push_back(std::move(r));
  }
  Eigen::MatrixXd g(res.size(), res.size());
  for (std::size_t i = 0; i < res.size(); ++i)
    for (std::size_t j = 0; j < res.size(); ++j)
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inner(res[i], res[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const double s2 = std::max(0.0, es.eigenvalues().maxCoeff());
  double angle = std::asin(std::min(1.0, std::sqrt(s2)));
  if (qa.size() > qb.size()) angle = std::numbers::pi / 2;
  return angle;
}

double compute_beta(const GroundState& ground, const RealField2D& chi0) {
  const double den = inner(ground.profile, chi0);
  if (!(den > 0.0)) {
    throw Error("integral of Q chi0 is not positive (" + std::to_string(den) +
                "); chi0 must be sign-normalised");
  }
  const double num = inner(ground.profile, lambda_apply(ground.profile, ground.p));
  return -num / den;
}

CoercivityEstimates estimate_coercivity(const LinearizedOperator& op, const EigenPair& chi0,
                                        const CoercivityOptions& opts) {
  if (opts.trials < 100) throw InvalidArgument("coercivity validation needs >= 100 trials");
  const auto& q = op.ground().profile;
  const RealField2D qx1 = ddx(q, Axis::kX1);
  const RealField2D qx2 = ddx(q, Axis::kX2);

  SpectrumOptions so;
  so.deflate = {chi0.eigenfunction, qx1, qx2};
  so.tol = 1e-6;
  so.shift = 0.5;
  const auto bottom = krylov_lowest(op, 1, so.shift,
                                    [&] {
                                      std::vector<RealField2D> d;
                                      for (const auto& v : so.deflate) {
                                        RealField2D w = v;
                                        orthonormalize_against(w, d);
                                        w *= 1.0 / l2_norm(w);
                                        d.push_back(std::move(w));
                                      }
                                      return d;
                                    }(),
                                    so);

  CoercivityEstimates est;
  est.lambda0 = -chi0.eigenvalue;
  // Ritz values approach from above; step down by the residual bound.
  est.sigma0_hat = bottom.front().eigenvalue - bottom.front().residual;
  if (!(est.sigma0_hat > 0.0)) throw Error("estimated sigma0 is not positive");
  const double chi_norm2 = inner(chi0.eigenfunction, chi0.eigenfunction);
  est.k1_hat = est.sigma0_hat;
  est.k2_hat = (est.sigma0_hat + est.lambda0) / chi_norm2;

  est.trials = opts.trials;
  est.worst_margin = std::numeric_limits<double>::infinity();
  const std::vector<RealField2D> kernel = {qx1, qx2};
  for (int t = 0; t < opts.trials; ++t) {
    RealField2D e = random_smooth_field(op.grid(), opts.seed + 104729ULL * t, opts.smoothness);
    // Mix in a chi0 component of random size so both regimes are exercised.
    e.axpy(std::sin(1.0 + t) * 2.0, chi0.eigenfunction);
    e = project_out(e, kernel);
    const double en2 = inner(e, e);
    const double lhs = op.quadratic_form(e);
    const double proj = inner(e, chi0.eigenfunction);
    const double rhs = est.k1_hat * en2 - est.k2_hat * proj * proj;
    const double margin = (lhs - rhs) / en2;
    est.worst_margin = std::min(est.worst_margin, margin);
    if (margin < 0.0) ++est.violations;
  }
  if (est.violations > 0) {
    throw Error("coercivity bound violated in " + std::to_string(est.violations) + " of " +
                std::to_string(est.trials) + " trials");
  }
  return est;
}

}  // namespace gzk
