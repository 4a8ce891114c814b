#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gzk/grid.hpp"
#include "gzk/groundstate.hpp"

namespace gzk {

/// L = -Lap + 1 - p Q^{p-1}.
///
/// The potential term is the Galerkin product P(p Q^{p-1} f) evaluated exactly
/// on a grid padded for degree p, so L is the exact derivative of the
/// discrete ground-state map and L Q_{x_j} vanishes to the level of the
/// ground-state residual. The padded samples of p Q^{p-1} are cached.
class LinearizedOperator {
 public:
  explicit LinearizedOperator(std::shared_ptr<const GroundState> ground);
  /// Free operator -Lap + 1 (potential switched off).
  static LinearizedOperator free(const SpectralGrid& grid);

  const GroundState& ground() const { return *ground_; }
  std::shared_ptr<const GroundState> ground_ptr() const { return ground_; }
  const SpectralGrid& grid() const noexcept { return grid_; }
  int p() const noexcept { return p_; }

  /// Throws GridMismatch when f is not on the ground-state grid.
  RealField2D apply(const RealField2D& f) const;
  /// <L f, f>.
  double quadratic_form(const RealField2D& f) const { return inner_product(apply(f), f); }
  /// Potential p Q^{p-1} sampled on the base grid (diagnostic only).
  RealField2D potential() const;

 private:
  LinearizedOperator() = default;
  static double inner_product(const RealField2D& a, const RealField2D& b);

  std::shared_ptr<const GroundState> ground_;
  SpectralGrid grid_;
  int p_ = 0;
  int m1_ = 0;
  int m2_ = 0;
  AlignedVector<double> padded_potential_;
};

struct EigenPair {
  double eigenvalue = 0.0;
  /// Unit L2 norm. The negative mode is normalised to a positive central value.
  RealField2D eigenfunction;
  /// ||L phi - lambda phi||_2 recomputed with LinearizedOperator::apply.
  double residual = 0.0;
};

struct SpectrumOptions {
  /// Residual every returned pair must reach.
  double tol = 1e-8;
  /// Eigenvalues with |lambda| below this count as kernel.
  double kernel_threshold = 1e-6;
  /// Shift s in (L + s)^{-1}; <= 0 picks 2 x the Rayleigh-quotient estimate of
  /// lambda0 from Q itself and doubles it on loss of definiteness.
  double shift = 0.0;
  int block_size = 0;  // 0: count + 2
  int max_basis = 160;
  int max_restarts = 12;
  double cg_tol = 1e-11;
  int cg_max_iter = 2000;
  std::uint64_t seed = 12345;
  /// Extra fields the Krylov space is kept orthogonal to (projected solve).
  std::vector<RealField2D> deflate;
};

/// The `count` algebraically smallest eigenpairs of L, by block Krylov
/// Rayleigh-Ritz on the shifted inverse (L + s)^{-1} with full
/// reorthogonalisation; inner solves by preconditioned CG with
/// (-Lap + 1 + s)^{-1}. Throws ConvergenceError on CG or outer failure and
/// Error when more than one eigenvalue is negative.
std::vector<EigenPair> lowest_spectrum(const LinearizedOperator& op, int count,
                                       const SpectrumOptions& opts = {});

struct SpectrumSummary {
  int negative = 0;
  int kernel = 0;
  int positive = 0;
};
SpectrumSummary classify_spectrum(const std::vector<EigenPair>& pairs, double kernel_threshold);

/// Largest principal angle (radians) between span(a) and span(b).
double subspace_angle(const std::vector<RealField2D>& a, const std::vector<RealField2D>& b);

/// beta = -integral(Q Lambda Q) / integral(Q chi0). Throws Error if the
/// denominator is not positive.
double compute_beta(const GroundState& ground, const RealField2D& chi0);

struct CoercivityEstimates {
  double sigma0_hat = 0.0;
  double k1_hat = 0.0;
  double k2_hat = 0.0;
  double lambda0 = 0.0;
  int trials = 0;
  int violations = 0;
  /// min over trials of (L e, e) - k1 |e|^2 + k2 |(e, chi0)|^2, normalised by |e|^2.
  double worst_margin = 0.0;
};

struct CoercivityOptions {
  int trials = 1000;
  std::uint64_t seed = 2024;
  /// Gaussian-filter width (in wavenumber) of the random trial fields.
  double smoothness = 2.0;
};

/// sigma0 from the lowest eigenvalue of L restricted to the complement of
/// {chi0, Q_x1, Q_x2} (projected Krylov solve, lowered by its residual),
/// k1 = sigma0, k2 = (sigma0 + lambda0)/|chi0|^2, then validated on seeded
/// random trial fields orthogonal to Q_x1 and Q_x2. Throws Error on any
/// violated trial.
CoercivityEstimates estimate_coercivity(const LinearizedOperator& op, const EigenPair& chi0,
                                        const CoercivityOptions& opts = {});

/// Smooth random field with Gaussian spectral envelope exp(-|k|^2/(2 width^2)),
/// unit L2 norm, deterministic in seed.
RealField2D random_smooth_field(const SpectralGrid& grid, std::uint64_t seed, double width);

/// f minus its L2 projection onto span(basis) (basis need not be orthogonal).
RealField2D project_out(const RealField2D& f, const std::vector<RealField2D>& basis);

}  // namespace gzk
