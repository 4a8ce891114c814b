#pragma once

#include <string>
#include <vector>

#include "gzk/grid.hpp"

namespace gzk {

/// A converged solution of -Laplacian Q + c Q - Q^p = 0 on the periodic grid.
struct GroundState {
  int p = 4;
  double c = 1.0;
  RealField2D profile;
  /// ||-Lap Q + c Q - Q^p||_2, recomputed after convergence.
  double residual = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  /// integral Q^{p+1} - (p+1)/(p-1) integral |grad Q|^2.
  double pohozaev_gap = 0.0;

  const SpectralGrid& grid() const noexcept { return profile.grid(); }
  /// Q at the origin node.
  double peak() const noexcept;
};

struct PetviashviliOptions {
  /// Stop once the residual drops below tol * ||Q||_2.
  double tol = 1e-10;
  int max_iter = 1000;
};

/// Petviashvili iteration Q <- m^gamma (c - Lap)^{-1} Q^p with
/// m = <(c - Lap) Q, Q> / <Q^p, Q> and gamma = p/(p-1), started from
/// exp(-|x|^2/4). Throws ConvergenceError when the residual does not reach tol
/// within max_iter and Error when a negative lobe appears.
GroundState solve_ground_state(int p, const SpectralGrid& grid,
                               const PetviashviliOptions& opts = {});

/// Continues the iteration for speed c from an initial profile.
GroundState refine_ground_state(int p, double c, RealField2D guess,
                                const PetviashviliOptions& opts = {});

/// L2 norm of -Lap q + c q - P(q^p).
double equation_residual(const RealField2D& q, int p, double c);

/// Q_c(x) = c^{1/(p-1)} Q(sqrt(c) x), resampled by Fourier interpolation and
/// polished with a few fixed-point sweeps at speed c so the residual stays
/// below 1e-10 ||Q_c||_2. Throws InvalidArgument for c <= 0 and Error when the
/// dilated profile is not decayed at the box edge.
GroundState dilate(const GroundState& q, double c);

/// Lambda f = f/(p-1) + (x . grad f)/2.
RealField2D lambda_apply(const RealField2D& f, int p);

/// u_{0,n}(x) = lambda Q(lambda x), lambda = 1 + 1/n.
RealField2D unstable_initial_data(const GroundState& q, int n);
/// Same family for an arbitrary dilation factor.
RealField2D scaled_profile(const GroundState& q, double lambda);

/// Result of the shape checks every returned GroundState should pass.
struct GroundStateChecks {
  bool positive = false;
  bool peak_at_origin = false;
  bool monotone_axes = false;
  /// Least-squares slope of log(sqrt(r) Q) on 2 <= r <= 8 along the x1 axis.
  double decay_slope = 0.0;
  bool decay_ok = false;
  double relative_residual = 0.0;
  /// Boundary monitor: max |Q| on the outer ring over max |Q|.
  double edge_ratio = 0.0;
  /// Sum of |coefficients| in the outer quarter of the band: a pointwise
  /// bound on truncation ripples. Sign and monotonicity tests ignore
  /// deviations below it.
  double resolution_floor = 0.0;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }
};

GroundStateChecks check_ground_state(const GroundState& q, double tol = 1e-10);

/// Fits log(sqrt(r) |f|) against r for samples along the positive x1 axis
/// through the origin node, r in [r_min, r_max]. Returns the slope.
double radial_log_slope(const RealField2D& f, double r_min, double r_max);

}  // namespace gzk
