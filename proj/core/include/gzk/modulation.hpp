#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gzk/grid.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/linearized.hpp"

namespace gzk {

/// Derivatives of Q and the images needed by the modulation equations,
/// computed once per ground state.
struct ModulationBasis {
  std::shared_ptr<const GroundState> ground;
  RealField2D q1, q2, q11, q12, q22;
  RealField2D lq11, lq12;  // L Q_x1x1, L Q_x1x2
  double q1_norm2 = 0.0;
  double q2_norm2 = 0.0;
  double q_h1 = 0.0;

  static ModulationBasis build(std::shared_ptr<const GroundState> ground);
  const SpectralGrid& grid() const { return ground->grid(); }
  int p() const { return ground->p; }
};

struct ModulationPoint {
  double t = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
  /// u(. + y) - Q.
  RealField2D eps;
  double ortho1 = 0.0;  // <eps, Q_x1>
  double ortho2 = 0.0;  // <eps, Q_x2>
  double l2_eps = 0.0;
  double h1_eps = 0.0;
  int iterations = 0;
};

struct DecomposeOptions {
  /// Newton stops once |G| is below tol * |Q_x1| * max(|eps|, 1e-3) or the
  /// step stagnates at roundoff.
  double tol = 1e-12;
  int max_iter = 40;
  /// Entry heuristic: |u(. + y_guess) - Q|_{H1} <= this * |Q|_{H1}.
  double tube_heuristic = 0.5;
  double max_condition = 1e6;
};

/// Newton on G(y) = (<u(. + y) - Q, Q_x1>, <u(. + y) - Q, Q_x2>) = 0 started
/// at y_guess, with spectrally exact shifts. The returned y is the branch
/// continuous with the guess. Throws ModulationError outside the regime
/// (heuristic violated, Jacobian condition too large, divergence).
ModulationPoint decompose(const RealField2D& u, const ModulationBasis& basis, double y1_guess,
                          double y2_guess, const DecomposeOptions& opts = {});

struct TubeDistance {
  double distance = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
};

/// inf over y of |u - Q(. - y)|_{H1}: the H1 cross-correlation over all grid
/// shifts seeds Newton on the continuous correlation maximum; the distance is
/// then evaluated directly. y is reported in (-L/2, L/2]; `near_y1` picks the
/// periodic image of y1 closest to it.
TubeDistance tube_distance(const RealField2D& u, const GroundState& ground, double near_y1 = 0.0);

struct ModulationTrack {
  std::shared_ptr<const GroundState> ground;
  int p = 0;
  std::vector<ModulationPoint> points;
  /// Empty when every snapshot decomposed; otherwise why tracking stopped.
  std::string stop_reason;
  double stop_time = 0.0;
};

/// Decomposes snapshots in order, each Newton started from a linear
/// extrapolation of the previous two points. Stops at the first failure.
ModulationTrack track(const std::vector<RealField2D>& snapshots, const std::vector<double>& times,
                      const ModulationBasis& basis, const DecomposeOptions& opts = {});

/// R(eps) = d/dx1 sum_{k=2}^p C(p,k) Q^{p-k} eps^k, dealiased.
RealField2D remainder_R(const RealField2D& eps, const RealField2D& q, int p);

/// Centred finite-difference derivatives of the track at interior index i;
/// `order` 2 or 4. Dispersive modes oscillate at k1 |k|^2, so the
/// differences only resolve them when the spacing is well below 1/k^3 at the
/// wavenumbers that carry eps; refinement studies sample every solver step.
struct TrackDerivatives {
  RealField2D eps_t;
  double y1p = 0.0;
  double y2p = 0.0;
};
TrackDerivatives track_derivatives(const ModulationTrack& track, std::size_t i, int order);

struct EpsilonResidual {
  double t = 0.0;
  /// |LHS - RHS|_2 / |eps_t|_2 (absolute when eps_t = 0).
  double relative = 0.0;
  double absolute = 0.0;
};

/// Residual of eps_t - (L eps)_x1 = (y1'-1)(Q+eps)_x1 + y2'(Q+eps)_x2 - R(eps)
/// at interior samples. Requires >= 5 points at uniform spacing.
std::vector<EpsilonResidual> epsilon_equation_residual(const ModulationTrack& track,
                                                       const ModulationBasis& basis,
                                                       int fd_order = 4);

struct ParameterControlPoint {
  double t = 0.0;
  double y1p_system = 0.0;
  double y2p_system = 0.0;
  double y1p_fd = 0.0;
  double y2p_fd = 0.0;
  double determinant = 0.0;
  bool degenerate = false;
  /// (|y1' - 1| + |y2'|) / |eps|_2 from the system solution.
  double control_ratio = 0.0;
};

struct ParameterControlReport {
  std::vector<ParameterControlPoint> points;
  double max_mismatch = 0.0;
  double max_control_ratio = 0.0;
  int degenerate_count = 0;
};

/// Solves the 2x2 system for (y1' - 1, y2') at interior samples from field
/// quadratures alone and compares with finite differences of the track.
ParameterControlReport parameter_control_check(const ModulationTrack& track,
                                               const ModulationBasis& basis, int fd_order = 4);

/// The 2x2 solve at a single point; (0, 0) for eps = 0.
struct ParameterRates {
  double y1p = 1.0;
  double y2p = 0.0;
  double determinant = 0.0;
};
ParameterRates solve_parameter_system(const RealField2D& eps, const ModulationBasis& basis);

}  // namespace gzk
