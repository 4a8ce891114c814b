#pragma once

#include <span>
#include <string>
#include <vector>

#include "gzk/grid.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"

namespace gzk {

/// F(x1, x2) = integral from the left box edge to x1 of (Lambda Q + beta chi0).
struct VirialKernel {
  RealField2D F;
  RealField2D F_x2;
  /// Lambda Q + beta chi0.
  RealField2D phi;
  /// Value of F on the right box edge per x2 row (total row integral of phi).
  std::vector<double> right_edge;
  double beta = 0.0;
  RealField2D chi0;
  double lambda0 = 0.0;
  double sup_F = 0.0;
  /// Fitted rate delta in sup_x1 |F(x1, x2)| ~ c exp(-delta |x2|).
  double x2_decay_rate = 0.0;
  double x2_decay_amplitude = 0.0;
};

/// chi0 must be the sign-normalised negative mode (eigenvalue -lambda0).
VirialKernel build_virial_kernel(const GroundState& ground, const EigenPair& chi0);

/// Regression of log sup_x1 |F| against |x2| over 2 <= |x2| <= 0.75 L2/2
/// (values above 1e-12 only). Returns {amplitude, rate}.
std::pair<double, double> fit_x2_decay(const RealField2D& f);

/// psi(x) = (2/pi) arctan(e^{x/M}), evaluated as 1/2 + arctan(sinh(x/M))/pi
/// for x >= 0 and by reflection for x < 0, so that psi(0) = 1/2 and
/// psi(-x) = 1 - psi(x) hold exactly.
class WeightProfile {
 public:
  explicit WeightProfile(double M);
  double M() const noexcept { return m_; }
  double psi(double x) const;
  double dpsi(double x) const;
  double d3psi(double x) const;
  /// Samples on the x1 nodes of `grid`.
  std::vector<double> psi_samples(const SpectralGrid& grid) const;

 private:
  double m_;
};

double virial_J(const RealField2D& eps, const VirialKernel& kernel);

/// Terms of dJ/dt along the eps flow.
struct VirialTerms {
  double leading = 0.0;       // beta lambda0 int eps chi0
  double q_eps = 0.0;         // int Q eps
  double y1_term = 0.0;       // -(y1' - 1) int eps (Lambda Q + beta chi0)
  double y2_eps_term = 0.0;   // -y2' int eps F_x2
  double y2_q_term = 0.0;     // -y2' int Q F_x2
  double remainder_term = 0.0;  // -int R(eps) F
  /// Torus seam: int (L eps + (y1' - 1)(Q + eps))|_{right edge} F_right dx2,
  /// in its exact discrete form. Vanishes on the plane.
  double seam = 0.0;
  double K() const { return q_eps + y1_term + y2_eps_term + y2_q_term + remainder_term; }
  double total() const { return leading + K() + seam; }
};

VirialTerms dJdt_terms(const RealField2D& eps, const VirialKernel& kernel,
                       const ModulationBasis& basis, double y1p, double y2p);
/// beta lambda0 int eps chi0 + K(eps) + seam term.
double dJdt_formula(const ModulationPoint& point, const VirialKernel& kernel,
                    const ModulationBasis& basis, double y1p, double y2p);

struct WeinsteinReport {
  std::vector<double> s;
  std::vector<double> remainder;  // W[Q + s phi] - W[Q] - s^2/2 (L phi, phi)
  double quadratic_form = 0.0;    // (L phi, phi)
  double slope = 0.0;             // log-log fit of |remainder| against s
};

/// W = E + M/2 expanded around Q along s * phi for the given s values.
WeinsteinReport weinstein_expansion_check(const GroundState& ground, const LinearizedOperator& op,
                                          const RealField2D& phi, std::span<const double> s_values);

/// Lab-frame snapshots with the unwrapped soliton position.
struct RunSample {
  double t = 0.0;
  double y1 = 0.0;
  const RealField2D* u = nullptr;
};

/// I_{x0,t0}(t) = int u(t)^2 psi(x1 - y1(t0) + (t0 - t)/2 - x0).
double monotonicity_I(const RealField2D& u, const WeightProfile& weight, double x0, double t0,
                      double t, double y1_t0);

/// Largest x0 + t0/2 + |y1(t0)| allowed: L1/2 minus `margin`.
struct MonotonicityReport {
  std::vector<double> x0;
  std::vector<double> D;  // max over sampled t <= t0 of I(t0) - I(t)
  double theta = 0.0;     // smallest theta with D(x0) <= theta e^{-x0/M} for all x0
  double fitted_rate = 0.0;
  double fitted_amplitude = 0.0;
  bool pass = false;
  /// Rows t, t0, x0, I for export.
  struct Row {
    double t, t0, x0, I;
  };
  std::vector<Row> rows;
};

/// Throws WindowError when some (x0, t0) leaves the periodic validity window.
MonotonicityReport almost_monotonicity_check(std::span<const RunSample> run,
                                             const WeightProfile& weight,
                                             std::span<const double> x0_grid, double margin = 2.0);

/// int over x1 > x0 of u(x1 + y1, x2)^2.
double right_mass(const RealField2D& u, double x0, double y1);

/// Fit of log right-mass against x0 over values above 1e-12.
struct DecayFit {
  double amplitude = 0.0;
  double rate = 0.0;
  int used = 0;
};
DecayFit fit_decay(std::span<const double> x0, std::span<const double> values);

/// Right-mass curve over x0_grid, measured in the frame centred at y1, and
/// its fit. The window check requires max(x0) < L1/2 - margin.
DecayFit decay_profile(const RealField2D& u, double y1, std::span<const double> x0_grid,
                       std::vector<double>* values = nullptr, double margin = 2.0);

struct BoundedJReport {
  double max_abs_J = 0.0;
  bool monotone = false;
  double slope = 0.0;          // least-squares dJ/dt over the window
  double mean_formula = 0.0;   // mean of the formula values
  double slope_mismatch = 0.0;  // |slope - mean_formula| / |mean_formula|
  bool sign_definite = false;
  double a0 = 0.0;             // min |dJ/dt formula|
  double final_over_initial = 0.0;  // |J(T)| / |J(0)|
};
BoundedJReport bounded_J_check(std::span<const double> t, std::span<const double> J,
                               std::span<const double> dJdt_formula);

struct DiagnosticRecord {
  double t = 0.0;
  double J = 0.0;
  double dJdt_fd = 0.0;  // NaN at the ends
  double dJdt_formula = 0.0;
  double W = 0.0;
  double tube_dist = 0.0;
  double y1 = 0.0;
  double eps_chi0 = 0.0;
};

/// J, dJ/dt (centred differences of J and the formula with system-solved
/// y'), W and tube distance along a track.
std::vector<DiagnosticRecord> diagnose_track(const ModulationTrack& track,
                                             const VirialKernel& kernel,
                                             const ModulationBasis& basis);

}  // namespace gzk
