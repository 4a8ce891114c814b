#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gzk/grid.hpp"
#include "gzk/groundstate.hpp"

namespace gzk {

enum class Integrator { kETDRK4, kIFRK4 };

Integrator integrator_from_string(const std::string& name);
std::string to_string(Integrator integrator);

struct SolverConfig {
  int p = 4;
  double dt = 5e-4;
  double t_end = 1.0;
  int snapshot_stride = 200;
  Integrator integrator = Integrator::kETDRK4;
  /// false switches the u^p term off (linear Airy-type flow).
  bool nonlinear = true;

  /// Throws InvalidArgument on dt <= 0, t_end < dt, stride < 1 or p outside [2, 8].
  void validate() const;
  /// dt * max |k1| |k|^2 over the retained modes.
  double stability_proxy(const SpectralGrid& grid) const;
};

struct EvolutionState {
  double t = 0.0;
  RealField2D u;
  long step_count = 0;
};

/// Fixed-step integrator for u_t + d/dx1 (Lap u + u^p) = 0 in Fourier space:
///   d/dt c_k = i k1 |k|^2 c_k - i k1 (u^p)_k.
/// The linear part is integrated exactly; u^p is dealiased. Coefficients are
/// built once per (grid, dt); the phi-functions of ETDRK4 come from a 64-point
/// contour mean.
class Stepper {
 public:
  Stepper(const SpectralGrid& grid, const SolverConfig& config);

  const SpectralGrid& grid() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }

  /// Advances the spectrum by one step in place.
  void advance(ComplexSpectrum2D& spec) const;

 private:
  ComplexSpectrum2D nonlinear_term(const ComplexSpectrum2D& spec) const;

  SpectralGrid grid_;
  int p_;
  double dt_;
  Integrator integrator_;
  bool nonlinear_;
  // Per-mode coefficients; see evolution.cpp.
  std::vector<Complex> e_, e2_, q_, f1_, f2_, f3_;
  std::vector<double> ik1_;
};

/// One step. Throws BlowUpError if the result is not finite.
EvolutionState step(const EvolutionState& state, const SolverConfig& config);

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
};
/// Mass and general-p energy 1/2 |grad u|^2 - u^{p+1}/(p+1).
Conserved conserved_quantities(const RealField2D& u, int p);

/// Max over x2-rows and snapshots of |row integral(t) - row integral(t_0)|.
/// Needs at least two snapshots.
double line_integral_invariance(const std::vector<RealField2D>& series);

struct ThresholdReport {
  double s = 0.0;
  /// E(u)^s M(u)^{1-s} / (E(Q)^s M(Q)^{1-s}); a negative energy enters as
  /// -|E|^s.
  double mass_energy_ratio = 0.0;
  /// |grad u|^s |u|^{1-s} / (|grad Q|^s |Q|^{1-s}).
  double gradient_ratio = 0.0;
  bool energy_nonnegative = false;
  bool below_mass_energy = false;
  bool below_gradient = false;
};
/// s = 1 - 2/(p-1).
ThresholdReport threshold_report(const RealField2D& u0, const GroundState& ground);

struct SeriesRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double h1norm = 0.0;
};

enum class RunStatus { kCompleted, kBlowUp, kStopped };
std::string to_string(RunStatus status);

struct RunOptions {
  /// Relative energy drift that triggers rollback to the last snapshot and
  /// dt halving.
  double energy_drift_tol = 1e-7;
  int max_halvings = 4;
  /// Blow-up when |u|_{H1} exceeds this (0 disables the norm test).
  double blowup_h1 = 0.0;
  /// Called at t = 0 and every snapshot_stride base steps; return false to stop.
  std::function<bool(const EvolutionState&, const SeriesRecord&)> on_snapshot;
};

struct RunResult {
  EvolutionState final_state;
  std::vector<SeriesRecord> series;
  RunStatus status = RunStatus::kCompleted;
  int halvings = 0;
  double final_dt = 0.0;
  double blowup_time = 0.0;
  double blowup_h1 = 0.0;
};

/// Integrates to config.t_end. Snapshots are spaced snapshot_stride * dt in
/// time regardless of later dt halvings; the last one lands on t_end. A
/// drifting segment is recomputed from its starting snapshot with half the
/// step, so emitted snapshots are final.
RunResult evolve(const RealField2D& u0, const SolverConfig& config, const RunOptions& options = {});

}  // namespace gzk
