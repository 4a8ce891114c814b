#include "gzk/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gzk/errors.hpp"
#include "gzk/functionals.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

namespace {

constexpr int kContourPoints = 64;

double spectral_h1_squared(const ComplexSpectrum2D& spec) {
  const SpectralGrid& g = spec.grid();
  double s = 0.0;
  for (int r = 0; r < g.n1(); ++r) {
    const double k1 = g.k1(r);
    for (int c = 0; c < spec.cols(); ++c) {
      const double k2 = g.k2(c);
      s += hermitian_weight(g, c) * (1.0 + k1 * k1 + k2 * k2) * std::norm(spec(r, c));
    }
  }
  return g.area() * s;
}

bool all_finite(const ComplexSpectrum2D& spec) {
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (!std::isfinite(spec[k].real()) || !std::isfinite(spec[k].imag())) return false;
  return true;
}

}  // namespace

Integrator integrator_from_string(const std::string& name) {
  if (name == "etdrk4" || name == "ETDRK4") return Integrator::kETDRK4;
  if (name == "ifrk4" || name == "IFRK4") return Integrator::kIFRK4;
  throw InvalidArgument("unknown integrator '" + name + "' (expected ETDRK4 or IFRK4)");
}

std::string to_string(Integrator integrator) {
  return integrator == Integrator::kETDRK4 ? "ETDRK4" : "IFRK4";
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kBlowUp: return "blow-up";
    case RunStatus::kStopped: return "stopped";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(t_end >= dt)) throw InvalidArgument("t_end must be at least dt");
  if (snapshot_stride < 1) throw InvalidArgument("snapshot_stride must be >= 1");
  if (p < 2 || p > 8) throw InvalidArgument("p must be in [2, 8]");
}

double SolverConfig::stability_proxy(const SpectralGrid& grid) const {
  double worst = 0.0;
  for (int r = 0; r < grid.n1(); ++r) {
    if (r == grid.n1() / 2) continue;
    const double k1 = grid.k1(r);
    for (int c = 0; c < grid.spectral_cols() - 1; ++c) {
      const double k2 = grid.k2(c);
      worst = std::max(worst, std::abs(k1) * (k1 * k1 + k2 * k2));
    }
  }
  return dt * worst;
}

Stepper::Stepper(const SpectralGrid& grid, const SolverConfig& config)
    : grid_(grid),
      p_(config.p),
      dt_(config.dt),
      integrator_(config.integrator),
      nonlinear_(config.nonlinear) {
  config.validate();
  const std::size_t n = grid.spectral_size();
  e_.resize(n);
  e2_.resize(n);
  ik1_.resize(n);
  if (integrator_ == Integrator::kETDRK4) {
    q_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    f3_.resize(n);
  }
  const int cols = grid.spectral_cols();
  std::vector<Complex> roots(kContourPoints);
  for (int j = 0; j < kContourPoints; ++j) {
    const double theta = 2.0 * std::numbers::pi * (j + 0.5) / kContourPoints;
    roots[j] = std::polar(1.0, theta);
  }
  for (int r = 0; r < grid.n1(); ++r) {
    const double k1 = grid.k1(r);
    for (int c = 0; c < cols; ++c) {
      const double k2 = grid.k2(c);
      const std::size_t idx = static_cast<std::size_t>(r) * cols + c;
      const bool nyquist = r == grid.n1() / 2 || c == cols - 1;
      ik1_[idx] = nyquist ? 0.0 : k1;
      const Complex lin(0.0, nyquist ? 0.0 : k1 * (k1 * k1 + k2 * k2));
      const Complex lh = lin * dt_;
      e_[idx] = std::exp(lh);
      e2_[idx] = std::exp(0.5 * lh);
      if (integrator_ != Integrator::kETDRK4) continue;
      // Kassam-Trefethen contour means of the phi-type functions.
      Complex q(0.0), a(0.0), b(0.0), cc(0.0);
      for (const Complex& root : roots) {
        const Complex z = lh + root;
        const Complex ez = std::exp(z);
        const Complex z3 = z * z * z;
        q += (std::exp(0.5 * z) - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        cc += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      const double scale = dt_ / kContourPoints;
      // For real-symmetric input the means are real; here lh is imaginary,
      // so keep the complex mean.
      q_[idx] = q * scale;
      f1_[idx] = a * scale;
      f2_[idx] = b * scale;
      f3_[idx] = cc * scale;
    }
  }
}

ComplexSpectrum2D Stepper::nonlinear_term(const ComplexSpectrum2D& spec) const {
  ComplexSpectrum2D out(grid_);
  if (!nonlinear_) return out;
  const auto power = dealiased_power(spec, p_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = Complex(0.0, -ik1_[k]) * power[k];
  return out;
}

void Stepper::advance(ComplexSpectrum2D& v) const {
  const std::size_t n = v.size();
  if (integrator_ == Integrator::kETDRK4) {
    const auto nv = nonlinear_term(v);
    ComplexSpectrum2D a(grid_);
    for (std::size_t k = 0; k < n; ++k) a[k] = e2_[k] * v[k] + q_[k] * nv[k];
    const auto na = nonlinear_term(a);
    ComplexSpectrum2D b(grid_);
    for (std::size_t k = 0; k < n; ++k) b[k] = e2_[k] * v[k] + q_[k] * na[k];
    const auto nb = nonlinear_term(b);
    ComplexSpectrum2D c(grid_);
    for (std::size_t k = 0; k < n; ++k) c[k] = e2_[k] * a[k] + q_[k] * (2.0 * nb[k] - nv[k]);
    const auto nc = nonlinear_term(c);
    for (std::size_t k = 0; k < n; ++k)
      v[k] = e_[k] * v[k] + f1_[k] * nv[k] + 2.0 * f2_[k] * (na[k] + nb[k]) + f3_[k] * nc[k];
  } else {
    const double h = dt_;
    const auto k1 = nonlinear_term(v);
    ComplexSpectrum2D w(grid_);
    for (std::size_t k = 0; k < n; ++k) w[k] = e2_[k] * (v[k] + 0.5 * h * k1[k]);
    const auto k2 = nonlinear_term(w);
    for (std::size_t k = 0; k < n; ++k) w[k] = e2_[k] * v[k] + 0.5 * h * k2[k];
    const auto k3 = nonlinear_term(w);
    for (std::size_t k = 0; k < n; ++k) w[k] = e_[k] * v[k] + h * e2_[k] * k3[k];
    const auto k4 = nonlinear_term(w);
    for (std::size_t k = 0; k < n; ++k)
      v[k] = e_[k] * v[k] +
             h / 6.0 * (e_[k] * k1[k] + 2.0 * e2_[k] * (k2[k] + k3[k]) + k4[k]);
  }
  v.zero_nyquist();
}

EvolutionState step(const EvolutionState& state, const SolverConfig& config) {
  const Stepper stepper(state.u.grid(), config);
  auto spec = transform_forward(state.u);
  spec.zero_nyquist();
  stepper.advance(spec);
  EvolutionState out;
  out.t = state.t + config.dt;
  out.step_count = state.step_count + 1;
  if (!all_finite(spec)) {
    throw BlowUpError("non-finite solution at t = " + std::to_string(out.t), out.t,
                      std::numeric_limits<double>::infinity());
  }
  out.u = transform_inverse(spec);
  return out;
}

Conserved conserved_quantities(const RealField2D& u, int p) {
  return {mass(u), energy(u, p)};
}

double line_integral_invariance(const std::vector<RealField2D>& series) {
  if (series.size() < 2) throw InvalidArgument("line_integral_invariance needs >= 2 snapshots");
  const auto base = row_integrals_x1(series.front());
  double worst = 0.0;
  for (std::size_t s = 1; s < series.size(); ++s) {
    const auto rows = row_integrals_x1(series[s]);
    if (rows.size() != base.size()) throw GridMismatch("snapshots live on different grids");
    for (std::size_t j = 0; j < rows.size(); ++j)
      worst = std::max(worst, std::abs(rows[j] - base[j]));
  }
  return worst;
}

ThresholdReport threshold_report(const RealField2D& u0, const GroundState& ground) {
  const int k = ground.p - 1;
  ThresholdReport rep;
  rep.s = 1.0 - 2.0 / k;
  const double s = rep.s;
  const auto signed_pow = [](double x, double e) {
    return x < 0.0 ? -std::pow(-x, e) : std::pow(x, e);
  };
  const double eu = energy(u0, ground.p);
  const double mu = mass(u0);
  const double eq = ground.energy;
  const double mq = ground.mass;
  rep.energy_nonnegative = eu >= 0.0;
  rep.mass_energy_ratio =
      signed_pow(eu, s) * std::pow(mu, 1.0 - s) / (signed_pow(eq, s) * std::pow(mq, 1.0 - s));
  const double gu = std::sqrt(gradient_norm_squared(u0));
  const double gq = std::sqrt(gradient_norm_squared(ground.profile));
  rep.gradient_ratio = std::pow(gu, s) * std::pow(std::sqrt(mu), 1.0 - s) /
                       (std::pow(gq, s) * std::pow(std::sqrt(mq), 1.0 - s));
  rep.below_mass_energy = rep.mass_energy_ratio < 1.0;
  rep.below_gradient = rep.gradient_ratio < 1.0;
  return rep;
}

RunResult evolve(const RealField2D& u0, const SolverConfig& config, const RunOptions& options) {
  config.validate();
  if (!u0.all_finite()) throw NonFiniteValue("initial data is not finite");
  const SpectralGrid& grid = u0.grid();
  const double interval = config.snapshot_stride * config.dt;
  // The last segment is shortened when t_end is not a whole number of
  // snapshot intervals.
  const long total_steps = std::max(1L, std::lround(config.t_end / config.dt));
  const long total_segments = (total_steps + config.snapshot_stride - 1) / config.snapshot_stride;

  RunResult result;
  auto spec = transform_forward(u0);
  spec.zero_nyquist();

  auto record_of = [&](double t, const RealField2D& u) {
    SeriesRecord rec;
    rec.t = t;
    const auto c = conserved_quantities(u, config.p);
    rec.mass = c.mass;
    rec.energy = c.energy;
    rec.h1norm = h1_norm(u);
    return rec;
  };

  EvolutionState state;
  state.t = 0.0;
  state.u = transform_inverse(spec);
  state.step_count = 0;
  const SeriesRecord first = record_of(0.0, state.u);
  const double e0 = first.energy;
  const double escale = std::max(std::abs(e0), 1e-300);
  result.series.push_back(first);
  if (options.on_snapshot && !options.on_snapshot(state, first)) {
    result.status = RunStatus::kStopped;
    result.final_state = state;
    result.final_dt = config.dt;
    return result;
  }

  SolverConfig cfg = config;
  auto stepper = std::make_unique<Stepper>(grid, cfg);
  int refine = 1;  // 2^halvings

  for (long seg = 1; seg <= total_segments; ++seg) {
    const long base = std::min<long>(config.snapshot_stride, total_steps - (seg - 1) * config.snapshot_stride);
    const double t_target = base == config.snapshot_stride ? seg * interval : total_steps * config.dt;
    bool accepted = false;
    while (!accepted) {
      ComplexSpectrum2D work = spec;
      const int substeps = static_cast<int>(base) * refine;
      bool blown = false;
      double h1 = 0.0;
      double t_blow = 0.0;
      for (int s = 0; s < substeps; ++s) {
        stepper->advance(work);
        const double t_now = (seg - 1) * interval + (s + 1) * cfg.dt;
        h1 = all_finite(work) ? std::sqrt(spectral_h1_squared(work))
                              : std::numeric_limits<double>::infinity();
        if (!std::isfinite(h1) || (options.blowup_h1 > 0.0 && h1 > options.blowup_h1)) {
          blown = true;
          t_blow = t_now;
          break;
        }
      }
      if (blown) {
        result.status = RunStatus::kBlowUp;
        result.blowup_time = t_blow;
        result.blowup_h1 = h1;
        result.final_state = state;
        result.final_dt = cfg.dt;
        return result;
      }
      RealField2D u = transform_inverse(work);
      SeriesRecord rec = record_of(t_target, u);
      const double drift = std::abs(rec.energy - e0) / escale;
      if (drift > options.energy_drift_tol && result.halvings < options.max_halvings) {
        ++result.halvings;
        cfg.dt *= 0.5;
        refine *= 2;
        stepper = std::make_unique<Stepper>(grid, cfg);
        continue;
      }
      spec = std::move(work);
      state.t = t_target;
      state.u = std::move(u);
      state.step_count += substeps;
      result.series.push_back(rec);
      accepted = true;
      if (options.on_snapshot && !options.on_snapshot(state, rec)) {
        result.status = RunStatus::kStopped;
        result.final_state = state;
        result.final_dt = cfg.dt;
        return result;
      }
    }
  }
  result.final_state = state;
  result.final_dt = cfg.dt;
  return result;
}

}  // namespace gzk
