#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gzk {

/// Campaign settings. Field names double as the keys of the flat
/// `key = value` config format; lists are comma separated.
struct ExperimentConfig {
  int p = 4;
  std::vector<int> n_values{5, 10, 20};
  int grid_n = 256;
  double box = 32.0;
  double dt = 5e-4;
  double t_max = 80.0;
  /// Tube radius in units of |Q|_{H1}.
  double alpha = 0.1;
  /// Radii (units of |Q|_{H1}) the exit verdict must be stable over.
  std::vector<double> alpha_band{0.05, 0.1, 0.2};
  double M = 4.0;
  std::vector<double> x0_grid{2, 4, 6, 8, 10, 12};
  int snapshot_stride = 20;
  /// Every k-th snapshot is written as a .gzkf file.
  int write_every = 10;
  std::uint64_t seed = 1;
  std::string output_dir = "campaign";
  std::string integrator = "etdrk4";
  double ground_tol = 1e-10;
  double tube_heuristic = 0.5;
  double mass_gate = 1e-6;
  double energy_drift_tol = 1e-6;
  /// Blow-up once |u|_{H1} exceeds this multiple of |Q|_{H1}.
  double blowup_factor = 10.0;
  /// Stop a run once the tube distance exceeds this multiple of the largest
  /// band radius and modulation has stopped.
  double overshoot = 1.5;
  bool coercivity = true;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

/// Names of run-affecting fields that differ (seed and output_dir excluded).
std::vector<std::string> incomparable_fields(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace gzk
