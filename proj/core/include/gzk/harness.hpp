#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gzk/config.hpp"
#include "gzk/diagnostics.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"

namespace gzk {

/// Shared immutable inputs of every run in a campaign.
struct CampaignContext {
  std::shared_ptr<const GroundState> ground;
  EigenPair chi0;
  VirialKernel kernel;
  ModulationBasis basis;
  double q_h1 = 0.0;
  /// integral(Q Lambda Q) / integral(Q^2).
  double lambda_ratio = 0.0;
  std::optional<CoercivityEstimates> coercivity;
};

CampaignContext prepare_context(const ExperimentConfig& config);

/// Exit taxonomy: "distance", "modulation-failure", "blow-up", or "none"
/// (no exit by t_max).
struct AlphaExit {
  double alpha = 0.0;  // units of |Q|_{H1}
  bool exited = false;
  double time = 0.0;
  std::string cause = "none";
};

struct RunSummary {
  int n = 0;
  double lambda = 1.0;
  /// Tube distances are in units of |Q|_{H1}.
  double initial_distance = 0.0;
  double max_tube_distance = 0.0;
  AlphaExit exit;
  std::vector<AlphaExit> band;
  std::string status;  // completed | blow-up | stopped
  double t_end = 0.0;
  double blowup_time = -1.0;
  double modulation_stop_time = -1.0;
  std::string modulation_stop_reason;
  int modulation_points = 0;
  // dJ/dt over the modulation window.
  bool dJdt_sign_definite = false;
  int dJdt_sign = 0;
  double a0 = 0.0;
  double max_abs_J = 0.0;
  double J_slope = 0.0;
  double mean_dJdt = 0.0;
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  bool valid = false;
  bool monotonicity_pass = false;
  double monotonicity_theta = 0.0;
  double monotonicity_rate = 0.0;
  int monotonicity_samples = 0;
  double eps_decay_rate_min = 0.0;
  bool decay_pass = false;
  int snapshots = 0;
  std::string error;  // non-empty when the run aborted on a library error
};

struct RunReport {
  ExperimentConfig config;
  double q0 = 0.0;
  double q_h1 = 0.0;
  double ground_residual = 0.0;
  double lambda0 = 0.0;
  double beta = 0.0;
  double lambda_ratio = 0.0;
  /// Negative when coercivity estimation was disabled.
  double sigma0 = -1.0;
  std::vector<RunSummary> runs;
  /// T_n non-decreasing in n over valid exited runs.
  bool trend_monotone = false;
  /// Every run exits for every alpha in the band.
  bool alpha_stable = false;
  bool instability_confirmed = false;
};

/// Runs every n (GZK_THREADS worker slots, default one) and writes
/// <output_dir>/n<k>/ plus summary.json and summary.txt. Per-run errors are
/// recorded in RunSummary::error.
RunReport run_instability_campaign(const ExperimentConfig& config, std::ostream* log = nullptr);

/// One run into `dir` (created). Exposed for the reproducibility check.
RunSummary run_single(const ExperimentConfig& config, const CampaignContext& ctx, int n,
                      const std::filesystem::path& dir, std::ostream* log = nullptr);

/// Worker slots from GZK_THREADS (1 when unset or invalid).
int worker_slots();

std::string summary_json(const RunReport& report);
RunReport parse_summary_json(const std::string& text);
/// Empty when the document satisfies the summary schema.
std::vector<std::string> validate_summary_json(const std::string& text);
/// Theory-to-numbers table.
std::string summary_text(const RunReport& report);
void export_summary(const RunReport& report, const std::filesystem::path& dir);

struct ReproduceResult {
  bool comparable = false;
  bool identical = false;
  std::vector<std::string> differences;
};

/// Re-runs `n` (the first configured n when n < 0) single-threaded into a
/// scratch directory and compares every CSV byte for byte with the prior
/// report in `report_dir`. Configs differing in run-affecting fields are
/// reported as non-comparable without running.
ReproduceResult reproduce_check(const std::filesystem::path& report_dir,
                                const ExperimentConfig& config, int n = -1);

}  // namespace gzk
