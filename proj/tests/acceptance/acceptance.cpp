// One PASS/FAIL verdict line per acceptance criterion:
//   acceptance --criterion k [--work-dir DIR]
// Individual checks print as "  [ok]" / "  [no]" lines above the verdict.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gzk/config.hpp"
#include "gzk/diagnostics.hpp"
#include "gzk/errors.hpp"
#include "gzk/evolution.hpp"
#include "gzk/functionals.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/harness.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"
#include "gzk/spectral.hpp"
#include "radial_oracle.hpp"

using namespace gzk;
namespace fs = std::filesystem;

namespace {

class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    fmt::print("  [{}] {}\n", ok ? "ok" : "no", what);
    std::fflush(stdout);
    all_ = all_ && ok;
  }
  void note(const std::string& what) {
    fmt::print("  {}\n", what);
    std::fflush(stdout);
  }
  bool ok() const { return all_; }

 private:
  bool all_ = true;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const GroundState> ground(int p, int n, double box) {
  return std::make_shared<const GroundState>(solve_ground_state(p, SpectralGrid(n, box)));
}


double order(double coarse, double fine) { return std::log2(coarse / fine); }

// ---------------------------------------------------------------------------

void criterion_1(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto q = ground(4, 256, 32.0);
  const double m = mass(q->profile);
  const double rel_res = q->residual / l2_norm(q->profile);
  v.check(rel_res < 1e-10, fmt::format("equation residual {:.3e} (|.|_2), {:.3e} relative to |Q|_2 < 1e-10",
                                       q->residual, rel_res));
  const double poh = integrate_power(q->profile, 5) / gradient_norm_squared(q->profile);
  v.check(std::abs(poh - 5.0 / 3) < 1e-8, fmt::format("int Q^5 / int |grad Q|^2 = {:.12f} (5/3 within 1e-8)", poh));
  const double ratio = inner(q->profile, lambda_apply(q->profile, 4)) / m;
  v.check(std::abs(ratio + 1.0 / 6) < 1e-6, fmt::format("(Q, Lambda Q)/(Q, Q) = {:.12f} (-1/6 within 1e-6)", ratio));
  const auto ref = oracle::shoot_ground_state(4);
  v.check(std::abs(q->peak() - ref.q0) < 1e-5,
          fmt::format("Q(0) = {:.10f}, radial oracle {:.10f}", q->peak(), ref.q0));
  v.check(check_ground_state(*q).ok(), "positive, radially monotone, decayed");
  const double secs = seconds_since(t0);
  v.note(fmt::format("runtime {:.1f} s (target < 60 s)", secs));
}

void criterion_2(Verdict& v) {
  // x.grad Q is not periodic; the L(Lambda Q) = -Q identity needs a larger
  // box than the default to reach 1e-6, and the finer grid keeps it resolved.
  const auto t0 = std::chrono::steady_clock::now();
  const auto q = ground(4, 512, 40.0);
  const LinearizedOperator op(q);
  const auto pairs = lowest_spectrum(op, 3);
  const auto cls = classify_spectrum(pairs, 1e-6);
  v.note(fmt::format("grid 512^2, box 40; eigenvalues {:.10f} {:.3e} {:.3e}", pairs[0].eigenvalue,
                     pairs[1].eigenvalue, pairs[2].eigenvalue));
  v.check(cls.negative == 1, fmt::format("negative eigenvalues: {}", cls.negative));
  const ModulationBasis b = ModulationBasis::build(q);
  const double angle = subspace_angle({pairs[1].eigenfunction, pairs[2].eigenfunction}, {b.q1, b.q2});
  v.check(angle < 1e-4, fmt::format("kernel angle to span(Q_x1, Q_x2) {:.3e} < 1e-4", angle));
  RealField2D r = op.apply(lambda_apply(q->profile, 4));
  r += q->profile;
  const double rel = l2_norm(r) / l2_norm(q->profile);
  v.check(rel < 1e-6, fmt::format("|L(Lambda Q) + Q| / |Q| = {:.3e} < 1e-6", rel));
  const double lam_ref = oracle::shoot_lambda0(oracle::shoot_ground_state(4));
  const double lam0 = -pairs[0].eigenvalue;
  v.check(std::abs(lam0 - lam_ref) / lam_ref < 1e-4,
          fmt::format("lambda0 = {:.10f}, radial oracle {:.10f}", lam0, lam_ref));
  const double beta4 = compute_beta(*q, pairs[0].eigenfunction);
  v.check(beta4 > 0.0, fmt::format("beta(p=4) = {:.8f} > 0", beta4));

  for (int p : {5, 3}) {
    const auto qp = ground(p, 256, 32.0);
    const LinearizedOperator opp(qp);
    const auto chi = lowest_spectrum(opp, 1).front();
    const auto ref = oracle::shoot_lambda0(oracle::shoot_ground_state(p));
    v.note(fmt::format("p = {}: lambda0 = {:.8f} (oracle {:.8f})", p, -chi.eigenvalue, ref));
    // beta's numerator alone: compute_beta refuses a non-positive denominator,
    // which cannot happen for the sign-normalised chi0.
    const double beta = compute_beta(*qp, chi.eigenfunction);
    if (p == 5) {
      v.check(beta > 0.0, fmt::format("beta(p=5) = {:.8f} > 0", beta));
    } else {
      v.check(std::abs(beta) <= 1e-4, fmt::format("|beta(p=3)| = {:.3e} <= 1e-4", std::abs(beta)));
    }
  }
  v.note(fmt::format("runtime {:.1f} s (target < 600 s)", seconds_since(t0)));
}

void criterion_3(Verdict& v) {
  const auto q = ground(4, 256, 32.0);
  const LinearizedOperator op(q);
  const auto chi = lowest_spectrum(op, 1).front();
  CoercivityOptions opts;
  opts.trials = 1000;
  try {
    const auto est = estimate_coercivity(op, chi, opts);
    v.note(fmt::format("sigma0 = {:.6f}, k1 = {:.6f}, k2 = {:.6f}, worst normalised margin {:.4e}",
                       est.sigma0_hat, est.k1_hat, est.k2_hat, est.worst_margin));
    v.check(est.sigma0_hat > 0.0, "sigma0 > 0");
    v.check(est.trials == 1000 && est.violations == 0,
            fmt::format("{} trials, {} violations", est.trials, est.violations));
  } catch (const Error& e) {
    v.check(false, std::string("coercivity: ") + e.what());
  }
}

void criterion_4(Verdict& v) {
  const auto q = ground(4, 256, 32.0);

  // Temporal order on u_{0,10} against a much finer reference. Larger steps
  // sit in the stiff pre-asymptotic regime of the dispersive high modes.
  {
    const RealField2D u0 = unstable_initial_data(*q, 10);
    auto run = [&](double dt) {
      SolverConfig c;
      c.dt = dt;
      c.t_end = 0.025;
      c.snapshot_stride = 1 << 20;
      RunOptions o;
      o.max_halvings = 0;
      return evolve(u0, c, o).final_state.u;
    };
    const RealField2D ref = run(3.125e-4 / 32);
    std::vector<double> err;
    for (double dt : {3.125e-4, 1.5625e-4, 7.8125e-5}) {
      RealField2D d = run(dt);
      d -= ref;
      err.push_back(l2_norm(d));
      v.note(fmt::format("dt {:.4e}: |u - u_ref| = {:.4e}", dt, err.back()));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double ratio = err[i - 1] / err[i];
      v.check(ratio >= 12.0 && ratio <= 20.0, fmt::format("error ratio {:.2f} in [12, 20]", ratio));
    }
  }

  // Conservation and travelling speed of Q over t in [0, 10].
  SolverConfig c;
  c.dt = 2.5e-4;
  c.t_end = 10.0;
  c.snapshot_stride = 2000;  // every 0.5
  RunOptions o;
  o.max_halvings = 0;
  std::vector<RealField2D> snaps;
  double y1_at_5 = 0.0;
  o.on_snapshot = [&](const EvolutionState& s, const SeriesRecord&) {
    snaps.push_back(s.u);
    if (std::abs(s.t - 5.0) < 1e-9) y1_at_5 = tube_distance(s.u, *q, 5.0).y1;
    return true;
  };
  const auto r = evolve(q->profile, c, o);
  double mdrift = 0.0, edrift = 0.0;
  for (const auto& rec : r.series) {
    mdrift = std::max(mdrift, std::abs(rec.mass - r.series.front().mass) / r.series.front().mass);
    edrift = std::max(edrift, std::abs(rec.energy - r.series.front().energy) / std::abs(r.series.front().energy));
  }
  const double row = line_integral_invariance(snaps);
  v.check(r.status == RunStatus::kCompleted && std::abs(r.final_state.t - 10.0) < 1e-9, "run reached t = 10");
  v.check(mdrift <= 1e-8, fmt::format("relative mass drift {:.3e} <= 1e-8", mdrift));
  v.check(edrift <= 1e-7, fmt::format("relative energy drift {:.3e} <= 1e-7", edrift));
  v.check(row <= 1e-9, fmt::format("per-row integral drift {:.3e} <= 1e-9", row));
  v.check(std::abs(y1_at_5 - 5.0) < 0.05, fmt::format("y1(5) = {:.6f}, |y1(5) - 5| < 0.05", y1_at_5));
}

// Tracks of u_{0,10} sampled every solver step around t*, for a dt ladder.
struct LadderPoint {
  double dt = 0.0;
  double max_ortho = 0.0;
  double eps_residual = 0.0;
  double y_mismatch = 0.0;
  double dJ_mismatch = 0.0;
  double t = 0.0;
};

std::vector<LadderPoint> ladder(const std::shared_ptr<const GroundState>& q, const VirialKernel& kernel,
                                const ModulationBasis& basis) {
  const double tstar = 0.01;
  const RealField2D u0 = unstable_initial_data(*q, 10);
  std::vector<LadderPoint> out;
  for (double dt : {2.5e-4, 1.25e-4, 6.25e-5, 3.125e-5}) {
    std::vector<RealField2D> snaps;
    std::vector<double> times;
    SolverConfig c;
    c.dt = dt;
    c.t_end = tstar + 3 * dt;
    c.snapshot_stride = 1;
    RunOptions o;
    o.max_halvings = 0;
    o.on_snapshot = [&](const EvolutionState& s, const SeriesRecord&) {
      if (s.t > tstar - 3.5 * dt) {
        snaps.push_back(s.u);
        times.push_back(s.t);
      }
      return true;
    };
    evolve(u0, c, o);
    const auto tr = track(snaps, times, basis);
    LadderPoint lp;
    lp.dt = dt;
    for (const auto& p : tr.points) lp.max_ortho = std::max({lp.max_ortho, std::abs(p.ortho1), std::abs(p.ortho2)});
    const std::size_t k = 3;  // the sample at t*
    lp.t = tr.points.at(k).t;
    for (const auto& e : epsilon_equation_residual(tr, basis, 2))
      if (e.t == lp.t) lp.eps_residual = e.absolute;
    for (const auto& p : parameter_control_check(tr, basis, 2).points)
      if (p.t == lp.t) lp.y_mismatch = std::hypot(p.y1p_system - p.y1p_fd, p.y2p_system - p.y2p_fd);
    const auto d = diagnose_track(tr, kernel, basis);
    lp.dJ_mismatch = std::abs(d.at(k).dJdt_fd - d.at(k).dJdt_formula);
    out.push_back(lp);
  }
  return out;
}

struct Setup {
  std::shared_ptr<const GroundState> q;
  EigenPair chi0;
  VirialKernel kernel;
  ModulationBasis basis;
};

Setup setup4() {
  Setup s;
  s.q = ground(4, 256, 32.0);
  s.chi0 = lowest_spectrum(LinearizedOperator(s.q), 1).front();
  s.kernel = build_virial_kernel(*s.q, s.chi0);
  s.basis = ModulationBasis::build(s.q);
  return s;
}

void check_order(Verdict& v, const std::vector<LadderPoint>& lad, double LadderPoint::*field,
                 const std::string& what) {
  for (const auto& p : lad) v.note(fmt::format("dt {:.4e}: {} {:.4e}", p.dt, what, p.*field));
  // the two finest halvings must show second order
  for (std::size_t i = lad.size() - 2; i < lad.size(); ++i) {
    const double o = order(lad[i - 1].*field, lad[i].*field);
    v.check(o >= 1.8 && o <= 2.2, fmt::format("{}: observed order {:.3f} (2 expected)", what, o));
  }
}

void criterion_5(Verdict& v) {
  const Setup s = setup4();
  const auto lad = ladder(s.q, s.kernel, s.basis);
  double ortho = 0.0;
  for (const auto& p : lad) ortho = std::max(ortho, p.max_ortho);
  v.check(ortho < 1e-9, fmt::format("orthogonality residuals {:.3e} < 1e-9 at every point", ortho));
  check_order(v, lad, &LadderPoint::eps_residual, "eps-equation residual");
  check_order(v, lad, &LadderPoint::y_mismatch, "y' system vs finite differences");

  // eps = 0: an exactly travelling Q
  std::vector<RealField2D> snaps;
  std::vector<double> times;
  for (int i = 0; i < 7; ++i) {
    times.push_back(0.01 * i);
    snaps.push_back(shift(s.q->profile, -0.01 * i, 0.0));
  }
  const auto tr = track(snaps, times, s.basis);
  double res = 0.0;
  for (const auto& e : epsilon_equation_residual(tr, s.basis, 4)) res = std::max(res, e.absolute);
  const auto rates = solve_parameter_system(RealField2D(s.q->grid()), s.basis);
  v.check(rates.y1p == 1.0 && rates.y2p == 0.0, "eps = 0 gives y' = (1, 0) exactly");
  v.check(res < 1e-9, fmt::format("eps = 0 track: eps-equation residual {:.3e}", res));
}

void criterion_6(Verdict& v) {
  const Setup s = setup4();
  const auto lad = ladder(s.q, s.kernel, s.basis);
  check_order(v, lad, &LadderPoint::dJ_mismatch, "|dJ/dt (differences) - dJ/dt (formula)|");

  const LinearizedOperator op(s.q);
  const std::vector<double> sv{0.2, 0.1, 0.05, 0.025, 0.0125};
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto rep = weinstein_expansion_check(*s.q, op, random_smooth_field(s.q->grid(), seed, 1.0), sv);
    v.check(std::abs(rep.slope - 3.0) <= 0.2,
            fmt::format("Weinstein remainder slope {:.3f} (seed {}), 3.0 +- 0.2", rep.slope, seed));
  }

  const SpectralGrid& g = s.q->grid();
  bool sym = true, half = true, third = true;
  for (double M : {1.0, 2.0, 4.0, 8.0}) {
    const WeightProfile w(M);
    half = half && w.psi(0.0) == 0.5;
    for (int i = 0; i < g.n1(); ++i) {
      const double x = g.x1(i);
      sym = sym && w.psi(-x) == 1.0 - w.psi(x);
      third = third && std::abs(w.d3psi(x)) <= w.dpsi(x) / (M * M);
    }
  }
  v.check(half, "psi(0) = 1/2 exactly");
  v.check(sym, "psi(-x) = 1 - psi(x) exactly at every node");
  v.check(third, "|psi'''| <= psi'/M^2 at every node");
}

ExperimentConfig campaign_config(const fs::path& dir) {
  ExperimentConfig c;
  c.output_dir = dir.string();
  return c;
}

void criterion_7(Verdict& v, const fs::path& work) {
  ExperimentConfig c = campaign_config(work / "monotonicity");
  c.n_values = {10};
  c.M = 4.0;
  c.x0_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  c.coercivity = false;
  const auto rep = run_instability_campaign(c);
  const auto& r = rep.runs.at(0);
  v.check(r.error.empty(), "run completed without library errors" + (r.error.empty() ? "" : ": " + r.error));
  v.check(r.monotonicity_samples > 0, fmt::format("{} (x0, t0) samples in the valid window", r.monotonicity_samples));
  v.check(r.monotonicity_pass, fmt::format("I(t0) - I(t) <= theta e^(-x0/M), theta = {:.3e}, fitted rate {:.3f} (>= {:.3f})",
                                           r.monotonicity_theta, r.monotonicity_rate, 1.0 / (2 * c.M)));
  v.check(r.decay_pass, fmt::format("eps right-mass decay rate {:.3f} >= 1/(2M) = {:.3f}", r.eps_decay_rate_min,
                                    1.0 / (2 * c.M)));
}

void criterion_8(Verdict& v, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_instability_campaign(campaign_config(work / "campaign"), &std::cout);
  v.check(rep.runs.size() == 3, "runs for n = 5, 10, 20");
  for (const auto& r : rep.runs) {
    v.check(r.error.empty(), fmt::format("n = {}: no library error {}", r.n, r.error));
    v.check(r.valid, fmt::format("n = {}: conservation gate (mass drift {:.2e})", r.n, r.mass_drift));
    v.check(r.exit.exited && r.exit.time < 80.0,
            fmt::format("n = {}: T_n = {:.4f} ({})", r.n, r.exit.time, r.exit.cause));
    v.check(r.dJdt_sign_definite && r.a0 > 0.0,
            fmt::format("n = {}: dJ/dt sign-definite (sign {}), a0 = {:.4e}", r.n, r.dJdt_sign, r.a0));
    for (const auto& b : r.band)
      v.check(b.exited, fmt::format("n = {}: alpha = {:.2f} exits at {:.4f} ({})", r.n, b.alpha, b.time, b.cause));
  }
  v.check(rep.trend_monotone, "T_5 <= T_10 <= T_20");
  v.check(rep.alpha_stable, "verdict stable over the alpha band");
  v.check(rep.instability_confirmed, "instability confirmed");
  v.note(fmt::format("runtime {:.1f} s (target < 2 h)", seconds_since(t0)));
}

std::vector<std::string> tree_differences(const fs::path& a, const fs::path& b) {
  std::vector<std::string> diff;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (rel == "config.txt") continue;  // records output_dir
    ++files;
    if (!fs::exists(b / rel)) {
      diff.push_back("missing " + rel.string());
    } else if (slurp(e.path()) != slurp(b / rel)) {
      diff.push_back("differs " + rel.string());
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b)))
      diff.push_back("extra " + fs::relative(e.path(), b).string());
  if (files == 0) diff.push_back("no files produced");
  return diff;
}

void criterion_9(Verdict& v, const fs::path& work) {
  ::unsetenv("GZK_THREADS");
  v.check(worker_slots() == 1, "single-thread mode");
  fs::remove_all(work / "rerun_a");
  fs::remove_all(work / "rerun_b");
  ExperimentConfig a = campaign_config(work / "rerun_a");
  ExperimentConfig b = campaign_config(work / "rerun_b");
  run_instability_campaign(a);
  run_instability_campaign(b);
  // summary.json embeds the config, including output_dir; compare it with
  // that field aligned.
  auto strip = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string s(std::istreambuf_iterator<char>(in), {});
    RunReport r = parse_summary_json(s);
    r.config.output_dir.clear();
    return summary_json(r);
  };
  const bool json_same = strip(work / "rerun_a" / "summary.json") == strip(work / "rerun_b" / "summary.json");
  auto diff = tree_differences(work / "rerun_a", work / "rerun_b");
  std::erase_if(diff, [](const std::string& d) { return d == "differs summary.json"; });
  for (const auto& d : diff) v.note(d);
  v.check(diff.empty(), "every output file byte-identical across re-runs");
  v.check(json_same, "summary.json identical apart from output_dir");
  const auto rc = reproduce_check(work / "rerun_a", a, 10);
  v.check(rc.comparable && rc.identical, "reproduce_check re-run of n = 10 byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gZK acceptance criteria"};
  int criterion = 0;
  std::string work = "acceptance_work";
  app.add_option("--criterion", criterion, "Criterion number 1-9")->required()->check(CLI::Range(1, 9));
  app.add_option("--work-dir", work, "Scratch directory for campaign outputs");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  Verdict v;
  try {
    switch (criterion) {
      case 1: criterion_1(v); break;
      case 2: criterion_2(v); break;
      case 3: criterion_3(v); break;
      case 4: criterion_4(v); break;
      case 5: criterion_5(v); break;
      case 6: criterion_6(v); break;
      case 7: criterion_7(v, work); break;
      case 8: criterion_8(v, work); break;
      case 9: criterion_9(v, work); break;
    }
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  fmt::print("criterion {}: {}\n", criterion, v.ok() ? "PASS" : "FAIL");
  return v.ok() ? 0 : 1;
}
