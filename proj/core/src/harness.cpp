#include "gzk/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gzk/csv.hpp"
#include "gzk/errors.hpp"
#include "gzk/evolution.hpp"
#include "gzk/field_io.hpp"
#include "gzk/functionals.hpp"
#include "gzk/spectral.hpp"

namespace gzk {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kWindowMargin = 2.0;

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void say(std::ostream* log, const std::string& msg) {
  if (!log) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  *log << msg << '\n' << std::flush;
}

std::vector<double> band_of(const ExperimentConfig& c) {
  std::vector<double> b = c.alpha_band;
  if (std::find(b.begin(), b.end(), c.alpha) == b.end()) b.push_back(c.alpha);
  std::sort(b.begin(), b.end());
  return b;
}

struct Track {
  std::vector<double> t, dist, ty1, ty2;
};

// First crossing of alpha; a modulation failure or blow-up earlier wins.
AlphaExit exit_for(double alpha, const Track& tube, double mod_stop, double blowup) {
  AlphaExit e;
  e.alpha = alpha;
  for (std::size_t i = 0; i < tube.t.size(); ++i) {
    if (tube.dist[i] > alpha) {
      e.exited = true;
      e.time = tube.t[i];
      e.cause = "distance";
      break;
    }
  }
  if (mod_stop >= 0.0 && (!e.exited || mod_stop < e.time)) {
    e.exited = true;
    e.time = mod_stop;
    e.cause = "modulation-failure";
  }
  if (blowup >= 0.0 && (!e.exited || blowup < e.time)) {
    e.exited = true;
    e.time = blowup;
    e.cause = "blow-up";
  }
  return e;
}

Json exit_json(const AlphaExit& e) {
  Json j;
  j["alpha"] = e.alpha;
  j["exited"] = e.exited;
  j["time"] = e.exited ? Json(e.time) : Json(nullptr);
  j["cause"] = e.cause;
  return j;
}

AlphaExit exit_from(const Json& j) {
  AlphaExit e;
  e.alpha = j.at("alpha").get<double>();
  e.exited = j.at("exited").get<bool>();
  e.time = j.at("time").is_null() ? 0.0 : j.at("time").get<double>();
  e.cause = j.at("cause").get<std::string>();
  return e;
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double from_nullable(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

int worker_slots() {
  const char* env = std::getenv("GZK_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 256));
}

CampaignContext prepare_context(const ExperimentConfig& config) {
  config.validate();
  CampaignContext ctx;
  const SpectralGrid grid(config.grid_n, config.box);
  PetviashviliOptions po;
  po.tol = config.ground_tol;
  ctx.ground = std::make_shared<const GroundState>(solve_ground_state(config.p, grid, po));
  const LinearizedOperator op(ctx.ground);
  auto pairs = lowest_spectrum(op, 1);
  if (pairs.empty() || !(pairs.front().eigenvalue < 0.0)) {
    throw Error("no negative eigenvalue found for the linearized operator");
  }
  ctx.chi0 = pairs.front();
  ctx.kernel = build_virial_kernel(*ctx.ground, ctx.chi0);
  ctx.basis = ModulationBasis::build(ctx.ground);
  ctx.q_h1 = h1_norm(ctx.ground->profile);
  const RealField2D& q = ctx.ground->profile;
  ctx.lambda_ratio = inner(q, lambda_apply(q, config.p)) / inner(q, q);
  if (config.coercivity) {
    CoercivityOptions co;
    co.seed = config.seed;
    ctx.coercivity = estimate_coercivity(op, ctx.chi0, co);
  }
  return ctx;
}

RunSummary run_single(const ExperimentConfig& config, const CampaignContext& ctx, int n,
                      const fs::path& dir, std::ostream* log) {
  fs::create_directories(dir);
  RunSummary rs;
  rs.n = n;
  rs.lambda = n > 0 ? 1.0 + 1.0 / n : 1.0;
  const GroundState& ground = *ctx.ground;
  const SpectralGrid& grid = ground.grid();
  const RealField2D u0 = n > 0 ? unstable_initial_data(ground, n) : ground.profile;
  const auto band = band_of(config);
  const double alpha_max = band.back();
  const double xmax = *std::max_element(config.x0_grid.begin(), config.x0_grid.end());
  const double half = 0.5 * grid.l1();

  SolverConfig sc;
  sc.p = config.p;
  sc.dt = config.dt;
  sc.t_end = config.t_max;
  sc.snapshot_stride = config.snapshot_stride;
  sc.integrator = integrator_from_string(config.integrator);
  RunOptions ro;
  ro.energy_drift_tol = config.energy_drift_tol;
  ro.blowup_h1 = config.blowup_factor * ctx.q_h1;

  DecomposeOptions dopts;
  dopts.tube_heuristic = config.tube_heuristic;

  Track tube;
  std::vector<ModulationPoint> points;
  std::vector<RealField2D> window_u;
  std::vector<RunSample> window;
  bool window_open = true;
  bool modulating = true;
  int index = 0;

  CsvWriter snaps(dir / "snapshots.csv", {"index", "t"});
  CsvWriter tube_csv(dir / "tube.csv", {"t", "tube_dist", "tube_y1", "tube_y2"});

  ro.on_snapshot = [&](const EvolutionState& s, const SeriesRecord&) {
    const double near = tube.ty1.empty() ? 0.0 : tube.ty1.back();
    const TubeDistance td = tube_distance(s.u, ground, near);
    tube.t.push_back(s.t);
    tube.dist.push_back(td.distance / ctx.q_h1);
    tube.ty1.push_back(td.y1);
    tube.ty2.push_back(td.y2);
    tube_csv.row({s.t, td.distance / ctx.q_h1, td.y1, td.y2});

    if (modulating) {
      double g1 = td.y1, g2 = td.y2;
      const std::size_t m = points.size();
      if (m >= 2) {
        const auto& a = points[m - 2];
        const auto& b = points[m - 1];
        const double r = (s.t - b.t) / (b.t - a.t);
        g1 = b.y1 + r * (b.y1 - a.y1);
        g2 = b.y2 + r * (b.y2 - a.y2);
      } else if (m == 1) {
        g1 = points[0].y1 + (s.t - points[0].t);
        g2 = points[0].y2;
      }
      try {
        ModulationPoint pt = decompose(s.u, ctx.basis, g1, g2, dopts);
        pt.t = s.t;
        if (window_open && xmax + 0.5 * s.t + std::abs(pt.y1) < half - kWindowMargin) {
          window_u.push_back(s.u);
        } else {
          window_open = false;
        }
        points.push_back(std::move(pt));
      } catch (const ModulationError& e) {
        modulating = false;
        rs.modulation_stop_time = s.t;
        rs.modulation_stop_reason = e.what();
      }
    }

    if (index % config.write_every == 0) {
      save_field(dir / fmt::format("u_t{:04d}.gzkf", index / config.write_every), s.u);
      snaps.row({static_cast<double>(index / config.write_every), s.t});
    }
    ++index;

    const double d = tube.dist.back();
    if (d > config.overshoot * alpha_max && (!modulating || d > config.tube_heuristic)) return false;
    return true;
  };

  RunResult res = evolve(u0, sc, ro);
  rs.status = to_string(res.status);
  rs.t_end = res.final_state.t;
  if (res.status == RunStatus::kBlowUp) rs.blowup_time = res.blowup_time;
  if (modulating && res.status != RunStatus::kCompleted) {
    rs.modulation_stop_reason = "run ended";
  }
  rs.snapshots = static_cast<int>(tube.t.size());

  {
    CsvWriter out(dir / "series.csv", {"t", "mass", "energy", "h1norm"});
    const double m0 = res.series.front().mass;
    const double e0 = res.series.front().energy;
    for (const auto& r : res.series) {
      out.row({r.t, r.mass, r.energy, r.h1norm});
      rs.mass_drift = std::max(rs.mass_drift, std::abs(r.mass - m0) / std::abs(m0));
      rs.energy_drift =
          std::max(rs.energy_drift, std::abs(r.energy - e0) / std::max(std::abs(e0), 1e-300));
    }
  }
  rs.valid = rs.mass_drift <= config.mass_gate;
  rs.initial_distance = tube.dist.front();
  rs.max_tube_distance = *std::max_element(tube.dist.begin(), tube.dist.end());
  rs.exit = exit_for(config.alpha, tube, rs.modulation_stop_time, rs.blowup_time);
  for (double a : band) rs.band.push_back(exit_for(a, tube, rs.modulation_stop_time, rs.blowup_time));
  rs.modulation_points = static_cast<int>(points.size());

  {
    CsvWriter out(dir / "modulation.csv", {"t", "y1", "y2", "eps_l2", "eps_h1", "ortho1", "ortho2"});
    for (const auto& p : points) out.row({p.t, p.y1, p.y2, p.l2_eps, p.h1_eps, p.ortho1, p.ortho2});
  }

  // Virial diagnostics along the modulation window.
  std::vector<double> ts, Js, dJ;
  {
    CsvWriter out(dir / "diagnostics.csv",
                  {"t", "J", "dJdt_fd", "dJdt_formula", "W", "tube_dist", "y1"});
    std::vector<double> W, dist;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const auto rates = solve_parameter_system(p.eps, ctx.basis);
      ts.push_back(p.t);
      Js.push_back(virial_J(p.eps, ctx.kernel));
      dJ.push_back(dJdt_formula(p, ctx.kernel, ctx.basis, rates.y1p, rates.y2p));
      W.push_back(weinstein(ground.profile + p.eps, config.p));
      const auto it = std::lower_bound(tube.t.begin(), tube.t.end(), p.t);
      dist.push_back(tube.dist[static_cast<std::size_t>(it - tube.t.begin())]);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      double fd = std::numeric_limits<double>::quiet_NaN();
      if (i > 0 && i + 1 < points.size()) fd = (Js[i + 1] - Js[i - 1]) / (ts[i + 1] - ts[i - 1]);
      out.row({ts[i], Js[i], fd, dJ[i], W[i], dist[i], points[i].y1});
    }
  }
  if (!Js.empty()) {
    const auto b = bounded_J_check(ts, Js, dJ);
    rs.dJdt_sign_definite = b.sign_definite;
    rs.a0 = b.a0;
    rs.max_abs_J = b.max_abs_J;
    rs.J_slope = b.slope;
    rs.mean_dJdt = b.mean_formula;
    rs.dJdt_sign = b.sign_definite ? (dJ.front() > 0 ? 1 : -1) : 0;
  }

  // Almost monotonicity over snapshots inside the periodic validity window.
  {
    const WeightProfile weight(config.M);
    for (std::size_t i = 0; i < window_u.size(); ++i) {
      window.push_back({points[i].t, points[i].y1, &window_u[i]});
    }
    rs.monotonicity_samples = static_cast<int>(window.size());
    CsvWriter out(dir / "monotonicity.csv", {"t", "t0", "x0", "I"});
    if (window.size() >= 2) {
      const auto rep = almost_monotonicity_check(window, weight, config.x0_grid, kWindowMargin);
      for (const auto& r : rep.rows) out.row({r.t, r.t0, r.x0, r.I});
      rs.monotonicity_pass = rep.pass;
      rs.monotonicity_theta = rep.theta;
      rs.monotonicity_rate = rep.fitted_rate;
    }
  }

  // Right-mass decay of u (soliton frame) and of eps.
  {
    CsvWriter out(dir / "decay.csv", {"t", "x0", "right_mass_u", "right_mass_eps"});
    double min_rate = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      const RealField2D u = ground.profile + p.eps;
      std::vector<double> re;
      for (double x0 : config.x0_grid) {
        const double ru = right_mass(u, x0, 0.0);
        const double r = right_mass(p.eps, x0, 0.0);
        re.push_back(r);
        out.row({p.t, x0, ru, r});
      }
      const auto fit = fit_decay(config.x0_grid, re);
      if (fit.used >= 2) min_rate = std::min(min_rate, fit.rate);
    }
    rs.eps_decay_rate_min = std::isfinite(min_rate) ? min_rate : 0.0;
    rs.decay_pass = !points.empty() && (!std::isfinite(min_rate) || min_rate >= 0.5 / config.M);
  }

  say(log, fmt::format("n={} status={} T={} cause={} dist0={:.4f} a0={:.4g} mass_drift={:.2e}", n,
                       rs.status, rs.exit.exited ? fmt::format("{:.4f}", rs.exit.time) : "none",
                       rs.exit.cause, rs.initial_distance, rs.a0, rs.mass_drift));
  return rs;
}

namespace {

void assess(RunReport& r) {
  std::vector<const RunSummary*> family;
  for (const auto& run : r.runs)
    if (run.n > 0) family.push_back(&run);
  std::sort(family.begin(), family.end(),
            [](const RunSummary* a, const RunSummary* b) { return a->n < b->n; });
  bool trend = true, stable = !family.empty(), all_exit = !family.empty();
  double last = -1.0;
  int counted = 0;
  for (const auto* run : family) {
    if (!run->error.empty() || !run->valid) continue;
    ++counted;
    all_exit = all_exit && run->exit.exited && run->exit.time < r.config.t_max;
    for (const auto& e : run->band) stable = stable && e.exited;
    if (!run->exit.exited) continue;
    trend = trend && run->exit.time >= last;
    last = run->exit.time;
  }
  r.trend_monotone = counted > 0 && trend;
  r.alpha_stable = counted > 0 && stable;
  r.instability_confirmed = counted > 0 && all_exit && r.alpha_stable;
}

}  // namespace

RunReport run_instability_campaign(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  RunReport report;
  report.config = config;
  const fs::path root(config.output_dir);
  fs::create_directories(root);
  {
    std::ofstream(root / "config.txt", std::ios::binary) << to_text(config);
  }
  if (config.n_values.empty()) {
    assess(report);
    export_summary(report, root);
    return report;
  }
  say(log, "building ground state and spectrum");
  const CampaignContext ctx = prepare_context(config);
  report.q0 = ctx.ground->peak();
  report.q_h1 = ctx.q_h1;
  report.ground_residual = ctx.ground->residual;
  report.lambda0 = ctx.kernel.lambda0;
  report.beta = ctx.kernel.beta;
  report.lambda_ratio = ctx.lambda_ratio;
  if (ctx.coercivity) report.sigma0 = ctx.coercivity->sigma0_hat;
  save_field(root / "ground.gzkf", ctx.ground->profile);
  say(log, fmt::format("lambda0={:.8f} beta={:.8f}", report.lambda0, report.beta));

  const auto& ns = config.n_values;
  report.runs.resize(ns.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ns.size(); i = next++) {
      const fs::path dir = root / fmt::format("n{}", ns[i]);
      try {
        report.runs[i] = run_single(config, ctx, ns[i], dir, log);
      } catch (const std::exception& e) {
        RunSummary rs;
        rs.n = ns[i];
        rs.lambda = ns[i] > 0 ? 1.0 + 1.0 / ns[i] : 1.0;
        rs.status = "error";
        rs.error = e.what();
        report.runs[i] = rs;
        say(log, fmt::format("n={} failed: {}", ns[i], e.what()));
      }
    }
  };
  const int slots = std::min<int>(worker_slots(), static_cast<int>(ns.size()));
  if (slots <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < slots; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  assess(report);
  export_summary(report, root);
  return report;
}

std::string summary_json(const RunReport& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = to_text(r.config);
  j["ground"] = {{"p", r.config.p},
                 {"grid_n", r.config.grid_n},
                 {"box", r.config.box},
                 {"Q0", r.q0},
                 {"q_h1", r.q_h1},
                 {"residual", r.ground_residual}};
  j["spectrum"] = {{"lambda0", r.lambda0},
                   {"beta", r.beta},
                   {"lambda_ratio", r.lambda_ratio},
                   {"sigma0", r.sigma0 >= 0.0 ? Json(r.sigma0) : Json(nullptr)}};
  Json runs = Json::array();
  for (const auto& s : r.runs) {
    Json b = Json::array();
    for (const auto& e : s.band) b.push_back(exit_json(e));
    runs.push_back({{"n", s.n},
                    {"lambda", s.lambda},
                    {"status", s.status},
                    {"error", s.error},
                    {"exit", exit_json(s.exit)},
                    {"band", b},
                    {"initial_distance", s.initial_distance},
                    {"max_tube_distance", s.max_tube_distance},
                    {"t_end", s.t_end},
                    {"blowup_time", s.blowup_time >= 0.0 ? Json(s.blowup_time) : Json(nullptr)},
                    {"modulation_stop_time", s.modulation_stop_time >= 0.0
                                                 ? Json(s.modulation_stop_time)
                                                 : Json(nullptr)},
                    {"modulation_stop_reason", s.modulation_stop_reason},
                    {"modulation_points", s.modulation_points},
                    {"dJdt_sign_definite", s.dJdt_sign_definite},
                    {"dJdt_sign", s.dJdt_sign},
                    {"a0", s.a0},
                    {"max_abs_J", s.max_abs_J},
                    {"J_slope", s.J_slope},
                    {"mean_dJdt", s.mean_dJdt},
                    {"mass_drift", s.mass_drift},
                    {"energy_drift", s.energy_drift},
                    {"valid", s.valid},
                    {"monotonicity_pass", s.monotonicity_pass},
                    {"monotonicity_theta", nullable(s.monotonicity_theta)},
                    {"monotonicity_rate", nullable(s.monotonicity_rate)},
                    {"monotonicity_samples", s.monotonicity_samples},
                    {"eps_decay_rate_min", nullable(s.eps_decay_rate_min)},
                    {"decay_pass", s.decay_pass},
                    {"snapshots", s.snapshots}});
  }
  j["runs"] = runs;
  j["verdict"] = {{"trend_monotone", r.trend_monotone},
                  {"alpha_stable", r.alpha_stable},
                  {"instability_confirmed", r.instability_confirmed}};
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_summary_json(const std::string& text) {
  std::vector<std::string> errs;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto need = [&](const Json& obj, const std::string& where, const std::string& key,
                  Json::value_t type, bool nullable_ok = false) {
    if (!obj.is_object() || !obj.contains(key)) {
      errs.push_back(where + "." + key + " missing");
      return;
    }
    const Json& v = obj.at(key);
    if (nullable_ok && v.is_null()) return;
    const bool num = type == Json::value_t::number_float;
    const bool ok = num ? v.is_number()
                        : (type == Json::value_t::number_integer ? v.is_number_integer()
                                                                 : v.type() == type);
    if (!ok) errs.push_back(where + "." + key + " has wrong type");
  };
  using T = Json::value_t;
  need(j, "$", "schema_version", T::number_integer);
  need(j, "$", "config", T::string);
  need(j, "$", "ground", T::object);
  need(j, "$", "spectrum", T::object);
  need(j, "$", "runs", T::array);
  need(j, "$", "verdict", T::object);
  if (!errs.empty()) return errs;
  if (j["schema_version"].get<int>() != kSchemaVersion) errs.push_back("$.schema_version unsupported");
  for (const char* k : {"Q0", "q_h1", "residual", "box"}) need(j["ground"], "$.ground", k, T::number_float);
  for (const char* k : {"p", "grid_n"}) need(j["ground"], "$.ground", k, T::number_integer);
  for (const char* k : {"lambda0", "beta", "lambda_ratio"}) {
    need(j["spectrum"], "$.spectrum", k, T::number_float);
  }
  need(j["spectrum"], "$.spectrum", "sigma0", T::number_float, true);
  for (const char* k : {"trend_monotone", "alpha_stable", "instability_confirmed"}) {
    need(j["verdict"], "$.verdict", k, T::boolean);
  }
  auto check_exit = [&](const Json& e, const std::string& where) {
    need(e, where, "alpha", T::number_float);
    need(e, where, "exited", T::boolean);
    need(e, where, "time", T::number_float, true);
    need(e, where, "cause", T::string);
    if (e.is_object() && e.contains("cause") && e["cause"].is_string()) {
      const auto c = e["cause"].get<std::string>();
      if (c != "distance" && c != "modulation-failure" && c != "blow-up" && c != "none") {
        errs.push_back(where + ".cause unknown: " + c);
      }
    }
  };
  std::size_t i = 0;
  for (const auto& run : j["runs"]) {
    const std::string w = fmt::format("$.runs[{}]", i++);
    for (const char* k : {"n", "modulation_points", "dJdt_sign", "monotonicity_samples", "snapshots"}) {
      need(run, w, k, T::number_integer);
    }
    for (const char* k : {"lambda", "initial_distance", "max_tube_distance", "t_end", "a0",
                          "max_abs_J", "J_slope", "mean_dJdt", "mass_drift", "energy_drift"}) {
      need(run, w, k, T::number_float);
    }
    for (const char* k : {"blowup_time", "modulation_stop_time", "monotonicity_theta",
                          "monotonicity_rate", "eps_decay_rate_min"}) {
      need(run, w, k, T::number_float, true);
    }
    for (const char* k : {"status", "error", "modulation_stop_reason"}) need(run, w, k, T::string);
    for (const char* k : {"dJdt_sign_definite", "valid", "monotonicity_pass", "decay_pass"}) {
      need(run, w, k, T::boolean);
    }
    need(run, w, "exit", T::object);
    need(run, w, "band", T::array);
    if (run.contains("exit")) check_exit(run["exit"], w + ".exit");
    if (run.contains("band") && run["band"].is_array()) {
      std::size_t b = 0;
      for (const auto& e : run["band"]) check_exit(e, fmt::format("{}.band[{}]", w, b++));
    }
  }
  return errs;
}

RunReport parse_summary_json(const std::string& text) {
  const auto errs = validate_summary_json(text);
  if (!errs.empty()) throw IoError("summary does not match schema: " + errs.front());
  const Json j = Json::parse(text);
  RunReport r;
  r.config = parse_config(j["config"].get<std::string>());
  r.q0 = j["ground"]["Q0"].get<double>();
  r.q_h1 = j["ground"]["q_h1"].get<double>();
  r.ground_residual = j["ground"]["residual"].get<double>();
  r.lambda0 = j["spectrum"]["lambda0"].get<double>();
  r.beta = j["spectrum"]["beta"].get<double>();
  r.lambda_ratio = j["spectrum"]["lambda_ratio"].get<double>();
  r.sigma0 = j["spectrum"]["sigma0"].is_null() ? -1.0 : j["spectrum"]["sigma0"].get<double>();
  for (const auto& run : j["runs"]) {
    RunSummary s;
    s.n = run["n"].get<int>();
    s.lambda = run["lambda"].get<double>();
    s.status = run["status"].get<std::string>();
    s.error = run["error"].get<std::string>();
    s.exit = exit_from(run["exit"]);
    for (const auto& e : run["band"]) s.band.push_back(exit_from(e));
    s.initial_distance = run["initial_distance"].get<double>();
    s.max_tube_distance = run["max_tube_distance"].get<double>();
    s.t_end = run["t_end"].get<double>();
    s.blowup_time = run["blowup_time"].is_null() ? -1.0 : run["blowup_time"].get<double>();
    s.modulation_stop_time =
        run["modulation_stop_time"].is_null() ? -1.0 : run["modulation_stop_time"].get<double>();
    s.modulation_stop_reason = run["modulation_stop_reason"].get<std::string>();
    s.modulation_points = run["modulation_points"].get<int>();
    s.dJdt_sign_definite = run["dJdt_sign_definite"].get<bool>();
    s.dJdt_sign = run["dJdt_sign"].get<int>();
    s.a0 = run["a0"].get<double>();
    s.max_abs_J = run["max_abs_J"].get<double>();
    s.J_slope = run["J_slope"].get<double>();
    s.mean_dJdt = run["mean_dJdt"].get<double>();
    s.mass_drift = run["mass_drift"].get<double>();
    s.energy_drift = run["energy_drift"].get<double>();
    s.valid = run["valid"].get<bool>();
    s.monotonicity_pass = run["monotonicity_pass"].get<bool>();
    s.monotonicity_theta = from_nullable(run["monotonicity_theta"]);
    s.monotonicity_rate = from_nullable(run["monotonicity_rate"]);
    s.monotonicity_samples = run["monotonicity_samples"].get<int>();
    s.eps_decay_rate_min = from_nullable(run["eps_decay_rate_min"]);
    s.decay_pass = run["decay_pass"].get<bool>();
    s.snapshots = run["snapshots"].get<int>();
    r.runs.push_back(std::move(s));
  }
  r.trend_monotone = j["verdict"]["trend_monotone"].get<bool>();
  r.alpha_stable = j["verdict"]["alpha_stable"].get<bool>();
  r.instability_confirmed = j["verdict"]["instability_confirmed"].get<bool>();
  return r;
}

std::string summary_text(const RunReport& r) {
  std::string s;
  s += fmt::format("p = {}  grid {} x {}  box {}\n", r.config.p, r.config.grid_n, r.config.grid_n,
                   r.config.box);
  s += fmt::format("Q(0) = {:.10f}  |Q|_H1 = {:.10f}  residual = {:.3e}\n", r.q0, r.q_h1,
                   r.ground_residual);
  s += fmt::format("lambda0 = {:.10f}  beta = {:.10f}  (Q, Lambda Q)/|Q|^2 = {:.10f}\n", r.lambda0,
                   r.beta, r.lambda_ratio);
  s += r.sigma0 >= 0.0 ? fmt::format("sigma0 estimate = {:.6f}\n", r.sigma0)
                       : std::string("sigma0 estimate = (skipped)\n");
  s += fmt::format("alpha = {} |Q|_H1, band = [", r.config.alpha);
  for (std::size_t i = 0; i < r.config.alpha_band.size(); ++i) {
    s += fmt::format("{}{}", i ? ", " : "", r.config.alpha_band[i]);
  }
  s += "]\n\n";
  s += fmt::format("{:>5} {:>10} {:>10} {:>20} {:>10} {:>6} {:>11} {:>10} {:>10} {:>6} {:>6} {:>6}\n",
                   "n", "dist(0)", "T_n", "cause", "T_blowup", "sign", "a0", "max|J|",
                   "mass_drift", "valid", "mono", "decay");
  for (const auto& run : r.runs) {
    if (!run.error.empty()) {
      s += fmt::format("{:>5} error: {}\n", run.n, run.error);
      continue;
    }
    s += fmt::format(
        "{:>5} {:>10.5f} {:>10} {:>20} {:>10} {:>6} {:>11.4e} {:>10.4e} {:>10.2e} {:>6} {:>6} {:>6}\n",
        run.n, run.initial_distance,
        run.exit.exited ? fmt::format("{:.4f}", run.exit.time) : std::string("none"),
        run.exit.cause,
        run.blowup_time >= 0.0 ? fmt::format("{:.4f}", run.blowup_time) : std::string("-"),
        run.dJdt_sign_definite ? (run.dJdt_sign > 0 ? "+" : "-") : "mixed", run.a0, run.max_abs_J,
        run.mass_drift, run.valid ? "yes" : "no", run.monotonicity_pass ? "pass" : "fail",
        run.decay_pass ? "pass" : "fail");
  }
  if (!r.runs.empty()) {
    s += "\nexit times per alpha\n";
    for (const auto& run : r.runs) {
      s += fmt::format("{:>5}", run.n);
      for (const auto& e : run.band) {
        s += fmt::format("  {}: {}", e.alpha,
                         e.exited ? fmt::format("{:.4f} ({})", e.time, e.cause) : "none");
      }
      s += "\n";
    }
  }
  s += fmt::format("\ntrend T_n non-decreasing: {}\nverdict stable over alpha band: {}\n"
                   "instability confirmed: {}\n",
                   r.trend_monotone ? "yes" : "no", r.alpha_stable ? "yes" : "no",
                   r.instability_confirmed ? "yes" : "no");
  return s;
}

void export_summary(const RunReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream(dir / "summary.json", std::ios::binary) << summary_json(report);
  std::ofstream(dir / "summary.txt", std::ios::binary) << summary_text(report);
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

ReproduceResult reproduce_check(const fs::path& report_dir, const ExperimentConfig& config, int n) {
  ReproduceResult out;
  const std::string text = slurp(report_dir / "summary.json");
  if (text.empty()) throw IoError("no summary.json in " + report_dir.string());
  const RunReport prior = parse_summary_json(text);
  const auto diff = incomparable_fields(prior.config, config);
  if (!diff.empty()) {
    for (const auto& k : diff) out.differences.push_back("config field differs: " + k);
    return out;
  }
  out.comparable = true;
  if (n < 0) {
    if (config.n_values.empty()) {
      out.identical = true;
      return out;
    }
    n = config.n_values.front();
  }
  const fs::path prior_dir = report_dir / fmt::format("n{}", n);
  if (!fs::exists(prior_dir)) throw IoError("prior report has no run for n = " + std::to_string(n));

  ExperimentConfig c = config;
  const fs::path scratch = fs::temp_directory_path() /
                           fmt::format("gzk-reproduce-{}-{}", n, std::hash<std::string>{}(text));
  fs::remove_all(scratch);
  c.output_dir = scratch.string();
  const CampaignContext ctx = prepare_context(c);
  run_single(c, ctx, n, scratch / fmt::format("n{}", n));

  out.identical = true;
  for (const auto& entry : fs::directory_iterator(prior_dir)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path other = scratch / fmt::format("n{}", n) / entry.path().filename();
    if (!fs::exists(other)) {
      out.identical = false;
      out.differences.push_back(entry.path().filename().string() + " missing in re-run");
    } else if (slurp(entry.path()) != slurp(other)) {
      out.identical = false;
      out.differences.push_back(entry.path().filename().string() + " differs");
    }
  }
  fs::remove_all(scratch);
  return out;
}

}  // namespace gzk
