// gzk: command-line front end to the gzk library.
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "gzk/config.hpp"
#include "gzk/csv.hpp"
#include "gzk/diagnostics.hpp"
#include "gzk/errors.hpp"
#include "gzk/evolution.hpp"
#include "gzk/field_io.hpp"
#include "gzk/functionals.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/harness.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"
#include "gzk/spectral.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace gzk;

namespace {

fs::path sidecar_of(const fs::path& field) {
  fs::path p = field;
  return p.replace_extension(".json");
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return Json::parse(in);
}

// A stored profile is re-polished so every derived quantity refers to a
// converged ground state; p comes from --p or the JSON sidecar.
std::shared_ptr<const GroundState> load_ground(const fs::path& path, std::optional<int> p) {
  RealField2D q = load_field(path);
  double c = 1.0;
  if (const auto side = sidecar_of(path); fs::exists(side)) {
    const Json j = read_json(side);
    if (!p && j.contains("p")) p = j["p"].get<int>();
    if (j.contains("c")) c = j["c"].get<double>();
  }
  if (!p) throw InvalidArgument("p unknown: pass --p or keep the JSON sidecar next to the ground state");
  return std::make_shared<const GroundState>(refine_ground_state(*p, c, std::move(q)));
}

struct Snapshot {
  double t;
  fs::path file;
};

std::vector<Snapshot> list_snapshots(const fs::path& run_dir) {
  const CsvTable idx = read_csv(run_dir / "snapshots.csv");
  const auto ci = idx.column("index");
  const auto ct = idx.column("t");
  std::vector<Snapshot> out;
  for (const auto& r : idx.rows) {
    out.push_back({r[ct], run_dir / fmt::format("u_t{:04d}.gzkf", static_cast<int>(r[ci]))});
  }
  if (out.empty()) throw IoError(run_dir.string() + ": no snapshots listed");
  return out;
}

ModulationTrack track_run(const fs::path& run_dir, const ModulationBasis& basis,
                          std::vector<RealField2D>* fields) {
  std::vector<RealField2D> snaps;
  std::vector<double> times;
  for (const auto& s : list_snapshots(run_dir)) {
    snaps.push_back(load_field(s.file));
    times.push_back(s.t);
  }
  auto tr = track(snaps, times, basis);
  if (fields) *fields = std::move(snaps);
  return tr;
}

int cmd_ground(int p, int n, double box, double tol, const fs::path& out) {
  const SpectralGrid grid(n, box);
  PetviashviliOptions o;
  o.tol = tol;
  const GroundState q = solve_ground_state(p, grid, o);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_field(out, q.profile);
  Json j;
  j["p"] = p;
  j["c"] = q.c;
  j["residual"] = q.residual;
  j["mass"] = q.mass;
  j["energy"] = q.energy;
  j["pohozaev_gap"] = q.pohozaev_gap;
  j["Q0"] = q.peak();
  write_json(sidecar_of(out), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_spectrum(const fs::path& ground_path, int count, std::optional<int> p, const fs::path& out) {
  const auto ground = load_ground(ground_path, p);
  const LinearizedOperator op(ground);
  SpectrumOptions so;
  const auto pairs = lowest_spectrum(op, count, so);
  const auto cls = classify_spectrum(pairs, so.kernel_threshold);
  fs::create_directories(out);
  Json ev = Json::array();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string file = fmt::format("eigenfunction_{}.gzkf", k);
    save_field(out / file, pairs[k].eigenfunction);
    ev.push_back({{"index", k},
                  {"eigenvalue", pairs[k].eigenvalue},
                  {"residual", pairs[k].residual},
                  {"file", file}});
  }
  Json j;
  j["p"] = ground->p;
  j["eigenpairs"] = ev;
  j["negative"] = cls.negative;
  j["kernel"] = cls.kernel;
  j["positive"] = cls.positive;
  if (pairs.size() >= 3) {
    const ModulationBasis b = ModulationBasis::build(ground);
    j["kernel_angle"] = subspace_angle({pairs[1].eigenfunction, pairs[2].eigenfunction}, {b.q1, b.q2});
  }
  write_json(out / "eigenvalues.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_beta(const fs::path& ground_path, std::optional<int> p) {
  const auto ground = load_ground(ground_path, p);
  const LinearizedOperator op(ground);
  const auto pairs = lowest_spectrum(op, 1);
  const RealField2D& q = ground->profile;
  const double beta = compute_beta(*ground, pairs.front().eigenfunction);
  const double ratio = inner(q, lambda_apply(q, ground->p)) / inner(q, q);
  const int pp = ground->p;
  fmt::print("beta = {:.12g}\n", beta);
  fmt::print("(Q, Lambda Q)/(Q, Q) = {:.12g} (expected {:.12g})\n", ratio,
             (3.0 - pp) / (2.0 * (pp - 1)));
  return 0;
}

int cmd_evolve(const fs::path& init, int p, double dt, double t_end, int stride,
               const std::string& integrator, const fs::path& out) {
  const RealField2D u0 = load_field(init);
  SolverConfig sc;
  sc.p = p;
  sc.dt = dt;
  sc.t_end = t_end;
  sc.snapshot_stride = stride;
  sc.integrator = integrator_from_string(integrator);
  fs::create_directories(out);
  CsvWriter idx(out / "snapshots.csv", {"index", "t"});
  int k = 0;
  RunOptions ro;
  ro.blowup_h1 = 1e3 * h1_norm(u0);
  ro.on_snapshot = [&](const EvolutionState& s, const SeriesRecord&) {
    save_field(out / fmt::format("u_t{:04d}.gzkf", k), s.u);
    idx.row({static_cast<double>(k), s.t});
    ++k;
    return true;
  };
  const RunResult r = evolve(u0, sc, ro);
  CsvWriter series(out / "series.csv", {"t", "mass", "energy", "h1norm"});
  for (const auto& s : r.series) series.row({s.t, s.mass, s.energy, s.h1norm});
  fmt::print("status {} t = {:.6g} halvings {} final dt {:.3g}\n", to_string(r.status),
             r.final_state.t, r.halvings, r.final_dt);
  if (r.status == RunStatus::kBlowUp) fmt::print("blow-up at t = {:.6g}\n", r.blowup_time);
  return 0;
}

int cmd_modulate(const fs::path& run_dir, const fs::path& ground_path, std::optional<int> p) {
  const auto ground = load_ground(ground_path, p);
  const ModulationBasis basis = ModulationBasis::build(ground);
  const auto tr = track_run(run_dir, basis, nullptr);
  CsvWriter out(run_dir / "modulation.csv", {"t", "y1", "y2", "eps_l2", "eps_h1", "ortho1", "ortho2"});
  for (const auto& pt : tr.points) out.row({pt.t, pt.y1, pt.y2, pt.l2_eps, pt.h1_eps, pt.ortho1, pt.ortho2});
  fmt::print("{} points tracked\n", tr.points.size());
  if (!tr.stop_reason.empty()) {
    fmt::print("stopped at t = {:.6g}: {}\n", tr.stop_time, tr.stop_reason);
  }
  return 0;
}

int cmd_diagnose(const fs::path& run_dir, const fs::path& ground_path, const fs::path& spec_dir,
                 const fs::path& out, double M, std::vector<double> x0_grid, std::optional<int> p) {
  const auto ground = load_ground(ground_path, p);
  const ModulationBasis basis = ModulationBasis::build(ground);
  const Json sj = read_json(spec_dir / "eigenvalues.json");
  EigenPair chi0;
  chi0.eigenvalue = sj["eigenpairs"][0]["eigenvalue"].get<double>();
  chi0.eigenfunction = load_field(spec_dir / sj["eigenpairs"][0]["file"].get<std::string>());
  const VirialKernel kernel = build_virial_kernel(*ground, chi0);

  std::vector<RealField2D> fields;
  const auto tr = track_run(run_dir, basis, &fields);
  const auto recs = diagnose_track(tr, kernel, basis);
  {
    CsvWriter w(out, {"t", "J", "dJdt_fd", "dJdt_formula", "W", "tube_dist", "y1"});
    const double qh1 = h1_norm(ground->profile);
    for (const auto& r : recs) w.row({r.t, r.J, r.dJdt_fd, r.dJdt_formula, r.W, r.tube_dist / qh1, r.y1});
  }
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");

  const WeightProfile weight(M);
  const double half = 0.5 * ground->grid().l1();
  const double xmax = *std::max_element(x0_grid.begin(), x0_grid.end());
  std::vector<RunSample> run;
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto& pt = tr.points[i];
    if (xmax + 0.5 * pt.t + std::abs(pt.y1) >= half - 2.0) break;
    run.push_back({pt.t, pt.y1, &fields[i]});
  }
  CsvWriter mono(dir / "monotonicity.csv", {"t", "t0", "x0", "I"});
  if (run.size() >= 2) {
    const auto rep = almost_monotonicity_check(run, weight, x0_grid);
    for (const auto& r : rep.rows) mono.row({r.t, r.t0, r.x0, r.I});
    fmt::print("monotonicity: theta {:.4g} fitted rate {:.4g} (need >= {:.4g}) {}\n", rep.theta,
               rep.fitted_rate, 0.5 / M, rep.pass ? "pass" : "fail");
  } else {
    fmt::print("monotonicity: fewer than two snapshots inside the validity window\n");
  }
  CsvWriter decay(dir / "decay.csv", {"t", "x0", "right_mass_u", "right_mass_eps"});
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto& pt = tr.points[i];
    for (double x0 : x0_grid) {
      decay.row({pt.t, x0, right_mass(fields[i], x0, pt.y1), right_mass(pt.eps, x0, 0.0)});
    }
  }
  fmt::print("{} diagnostic records written to {}\n", recs.size(), out.string());
  return 0;
}

int cmd_campaign(const fs::path& config_path) {
  const ExperimentConfig c = load_config(config_path);
  const RunReport r = run_instability_campaign(c, &std::cerr);
  std::cout << summary_text(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the supercritical 2D generalized Zakharov-Kuznetsov equation"};
  app.require_subcommand(1);

  int p = 4, grid = 256, count = 6, stride = 200;
  std::optional<int> p_opt;
  double box = 32.0, tol = 1e-10, dt = 5e-4, t_end = 1.0, M = 4.0;
  std::string integrator = "etdrk4";
  std::vector<double> x0_grid{2, 4, 6, 8, 10, 12};
  fs::path out, ground, init, run_dir, spec_dir, config;

  auto* g = app.add_subcommand("ground", "Compute the ground state Q");
  g->add_option("--p", p, "Nonlinearity power")->capture_default_str();
  g->add_option("--grid", grid, "Grid points per direction")->capture_default_str();
  g->add_option("--box", box, "Box length")->capture_default_str();
  g->add_option("--tol", tol, "Residual tolerance relative to |Q|_2")->capture_default_str();
  g->add_option("--out", out, "Output .gzkf file")->required();

  auto* s = app.add_subcommand("spectrum", "Lowest eigenpairs of the linearized operator");
  s->add_option("--ground", ground, "Ground state .gzkf")->required()->check(CLI::ExistingFile);
  s->add_option("--count", count, "Number of eigenpairs")->capture_default_str();
  s->add_option("--p", p_opt, "Nonlinearity power (default: from sidecar)");
  s->add_option("--out-dir", out, "Output directory")->default_val("spectrum");

  auto* b = app.add_subcommand("beta", "Print beta and the (Q, Lambda Q) ratio");
  b->add_option("--ground", ground, "Ground state .gzkf")->required()->check(CLI::ExistingFile);
  b->add_option("--p", p_opt, "Nonlinearity power (default: from sidecar)");

  auto* e = app.add_subcommand("evolve", "Integrate the gZK flow");
  e->add_option("--init", init, "Initial data .gzkf")->required()->check(CLI::ExistingFile);
  e->add_option("--p", p, "Nonlinearity power")->capture_default_str();
  e->add_option("--dt", dt, "Time step")->capture_default_str();
  e->add_option("--t-end", t_end, "Final time")->capture_default_str();
  e->add_option("--stride", stride, "Steps between snapshots")->capture_default_str();
  e->add_option("--integrator", integrator, "etdrk4 or ifrk4")->capture_default_str();
  e->add_option("--out-dir", out, "Output directory")->required();

  auto* m = app.add_subcommand("modulate", "Modulation decomposition of a stored run");
  m->add_option("--run-dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  m->add_option("--ground", ground, "Ground state .gzkf")->required()->check(CLI::ExistingFile);
  m->add_option("--p", p_opt, "Nonlinearity power (default: from sidecar)");

  auto* d = app.add_subcommand("diagnose", "Virial, monotonicity and decay diagnostics");
  d->add_option("--run-dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  d->add_option("--ground", ground, "Ground state .gzkf")->required()->check(CLI::ExistingFile);
  d->add_option("--spectrum-dir", spec_dir, "Output of `gzk spectrum`")
      ->required()
      ->check(CLI::ExistingDirectory);
  d->add_option("--out", out, "Diagnostics CSV")->default_val("diagnostics.csv");
  d->add_option("--M", M, "Weight parameter")->capture_default_str();
  d->add_option("--x0", x0_grid, "x0 grid")->delimiter(',')->capture_default_str();
  d->add_option("--p", p_opt, "Nonlinearity power (default: from sidecar)");

  auto* c = app.add_subcommand("campaign", "Run the instability campaign");
  c->add_option("--config", config, "Flat key = value config")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (g->parsed()) return cmd_ground(p, grid, box, tol, out);
    if (s->parsed()) return cmd_spectrum(ground, count, p_opt, out);
    if (b->parsed()) return cmd_beta(ground, p_opt);
    if (e->parsed()) return cmd_evolve(init, p, dt, t_end, stride, integrator, out);
    if (m->parsed()) return cmd_modulate(run_dir, ground, p_opt);
    if (d->parsed()) return cmd_diagnose(run_dir, ground, spec_dir, out, M, x0_grid, p_opt);
    if (c->parsed()) return cmd_campaign(config);
  } catch (const std::exception& ex) {
    std::cerr << "gzk: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
