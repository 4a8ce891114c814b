#include "gzk/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "gzk/errors.hpp"

namespace gzk {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument(fmt::format("config key '{}': cannot parse '{}'", key, v));
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<T>(key, item));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument(fmt::format("config key '{}': expected true/false, got '{}'", key, v));
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt::format("{}", v[i]);
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("config: " + m); };
  if (p < 2) fail("p must be >= 2");
  for (int n : n_values)
    if (n < 0) fail("n_values entries must be >= 0 (0 runs Q itself)");
  if (grid_n < 16 || grid_n % 2) fail("grid_n must be even and >= 16");
  if (!(box > 0.0)) fail("box must be positive");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(t_max > 0.0)) fail("t_max must be positive");
  if (!(alpha > 0.0)) fail("alpha must be positive");
  for (double a : alpha_band)
    if (!(a > 0.0)) fail("alpha_band entries must be positive");
  if (!(M > 0.0)) fail("M must be positive");
  if (x0_grid.empty()) fail("x0_grid must not be empty");
  if (snapshot_stride < 1) fail("snapshot_stride must be >= 1");
  if (write_every < 1) fail("write_every must be >= 1");
  if (integrator != "etdrk4" && integrator != "ifrk4") fail("integrator must be etdrk4 or ifrk4");
  if (!(ground_tol > 0.0)) fail("ground_tol must be positive");
  if (!(tube_heuristic > 0.0)) fail("tube_heuristic must be positive");
  if (!(mass_gate > 0.0)) fail("mass_gate must be positive");
  if (!(energy_drift_tol > 0.0)) fail("energy_drift_tol must be positive");
  if (!(blowup_factor > 1.0)) fail("blowup_factor must exceed 1");
  if (!(overshoot >= 1.0)) fail("overshoot must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(fmt::format("config line {}: expected key = value", lineno));
    }
    const std::string k = trim(std::string_view(line).substr(0, eq));
    const std::string v = trim(std::string_view(line).substr(eq + 1));
    if (k == "p") c.p = parse_number<int>(k, v);
    else if (k == "n_values") c.n_values = parse_list<int>(k, v);
    else if (k == "grid_n") c.grid_n = parse_number<int>(k, v);
    else if (k == "box") c.box = parse_number<double>(k, v);
    else if (k == "dt") c.dt = parse_number<double>(k, v);
    else if (k == "t_max") c.t_max = parse_number<double>(k, v);
    else if (k == "alpha") c.alpha = parse_number<double>(k, v);
    else if (k == "alpha_band") c.alpha_band = parse_list<double>(k, v);
    else if (k == "M") c.M = parse_number<double>(k, v);
    else if (k == "x0_grid") c.x0_grid = parse_list<double>(k, v);
    else if (k == "snapshot_stride") c.snapshot_stride = parse_number<int>(k, v);
    else if (k == "write_every") c.write_every = parse_number<int>(k, v);
    else if (k == "seed") c.seed = parse_number<std::uint64_t>(k, v);
    else if (k == "output_dir") c.output_dir = v;
    else if (k == "integrator") c.integrator = v;
    else if (k == "ground_tol") c.ground_tol = parse_number<double>(k, v);
    else if (k == "tube_heuristic") c.tube_heuristic = parse_number<double>(k, v);
    else if (k == "mass_gate") c.mass_gate = parse_number<double>(k, v);
    else if (k == "energy_drift_tol") c.energy_drift_tol = parse_number<double>(k, v);
    else if (k == "blowup_factor") c.blowup_factor = parse_number<double>(k, v);
    else if (k == "overshoot") c.overshoot = parse_number<double>(k, v);
    else if (k == "coercivity") c.coercivity = parse_bool(k, v);
    else throw InvalidArgument(fmt::format("config line {}: unknown key '{}'", lineno, k));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const ExperimentConfig& c) {
  std::string s;
  auto put = [&](const char* k, const std::string& v) { s += fmt::format("{} = {}\n", k, v); };
  put("p", fmt::format("{}", c.p));
  put("n_values", join(c.n_values));
  put("grid_n", fmt::format("{}", c.grid_n));
  put("box", fmt::format("{}", c.box));
  put("dt", fmt::format("{}", c.dt));
  put("t_max", fmt::format("{}", c.t_max));
  put("alpha", fmt::format("{}", c.alpha));
  put("alpha_band", join(c.alpha_band));
  put("M", fmt::format("{}", c.M));
  put("x0_grid", join(c.x0_grid));
  put("snapshot_stride", fmt::format("{}", c.snapshot_stride));
  put("write_every", fmt::format("{}", c.write_every));
  put("seed", fmt::format("{}", c.seed));
  put("output_dir", c.output_dir);
  put("integrator", c.integrator);
  put("ground_tol", fmt::format("{}", c.ground_tol));
  put("tube_heuristic", fmt::format("{}", c.tube_heuristic));
  put("mass_gate", fmt::format("{}", c.mass_gate));
  put("energy_drift_tol", fmt::format("{}", c.energy_drift_tol));
  put("blowup_factor", fmt::format("{}", c.blowup_factor));
  put("overshoot", fmt::format("{}", c.overshoot));
  put("coercivity", c.coercivity ? "true" : "false");
  return s;
}

std::vector<std::string> incomparable_fields(const ExperimentConfig& a, const ExperimentConfig& b) {
  std::vector<std::string> out;
  std::istringstream ia(to_text(a)), ib(to_text(b));
  std::string la, lb;
  while (std::getline(ia, la) && std::getline(ib, lb)) {
    if (la == lb) continue;
    const std::string key = trim(std::string_view(la).substr(0, la.find('=')));
    if (key == "seed" || key == "output_dir") continue;
    out.push_back(key);
  }
  return out;
}

}  // namespace gzk
