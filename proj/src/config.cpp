#include "hjlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hjlab {

namespace {

Json base_defaults() {
  return Json{
      {"environment",
       {{"dim", 1},
        {"range", 0.5},
        {"bump_radius", 0.25},
        {"amplitude", {0.0, 1.0}},
        {"density", 2.0},
        {"shared_channels", false},
        {"box", nullptr},
        {"seed", 0}}},
      {"hamiltonian", {{"family", "transport"}, {"params", Json::object()}}},
      {"solver",
       {{"scheme", "semi-lagrangian"},
        {"dt", 0.05},
        {"dx", 0.05},
        {"T", 2.0},
        {"eps", 1.0},
        {"report_radius", 1.0},
        {"snapshots", 4},
        {"alpha_factor", 1.0},
        {"cfl_max", 0.9},
        {"audit_reads", false},
        {"datum",
         {{"kind", "zero"},
          {"theta", {0.0}},
          {"c", 0.0},
          {"cap", 1.0},
          {"x0", 0.0},
          {"spacing", 0.1},
          {"values", Json::array()}}}}},
      {"campaign",
       {{"thetas", {-1.0, 0.0, 1.0}},
        {"times", {2, 3, 4, 6, 8, 12, 16, 24, 32}},
        {"eps_list", {0.25, 0.125, 0.0625, 0.03125}},
        {"M", 64},
        {"base_seed", 1},
        {"calibration_seed", 2},
        {"workers", nullptr},
        {"R", 1.0},
        {"T", 1.0},
        {"dx", 0.05},
        {"dt", 0.05},
        {"k_hat", nullptr},
        {"h_bar", nullptr},
        {"m_grid", {0.1, 0.2, 0.3, 0.4}},
        {"probes", 2000}}},
      {"output", {{"directory", "out"}, {"formats", {"json", "csv"}}}},
  };
}

void merge_into(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key + ": unknown key");
    Json& slot = base[it.key()];
    if (slot.is_object() && it->is_object()) {
      merge_into(slot, *it, key);
    } else {
      slot = *it;
    }
  }
}

const Json& at_path(const Json& j, const std::string& path) {
  const Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!cur->is_object() || !cur->contains(key)) throw ConfigError(path + ": missing");
    cur = &(*cur)[key];
    if (dot == std::string::npos) return *cur;
    start = dot + 1;
  }
}

double num(const Json& j, const std::string& path) {
  const Json& v = at_path(j, path);
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + ": must be finite");
  return x;
}

double positive(const Json& j, const std::string& path) {
  const double x = num(j, path);
  if (!(x > 0.0)) throw ConfigError(path + ": must be positive");
  return x;
}

int integer(const Json& j, const std::string& path) {
  const Json& v = at_path(j, path);
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<int>();
}

std::uint64_t seed(const Json& j, const std::string& path) {
  const Json& v = at_path(j, path);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(path + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string str(const Json& j, const std::string& path) {
  const Json& v = at_path(j, path);
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const Json& j, const std::string& path) {
  const Json& v = at_path(j, path);
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw ConfigError(path + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Point point(const Json& v, int dim, const std::string& path) {
  Point p{0.0, 0.0};
  if (dim == 1 && v.is_number()) {
    p[0] = v.get<double>();
    return p;
  }
  const std::vector<double> xs = numbers(v, path);
  if (static_cast<int>(xs.size()) != dim)
    throw ConfigError(path + ": expected " + std::to_string(dim) + " components");
  for (int k = 0; k < dim; ++k) p[k] = xs[k];
  return p;
}

std::vector<Point> points(const Json& v, int dim, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<Point> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(point(v[i], dim, path + "[" + std::to_string(i) + "]"));
  return out;
}

InitialDatum parse_datum(const Json& j, int dim) {
  const std::string kind = str(j, "solver.datum.kind");
  if (kind == "zero") return InitialDatum::zero();
  if (kind == "linear") {
    const Point theta = point(at_path(j, "solver.datum.theta"), dim, "solver.datum.theta");
    return InitialDatum::linear(theta, num(j, "solver.datum.c"), dim);
  }
  if (kind == "min-abs") {
    const double cap = positive(j, "solver.datum.cap");
    return InitialDatum::function(
        [cap, dim](const Point& x) { return std::min(norm(x, dim), cap); }, 1.0, "min-abs");
  }
  if (kind == "tabulated") {
    if (dim != 1) throw ConfigError("solver.datum.kind: tabulated data are one-dimensional");
    const double x0 = num(j, "solver.datum.x0");
    const double h = positive(j, "solver.datum.spacing");
    const std::vector<double> vals = numbers(at_path(j, "solver.datum.values"), "solver.datum.values");
    if (vals.size() < 2) throw ConfigError("solver.datum.values: need at least two values");
    const double start = x0 / h;
    if (std::abs(start - std::round(start)) > 1e-9)
      throw ConfigError("solver.datum.x0: must be a multiple of solver.datum.spacing");
    Field table;
    table.grid.dim = 1;
    table.grid.dx = h;
    table.grid.box.lo = {static_cast<std::int64_t>(std::llround(start)), 0};
    table.grid.box.hi = {table.grid.box.lo[0] + static_cast<std::int64_t>(vals.size()) - 1, 0};
    table.active = table.grid.box;
    table.values = vals;
    double lip = 0.0;
    for (std::size_t i = 1; i < vals.size(); ++i)
      lip = std::max(lip, std::abs(vals[i] - vals[i - 1]) / h);
    return InitialDatum::tabulated(std::move(table), lip);
  }
  throw ConfigError("solver.datum.kind: unknown kind '" + kind + "'");
}

std::vector<double> increasing_positive(const Json& j, const std::string& path) {
  const std::vector<double> xs = numbers(at_path(j, path), path);
  if (xs.empty()) throw ConfigError(path + ": must not be empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) throw ConfigError(path + ": values must be positive");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw ConfigError(path + ": values must be increasing");
  }
  return xs;
}

std::vector<std::vector<double>> matrix(const Json& v, int cols, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a non-empty matrix");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::vector<double> row = numbers(v[i], path);
    if (static_cast<int>(row.size()) != cols)
      throw ConfigError(path + ": rows need " + std::to_string(cols) + " entries");
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

bool OutputConfig::wants(const std::string& f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

Json family_defaults(const std::string& family) {
  if (family == "transport") return Json{{"velocity", {1.0}}, {"constant", 0.0}, {"env_scale", 1.0}};
  if (family == "two-speed-control")
    return Json{{"direction", {1.0}},
                {"speeds", {0.5, 1.5}},
                {"constants", {0.0, 0.2}},
                {"env_scale", 1.0}};
  if (family == "saddle-game")
    return Json{{"n_a", 2},
                {"n_b", 2},
                {"f", {{1.0}, {0.6}, {1.4}, {0.8}}},
                {"constants", {0.0, 0.3, 0.1, 0.4}},
                {"env_scale", 1.0}};
  if (family == "localized")
    return Json{{"G0", "abs"},
                {"slope", 0.98},
                {"centre", {0.25}},
                {"v", {0.8, 0.0}},
                {"pi", {{0.0, 1.0}}},
                {"beta", 1.0},
                {"R", 1.0},
                {"n_a", 64},
                {"n_b", 64},
                {"env_scale", 0.5}};
  throw ConfigError("hamiltonian.family: unknown family '" + family + "'");
}

Json default_config() {
  Json d = base_defaults();
  d["hamiltonian"]["params"] = family_defaults("transport");
  return d;
}

Json apply_defaults(const Json& user) {
  if (!user.is_object()) throw ConfigError("config: expected a JSON object");
  Json d = base_defaults();
  std::string family = "transport";
  if (user.contains("hamiltonian") && user["hamiltonian"].is_object() &&
      user["hamiltonian"].contains("family")) {
    if (!user["hamiltonian"]["family"].is_string())
      throw ConfigError("hamiltonian.family: expected a string");
    family = user["hamiltonian"]["family"].get<std::string>();
  }
  d["hamiltonian"]["params"] = family_defaults(family);
  merge_into(d, user, "");
  return d;
}

void apply_override(Json& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set " + assignment + ": expected key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json* cur = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!cur->is_object() || !cur->contains(key))
      throw ConfigError(path + ": invalid override path");
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (path == "hamiltonian.family" && value != *cur) {
    if (!value.is_string()) throw ConfigError("hamiltonian.family: expected a string");
    cfg["hamiltonian"]["params"] = family_defaults(value.get<std::string>());
  }
  *cur = std::move(value);
}

ExperimentConfig parse_config(const Json& effective) {
  for (const char* block : {"environment", "hamiltonian", "solver", "campaign", "output"})
    if (!effective.contains(block)) throw ConfigError(std::string(block) + ": missing block");
  ExperimentConfig cfg;
  cfg.effective = effective;
  const Json& j = effective;

  EnvSpec& env = cfg.env;
  env.dim = integer(j, "environment.dim");
  if (env.dim != 1 && env.dim != 2) throw ConfigError("environment.dim: must be 1 or 2");
  env.range = num(j, "environment.range");
  env.bump_radius = num(j, "environment.bump_radius");
  const std::vector<double> amp = numbers(at_path(j, "environment.amplitude"), "environment.amplitude");
  if (amp.size() != 2) throw ConfigError("environment.amplitude: expected [lo, hi]");
  env.amp_lo = amp[0];
  env.amp_hi = amp[1];
  env.density = num(j, "environment.density");
  env.shared_channels = boolean(j, "environment.shared_channels");
  env.seed = seed(j, "environment.seed");
  const Json& box = at_path(j, "environment.box");
  if (!box.is_null()) {
    if (!box.is_object() || !box.contains("lo") || !box.contains("hi"))
      throw ConfigError("environment.box: expected null or {lo, hi}");
    env.box.lo = point(box["lo"], env.dim, "environment.box.lo");
    env.box.hi = point(box["hi"], env.dim, "environment.box.hi");
  }
  env.validate();

  cfg.family = str(j, "hamiltonian.family");
  family_defaults(cfg.family);
  cfg.params = at_path(j, "hamiltonian.params");

  SolveConfig& s = cfg.solver;
  s.scheme = parse_scheme(str(j, "solver.scheme"));
  s.dt = positive(j, "solver.dt");
  s.dx = positive(j, "solver.dx");
  s.T = positive(j, "solver.T");
  s.eps = positive(j, "solver.eps");
  cfg.report_radius = num(j, "solver.report_radius");
  if (cfg.report_radius < 0.0) throw ConfigError("solver.report_radius: must be non-negative");
  s.report_box = Box::cube(env.dim, cfg.report_radius);
  s.snapshots = integer(j, "solver.snapshots");
  s.alpha_factor = num(j, "solver.alpha_factor");
  s.cfl_max = num(j, "solver.cfl_max");
  s.audit_reads = boolean(j, "solver.audit_reads");
  s.datum = parse_datum(j, env.dim);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }

  CampaignConfig& c = cfg.campaign;
  c.thetas = points(at_path(j, "campaign.thetas"), env.dim, "campaign.thetas");
  if (c.thetas.empty()) throw ConfigError("campaign.thetas: must not be empty");
  c.times = increasing_positive(j, "campaign.times");
  c.eps_list = numbers(at_path(j, "campaign.eps_list"), "campaign.eps_list");
  for (double e : c.eps_list)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("campaign.eps_list: values must lie in (0, 1)");
  c.M = integer(j, "campaign.M");
  if (c.M < 1) throw ConfigError("campaign.M: must be at least 1");
  c.base_seed = seed(j, "campaign.base_seed");
  c.calibration_seed = seed(j, "campaign.calibration_seed");
  if (!at_path(j, "campaign.workers").is_null()) {
    c.workers = integer(j, "campaign.workers");
    if (*c.workers < 0) throw ConfigError("campaign.workers: must be non-negative");
  }
  c.R = num(j, "campaign.R");
  if (c.R < 0.0) throw ConfigError("campaign.R: must be non-negative");
  c.T = positive(j, "campaign.T");
  c.dx = positive(j, "campaign.dx");
  c.dt = positive(j, "campaign.dt");
  if (!at_path(j, "campaign.k_hat").is_null()) c.k_hat = num(j, "campaign.k_hat");
  if (!at_path(j, "campaign.h_bar").is_null()) c.h_bar = num(j, "campaign.h_bar");
  c.m_grid = numbers(at_path(j, "campaign.m_grid"), "campaign.m_grid");
  c.probes = integer(j, "campaign.probes");
  if (c.probes < 1) throw ConfigError("campaign.probes: must be at least 1");

  cfg.output.directory = str(j, "output.directory");
  const Json& formats = at_path(j, "output.formats");
  if (!formats.is_array()) throw ConfigError("output.formats: expected an array of strings");
  cfg.output.formats.clear();
  for (const Json& f : formats) {
    if (!f.is_string() || (f != "json" && f != "csv"))
      throw ConfigError("output.formats: entries must be \"json\" or \"csv\"");
    cfg.output.formats.push_back(f.get<std::string>());
  }

  build_hamiltonian(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  Json user = Json::parse(buf.str(), nullptr, false);
  if (user.is_discarded()) throw ConfigError(path + ": not valid JSON");
  Json eff = apply_defaults(user);
  for (const std::string& o : overrides) apply_override(eff, o);
  return parse_config(eff);
}

std::string config_hash(const Json& effective) {
  Json canon = effective;
  if (canon.contains("campaign") && canon["campaign"].is_object()) canon["campaign"].erase("workers");
  if (canon.contains("output") && canon["output"].is_object()) canon["output"].erase("directory");
  const std::string text = canon.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

GameHamiltonian build_hamiltonian(const ExperimentConfig& cfg) {
  const int d = cfg.env.dim;
  const Json& p = cfg.params;
  const auto field = [&](const std::string& k) -> const Json& {
    if (!p.contains(k)) throw ConfigError("hamiltonian.params." + k + ": missing");
    return p[k];
  };
  const auto number = [&](const std::string& k) {
    const Json& v = field(k);
    if (!v.is_number()) throw ConfigError("hamiltonian.params." + k + ": expected a number");
    return v.get<double>();
  };
  const auto count = [&](const std::string& k) {
    const Json& v = field(k);
    if (!v.is_number_integer() || v.get<int>() < 1)
      throw ConfigError("hamiltonian.params." + k + ": expected a positive integer");
    return v.get<int>();
  };
  const std::string base = "hamiltonian.params.";
  if (cfg.family == "transport") {
    return make_transport(d, point(field("velocity"), d, base + "velocity"), number("constant"),
                          number("env_scale"));
  }
  if (cfg.family == "two-speed-control") {
    const std::vector<double> speeds = numbers(field("speeds"), base + "speeds");
    const std::vector<double> constants = numbers(field("constants"), base + "constants");
    if (speeds.empty() || constants.size() != speeds.size())
      throw ConfigError(base + "constants: need one constant per speed");
    return make_two_speed_control(d, point(field("direction"), d, base + "direction"), speeds,
                                  constants, number("env_scale"));
  }
  if (cfg.family == "saddle-game") {
    const int n_a = count("n_a");
    const int n_b = count("n_b");
    std::vector<Point> f = points(field("f"), d, base + "f");
    const std::vector<double> constants = numbers(field("constants"), base + "constants");
    if (static_cast<int>(f.size()) != n_a * n_b)
      throw ConfigError(base + "f: need n_a * n_b velocities");
    if (static_cast<int>(constants.size()) != n_a * n_b)
      throw ConfigError(base + "constants: need n_a * n_b constants");
    return make_saddle_game(d, n_a, n_b, std::move(f), constants, number("env_scale"));
  }
  // localized
  const Json& pi_json = field("pi");
  const auto pi = matrix(pi_json, d, base + "pi");
  const int m = static_cast<int>(pi.size());
  if (m > 2) throw ConfigError(base + "pi: at most two rows");
  const Point centre = point(field("centre"), m, base + "centre");
  const Point v = point(field("v"), d, base + "v");
  const double R = number("R");
  const double scale = number("env_scale");
  if (!field("G0").is_string()) throw ConfigError(base + "G0: expected a string");
  const LipschitzHamiltonian g = profile_hamiltonian(field("G0").get<std::string>(), m,
                                                     number("slope"), centre, R, scale,
                                                     certify(cfg.env));
  try {
    return localize(g, number("beta"), R, v, pi, d, count("n_a"), count("n_b"));
  } catch (const ConfigError& e) {
    throw ConfigError("hamiltonian.params: " + std::string(e.what()));
  }
}

EnvSpec env_family_for(const ExperimentConfig& cfg, const GameHamiltonian& gh) {
  EnvSpec spec = cfg.env;
  if (gh.uses_env() && gh.per_pair_channels()) {
    spec.channels_a = gh.num_a();
    spec.channels_b = gh.num_b();
  }
  return spec;
}

}  // namespace hjlab
