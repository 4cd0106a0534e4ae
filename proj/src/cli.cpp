#include "hjlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "hjlab/config.hpp"
#include "hjlab/homog.hpp"
#include "hjlab/parallel.hpp"

namespace hjlab::cli {

namespace {

namespace fs = std::filesystem;

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Json point_json(const Point& p, int dim) {
  Json j = Json::array();
  for (int k = 0; k < dim; ++k) j.push_back(p[k]);
  return j;
}

struct Context {
  ExperimentConfig cfg;
  std::string hash;
  int workers = 1;
  fs::path dir;
  std::ostream* out = nullptr;

  Json provenance() const {
    return Json{{"config_hash", hash}, {"version", kLibraryVersion}, {"timestamp", now_utc()}};
  }
  std::string csv_comment() const {
    return std::string("# config_hash=") + hash + " version=" + kLibraryVersion + "\n";
  }
  void write_json(const std::string& name, const Json& j) const {
    std::ofstream f(dir / name);
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  }
  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  }
  int dim() const { return cfg.env.dim; }
};

struct Built {
  GameHamiltonian gh;
  EnvSpec family;
  HamiltonianConstants c;
};

Built build(const Context& ctx) {
  GameHamiltonian gh = build_hamiltonian(ctx.cfg);
  EnvSpec family = env_family_for(ctx.cfg, gh);
  const HamiltonianConstants c = certify_constants(gh, family);
  return {std::move(gh), family, c};
}

CampaignOptions campaign_options(const Context& ctx) {
  CampaignOptions o;
  o.dx = ctx.cfg.campaign.dx;
  o.dt = ctx.cfg.campaign.dt;
  o.scheme = ctx.cfg.solver.scheme;
  o.workers = ctx.workers;
  return o;
}

Json utable_json(const UTable& t) {
  Json se = Json::array();
  for (std::size_t j = 0; j < t.times.size(); ++j) se.push_back(t.se(j));
  return Json{{"theta", point_json(t.theta, t.dim)},
              {"times", t.times},
              {"mean", t.mean},
              {"var", t.var},
              {"se", se},
              {"M", t.M},
              {"base_seed", t.base_seed},
              {"beta", t.beta},
              {"bound_ratio_max", t.bound_ratio_max},
              {"bound_violations", t.bound_violations}};
}

std::vector<UTable> run_estimates(const Context& ctx, const Built& b) {
  std::vector<UTable> tables;
  const CampaignConfig& c = ctx.cfg.campaign;
  for (const Point& theta : c.thetas)
    tables.push_back(estimate_U(b.gh, b.family, theta, c.times, c.M, c.base_seed,
                                campaign_options(ctx)));
  return tables;
}

void write_estimates(const Context& ctx, const std::vector<UTable>& tables) {
  Json j = ctx.provenance();
  j["tables"] = Json::array();
  for (const UTable& t : tables) j["tables"].push_back(utable_json(t));
  ctx.write_json("utable.json", j);
  if (!ctx.cfg.output.wants("csv")) return;
  std::ofstream f = ctx.open("samples.csv");
  f << ctx.csv_comment();
  f << (ctx.dim() == 1 ? "theta0" : "theta0,theta1") << ",t,sample,value\n";
  for (const UTable& t : tables)
    for (std::size_t j = 0; j < t.times.size(); ++j)
      for (int i = 0; i < t.M; ++i) {
        for (int k = 0; k < ctx.dim(); ++k) f << fmt(t.theta[k]) << ",";
        f << fmt(t.times[j]) << "," << i << "," << fmt(t.samples[j][i]) << "\n";
      }
}

/// Closed-form H_bar for one-dimensional transport with a moving front.
std::optional<double> transport_oracle(const Context& ctx, const Built& b, const Point& theta) {
  if (ctx.cfg.family != "transport" || ctx.dim() != 1) return std::nullopt;
  const Json& p = ctx.cfg.params;
  const double v = b.gh.f(0, 0)[0];
  if (v == 0.0) return std::nullopt;
  const double mu = transport_mean_cost(b.family, p["constant"].get<double>(),
                                        p["env_scale"].get<double>());
  return -mu - v * theta[0];
}

// ---------------------------------------------------------------- subcommands

int cmd_sample_env(const Context& ctx) {
  const Built b = build(ctx);
  const Environment env = Environment::sample(b.family);
  const SolveConfig& s = ctx.cfg.solver;
  Grid grid;
  grid.dim = ctx.dim();
  grid.dx = s.dx;
  const IndexBox nodes = grid.nodes_in(s.report_box);
  const int na = b.family.shared_channels ? 1 : b.family.channels_a;
  const int nb = b.family.shared_channels ? 1 : b.family.channels_b;
  std::ofstream f = ctx.open("env.csv");
  f << ctx.csv_comment();
  f << (ctx.dim() == 1 ? "x0" : "x0,x1") << ",a,b,value\n";
  for (std::int64_t i0 = nodes.lo[0]; i0 <= nodes.hi[0]; ++i0)
    for (std::int64_t i1 = nodes.lo[1]; i1 <= nodes.hi[1]; ++i1) {
      const Point x = grid.coord(i0, i1);
      for (int a = 0; a < na; ++a)
        for (int bb = 0; bb < nb; ++bb) {
          for (int k = 0; k < ctx.dim(); ++k) f << fmt(x[k]) << ",";
          f << a << "," << bb << "," << fmt(env.cost(x, a, bb)) << "\n";
        }
    }
  *ctx.out << "sample-env: wrote env.csv (" << nodes.count(ctx.dim()) << " nodes)\n";
  return kExitPass;
}

int cmd_solve(const Context& ctx) {
  const Built b = build(ctx);
  const Environment env = Environment::sample(b.family);
  SolveConfig s = ctx.cfg.solver;
  s.workers = ctx.workers;
  const SolveResult r = solve(b.gh, &env, s);
  const Grid& grid = r.final.grid;
  const IndexBox report = grid.nodes_in(s.report_box);
  const int d = ctx.dim();

  std::ofstream f = ctx.open("field.csv");
  f << ctx.csv_comment();
  f << (d == 1 ? "t,x0,u\n" : "t,x0,x1,u\n");
  for (const Field& u : r.snapshots) {
    const IndexBox box = report.intersect(u.active);
    for (std::int64_t i0 = box.lo[0]; i0 <= box.hi[0]; ++i0)
      for (std::int64_t i1 = box.lo[1]; i1 <= box.hi[1]; ++i1) {
        const Point x = grid.coord(i0, i1);
        f << fmt(u.t);
        for (int k = 0; k < d; ++k) f << "," << fmt(x[k]);
        f << "," << fmt(u.at(i0, i1)) << "\n";
      }
  }

  std::ofstream tel = ctx.open("telemetry.jsonl");
  Json head = ctx.provenance();
  head["scheme"] = scheme_name(s.scheme);
  head["steps"] = r.steps;
  head["dt"] = r.dt;
  tel << head.dump() << "\n";
  for (const StepTelemetry& st : r.telemetry) {
    Json line{{"step", st.step},
              {"t", st.t},
              {"active_lo", {st.active.lo[0], st.active.lo[1]}},
              {"active_hi", {st.active.hi[0], st.active.hi[1]}},
              {"active_nodes", st.active_nodes}};
    tel << line.dump() << "\n";
  }
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    const Field& u = r.snapshots[k];
    const IndexBox box = report.intersect(u.active);
    double space = 0.0;
    double time = 0.0;
    for (std::int64_t i0 = box.lo[0]; i0 <= box.hi[0]; ++i0)
      for (std::int64_t i1 = box.lo[1]; i1 <= box.hi[1]; ++i1) {
        if (i0 < box.hi[0]) space = std::max(space, std::abs(u.at(i0 + 1, i1) - u.at(i0, i1)) / grid.dx);
        if (d == 2 && i1 < box.hi[1])
          space = std::max(space, std::abs(u.at(i0, i1 + 1) - u.at(i0, i1)) / grid.dx);
        if (k > 0) {
          const Field& prev = r.snapshots[k - 1];
          time = std::max(time, std::abs(u.at(i0, i1) - prev.at(i0, i1)) / (u.t - prev.t));
        }
      }
    Json line{{"snapshot", k}, {"t", u.t}, {"max_space_quotient", space}};
    if (k > 0) line["max_time_quotient"] = time;
    tel << line.dump() << "\n";
  }
  *ctx.out << "solve: " << r.steps << " steps of " << scheme_name(s.scheme)
           << ", wrote field.csv and telemetry.jsonl\n";
  return kExitPass;
}

int cmd_estimate(const Context& ctx) {
  const Built b = build(ctx);
  const std::vector<UTable> tables = run_estimates(ctx, b);
  write_estimates(ctx, tables);
  int violations = 0;
  for (const UTable& t : tables) violations += t.bound_violations;
  *ctx.out << "estimate: " << tables.size() << " theta values, M = " << ctx.cfg.campaign.M
           << ", bound violations " << violations << "\n";
  return violations == 0 ? kExitPass : kExitAssertionFailure;
}

Json subadditivity_json(const SubadditivityReport& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"m", r.m}, {"n", r.n}, {"defect", r.defect}, {"se", r.se},
                    {"normalized", r.normalized}});
  return Json{{"rows", rows},
              {"n_values", s.n_values},
              {"k_hat", s.k_hat},
              {"k_err", s.k_err},
              {"k_hat_mirror", s.k_hat_mirror},
              {"k_err_mirror", s.k_err_mirror},
              {"k_hat_max", s.k_hat_max},
              {"k_abs_max", s.k_abs_max},
              {"stable", s.stable},
              {"stable_mirror", s.stable_mirror}};
}

int cmd_effective(const Context& ctx) {
  const Built b = build(ctx);
  const std::vector<UTable> tables = run_estimates(ctx, b);
  write_estimates(ctx, tables);
  bool ok = true;
  Json j = ctx.provenance();
  j["estimates"] = Json::array();
  std::vector<EffectiveEstimate> est;
  for (const UTable& t : tables) {
    const EffectiveEstimate e = extract_effective_H(t, ctx.cfg.campaign.k_hat);
    const TimeLipschitzReport tl = check_time_lipschitz(t);
    Json row{{"theta", point_json(e.theta, ctx.dim())},
             {"h_bar", e.h_bar},
             {"ci", e.ci},
             {"se", e.se},
             {"band", e.band},
             {"A", e.A},
             {"k_hat", e.k_hat},
             {"k_fitted", e.k_fitted},
             {"t_max", e.t_max},
             {"times", e.times},
             {"sequence", e.sequence},
             {"rate", {{"fitted", e.rate.fitted}, {"slope", e.rate.slope}, {"r2", e.rate.r2},
                       {"note", e.rate.note}}},
             {"subadditivity", subadditivity_json(e.defects)},
             {"time_lipschitz", {{"holds", tl.holds}, {"worst_excess", tl.worst_excess}}},
             {"bound_violations", t.bound_violations}};
    ok = ok && tl.holds && t.bound_violations == 0;
    if (const auto oracle = transport_oracle(ctx, b, e.theta)) {
      const bool hit = std::abs(e.h_bar - *oracle) <= e.ci;
      row["oracle"] = {{"h_bar", *oracle}, {"within_ci", hit}};
      ok = ok && hit;
    }
    j["estimates"].push_back(row);
    est.push_back(e);
  }
  if (est.size() >= 2) {
    const EffectivePropertiesReport pr = effective_H_properties(est, b.c.beta, ctx.dim());
    j["properties"] = {{"beta", b.c.beta},
                       {"bound_ok", pr.bound_ok},
                       {"lipschitz_ok", pr.lipschitz_ok},
                       {"worst_bound_excess", pr.worst_bound_excess},
                       {"worst_lip_excess", pr.worst_lip_excess}};
    ok = ok && pr.ok();
  }
  j["passed"] = ok;
  ctx.write_json("effective.json", j);
  for (const auto& e : est)
    *ctx.out << "effective: theta " << format_point(e.theta, ctx.dim()) << " H_bar " << e.h_bar
             << " +- " << e.ci << "\n";
  *ctx.out << "effective: " << (ok ? "all checks passed" : "CHECK FAILED") << "\n";
  return ok ? kExitPass : kExitAssertionFailure;
}

int cmd_rate(const Context& ctx) {
  const Built b = build(ctx);
  const CampaignConfig& c = ctx.cfg.campaign;
  const Point theta = c.thetas.front();
  double h_bar = 0.0;
  std::string source;
  if (c.h_bar) {
    h_bar = *c.h_bar;
    source = "config";
  } else if (const auto oracle = transport_oracle(ctx, b, theta)) {
    h_bar = *oracle;
    source = "transport-oracle";
  } else {
    const UTable t = estimate_U(b.gh, b.family, theta, c.times, c.M, c.base_seed,
                                campaign_options(ctx));
    h_bar = extract_effective_H(t, c.k_hat).h_bar;
    source = "extracted";
  }
  RateOptions opt;
  opt.dx = c.dx;
  opt.dt = c.dt;
  opt.workers = ctx.workers;
  opt.calibration_seed = c.calibration_seed;
  const RateReport rep =
      rate_experiment(b.gh, b.family, theta, h_bar, c.eps_list, c.R, c.T, c.M, c.base_seed, opt);

  std::ofstream f = ctx.open("rate.csv");
  f << ctx.csv_comment();
  f << "eps,q25,median,q75,threshold,exceedance,exceedance_ok\n";
  for (const RateRow& r : rep.rows)
    f << fmt(r.eps) << "," << fmt(r.q25) << "," << fmt(r.median) << "," << fmt(r.q75) << ","
      << fmt(r.threshold) << "," << fmt(r.exceedance) << "," << (r.exceedance_ok ? 1 : 0) << "\n";
  Json j = ctx.provenance();
  j["theta"] = point_json(theta, ctx.dim());
  j["h_bar"] = h_bar;
  j["h_bar_source"] = source;
  j["slope"] = rep.slope;
  j["slope_se"] = rep.slope_se;
  j["k_hat"] = rep.k_hat;
  j["status"] = rep.status;
  j["exceedance_ok"] = rep.exceedance_ok;
  j["degenerate"] = rep.degenerate;
  ctx.write_json("rate.summary.json", j);
  *ctx.out << "rate: slope " << rep.slope << " +- " << rep.slope_se << ", status " << rep.status;
  if (rep.status == "inconclusive") *ctx.out << " (slope interval straddles the target band)";
  *ctx.out << "\n";
  const bool failed = rep.status == "fail" || !rep.exceedance_ok;
  return failed ? kExitAssertionFailure : kExitPass;
}

int cmd_verify(const Context& ctx) {
  const Built b = build(ctx);
  const int d = ctx.dim();
  const CampaignConfig& camp = ctx.cfg.campaign;
  Json checks = Json::array();
  bool all = true;
  auto record = [&](Json check) {
    all = all && check["passed"].get<bool>();
    *ctx.out << "verify: " << check["name"].get<std::string>() << " "
             << (check["passed"].get<bool>() ? "PASS" : "FAIL") << "\n";
    checks.push_back(std::move(check));
  };

  const HamiltonianConstants& c = b.c;
  const double margin = orientation_margin(b.gh, c.e);
  record({{"name", "orientation"},
          {"passed", c.oriented() && margin == c.delta},
          {"delta", c.delta},
          {"e", point_json(c.e, d)},
          {"margin_at_e", margin}});
  if (!c.oriented()) {
    Json j = ctx.provenance();
    j["checks"] = checks;
    j["passed"] = false;
    ctx.write_json("verify.report.json", j);
    return kExitAssertionFailure;
  }

  const Environment env = Environment::sample(b.family);
  const Box probe_box = Box::cube(d, 4.0 * ctx.cfg.env.range + ctx.cfg.report_radius);
  const BoundsProbeReport hb =
      probe_bounds(b.gh, &env, c, probe_box, 3.0, camp.probes, camp.base_seed ^ 0xb0b0ULL);
  record({{"name", "bounds-H1-H3"},
          {"passed", hb.ok()},
          {"beta", c.beta},
          {"probes", hb.probes},
          {"worst_h1", hb.worst_h1},
          {"worst_h2", hb.worst_h2},
          {"worst_h3", hb.worst_h3}});

  SolveConfig unit = ctx.cfg.solver;
  unit.eps = 1.0;
  unit.workers = ctx.workers;

  {
    const double rho = ctx.cfg.env.range;
    const Point shift = scale(Point{1.7, -0.9}, rho);
    const StripReport sr = strip_experiment(b.gh, env, c, 0.25, 0.25 + rho, shift, Point{0.0, 0.0}, unit);
    record({{"name", "strip"},
            {"passed", sr.holds},
            {"observed", sr.observed},
            {"bound", sr.bound},
            {"tolerance", sr.tolerance},
            {"l_diff_sup", sr.l_diff_sup}});
  }
  {
    const SolveResult r = solve(b.gh, &env, unit);
    const LipschitzReport lr = check_lipschitz(r.snapshots, c, unit.datum.lip);
    record({{"name", "lipschitz"},
            {"passed", lr.ok()},
            {"max_space_quotient", lr.max_space_quotient},
            {"space_bound_at_T", lr.space_bound_at_T},
            {"max_time_quotient", lr.max_time_quotient},
            {"time_bound", lr.time_bound},
            {"tolerance", lr.tolerance}});
  }
  {
    const auto g = unit.datum.fn;
    const InitialDatum lower = InitialDatum::function(
        [g](const Point& x) { return g(x) - 0.5 - 0.25 * std::sin(3.0 * x[0] + x[1]); },
        unit.datum.lip + 0.75 * std::sqrt(2.0), "lowered");
    const ComparisonReport cr = check_comparison(unit.datum, lower, b.gh, &env, unit);
    const double k = 1.25;
    const InitialDatum raised = InitialDatum::function(
        [g, k](const Point& x) { return g(x) + k; }, unit.datum.lip, "raised");
    const SolveResult u = solve(b.gh, &env, unit);
    const SolveResult w = solve(b.gh, &env, [&] {
      SolveConfig s = unit;
      s.datum = raised;
      return s;
    }());
    double shift_err = 0.0;
    u.final.for_active([&](std::int64_t i0, std::int64_t i1) {
      shift_err = std::max(shift_err, std::abs(w.final.at(i0, i1) - u.final.at(i0, i1) - k));
    });
    record({{"name", "comparison"},
            {"passed", cr.holds && shift_err <= 1e-12},
            {"initial_sup_gap", cr.initial_sup_gap},
            {"max_sup_gap", cr.max_sup_gap},
            {"constant_shift_error", shift_err}});
  }
  {
    const double eps = 0.5;
    SolveConfig fine = unit;
    fine.dx = unit.dx * eps;
    fine.dt = unit.dt * eps;
    fine.T = unit.T * eps;
    fine.report_box = unit.report_box.scaled(eps, d);
    const ScalingReport sc = check_scaling(b.gh, &env, Point{0.0, 0.0}, eps, fine);
    record({{"name", "scaling"},
            {"passed", sc.max_abs_diff <= 1e-9 && sc.shared_nodes > 0},
            {"eps", eps},
            {"max_abs_diff", sc.max_abs_diff},
            {"shared_nodes", sc.shared_nodes}});
  }
  if (b.gh.localized()) {
    const auto& loc = *b.gh.localized();
    const LocalizationReport lr =
        verify_localization(b.gh, &env, probe_box, camp.probes, camp.base_seed ^ 0x10caULL);
    const Json& p = ctx.cfg.params;
    const double ha = 2.0 / (p["n_a"].get<int>() - 1);
    const double hb_ = 2.0 * loc.radius / (p["n_b"].get<int>() - 1);
    const double tol = loc.beta * std::sqrt(static_cast<double>(loc.action_dim)) * (hb_ + loc.radius * ha);
    const double vn = norm(loc.v, d);
    record({{"name", "localization"},
            {"passed", lr.max_error <= tol && c.delta == vn},
            {"max_error", lr.max_error},
            {"grid_tolerance", tol},
            {"delta", c.delta},
            {"v_norm", vn}});
  }

  Json j = ctx.provenance();
  j["checks"] = checks;
  j["passed"] = all;
  ctx.write_json("verify.report.json", j);
  return all ? kExitPass : kExitAssertionFailure;
}

int resolve_worker_count(std::optional<int> flag, const ExperimentConfig& cfg) {
  if (flag) return resolve_workers(*flag);
  if (cfg.campaign.workers) return resolve_workers(*cfg.campaign.workers);
  if (const char* v = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || n < 0)
      throw ConfigError(std::string(kWorkersEnv) + ": expected a non-negative integer");
    return resolve_workers(static_cast<int>(n));
  }
  return resolve_workers(0);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hjlab: stochastic homogenization experiments for oriented Hamilton-Jacobi games"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<int> workers;
  std::string out_dir;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"sample-env", "dump one environment realization on the report box (env.csv)"},
      {"solve", "single-realization trajectory (field.csv, telemetry.jsonl)"},
      {"estimate", "Monte-Carlo U_theta(t) tables (utable.json)"},
      {"effective", "effective Hamiltonian estimates and property checks (effective.json)"},
      {"rate", "convergence-rate experiment (rate.csv, rate.summary.json)"},
      {"verify", "property suite on one realization (verify.report.json)"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config_path, "experiment config (JSON)")->required();
    sc->add_option("--set", sets, "dotted-path override key=value (repeatable)");
    sc->add_option("--workers", workers, "worker threads (0 = hardware concurrency)");
    sc->add_option("--out", out_dir, "output directory (overrides output.directory)");
  }

  std::vector<std::string> argv_store{"hjlab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  std::string command;
  for (const auto& [name, help] : commands)
    if (app.got_subcommand(name)) command = name;

  try {
    Context ctx;
    ctx.cfg = load_config(config_path, sets);
    if (!out_dir.empty()) {
      ctx.cfg.output.directory = out_dir;
      ctx.cfg.effective["output"]["directory"] = out_dir;
    }
    ctx.workers = resolve_worker_count(workers, ctx.cfg);
    ctx.hash = config_hash(ctx.cfg.effective);
    ctx.dir = ctx.cfg.output.directory;
    ctx.out = &out;
    fs::create_directories(ctx.dir);
    Json echo = ctx.provenance();
    echo["command"] = command;
    echo["workers"] = ctx.workers;
    echo["config"] = ctx.cfg.effective;
    ctx.write_json("config.echo.json", echo);

    if (command == "sample-env") return cmd_sample_env(ctx);
    if (command == "solve") return cmd_solve(ctx);
    if (command == "estimate") return cmd_estimate(ctx);
    if (command == "effective") return cmd_effective(ctx);
    if (command == "rate") return cmd_rate(ctx);
    return cmd_verify(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const UnderMarginedDomain& e) {
    err << "config error: " << e.what() << " (required margin " << e.required_margin() << ")\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hjlab::cli
