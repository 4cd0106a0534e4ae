#include "hjlab/homog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "hjlab/parallel.hpp"
#include "hjlab/rng.hpp"
#include "hjlab/stats.hpp"

namespace hjlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

int find_time(const std::vector<double>& times, double t) {
  for (std::size_t j = 0; j < times.size(); ++j)
    if (same_time(times[j], t)) return static_cast<int>(j);
  return -1;
}

void validate_schedule(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("campaign.times: schedule is empty");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0)) throw ConfigError("campaign.times: times must be positive");
    if (j > 0 && !(times[j] > times[j - 1]))
      throw ConfigError("campaign.times: times must be strictly increasing");
  }
}

double simpson(const std::function<double(double)>& fn, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  NeumaierSum s;
  s.add(fn(a));
  s.add(fn(b));
  for (int i = 1; i < n; ++i) s.add((i % 2 ? 4.0 : 2.0) * fn(a + i * h));
  return s.value() * h / 3.0;
}

}  // namespace

double UTable::se(std::size_t j) const {
  if (M <= 0 || j >= var.size()) return 0.0;
  return std::sqrt(var[j] / M);
}

UTable UTable::synthetic(const std::vector<double>& times, const std::vector<double>& means) {
  if (times.size() != means.size()) throw ConfigError("synthetic table: size mismatch");
  validate_schedule(times);
  UTable t;
  t.times = times;
  t.mean = means;
  t.var.assign(times.size(), 0.0);
  return t;
}

void UTable::aggregate() {
  mean.assign(times.size(), 0.0);
  var.assign(times.size(), 0.0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const MeanVar mv = mean_var(samples[j]);
    mean[j] = mv.mean;
    var[j] = mv.var;
  }
}

std::vector<double> sample_u_at_origin(const GameHamiltonian& shifted_gh, const EnvSpec& spec,
                                       const std::vector<double>& times,
                                       const CampaignOptions& opt) {
  SolveConfig cfg;
  cfg.scheme = opt.scheme;
  cfg.dx = opt.dx;
  cfg.dt = opt.dt;
  cfg.T = times.back();
  cfg.report_box = Box::cube(shifted_gh.dim(), 0.0);
  const double h = cfg.step_size();
  std::vector<int> at_step(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double k = std::round(times[j] / h);
    if (std::abs(k * h - times[j]) > 1e-9 * std::max(1.0, times[j]))
      throw ConfigError("campaign.times: t = " + std::to_string(times[j]) +
                        " is not a multiple of the step " + std::to_string(h));
    at_step[j] = static_cast<int>(k);
  }
  const Grid grid = plan_solve_grid(shifted_gh, cfg);
  EnvSpec s = spec;
  s.box = fast_box(grid, 1.0);
  const Environment env = Environment::sample(s);
  std::vector<double> out(times.size(), 0.0);
  int step = 0;
  solve(shifted_gh, &env, cfg, [&](const Field& u) {
    for (std::size_t j = 0; j < times.size(); ++j)
      if (at_step[j] == step) out[j] = u.at(0, 0);
    ++step;
  });
  return out;
}

UTable estimate_U(const GameHamiltonian& gh, const EnvSpec& family, const Point& theta,
                  const std::vector<double>& times, int M, std::uint64_t base_seed,
                  const CampaignOptions& opt) {
  validate_schedule(times);
  if (M < 1) throw ConfigError("campaign.M: need at least one sample");
  family.validate();
  const HamiltonianConstants c = certify_constants(gh, family);
  require_oriented(c);
  const GameHamiltonian shifted = gh.shifted(theta);
  UTable table;
  table.theta = theta;
  table.dim = gh.dim();
  table.times = times;
  table.M = M;
  table.base_seed = base_seed;
  table.beta = c.beta;
  table.samples.assign(times.size(), std::vector<double>(M, 0.0));
  parallel_for(static_cast<std::size_t>(M), opt.workers, [&](std::size_t i) {
    EnvSpec s = family;
    s.seed = sample_seed(base_seed, i);
    CampaignOptions one = opt;
    one.workers = 1;
    const std::vector<double> u = sample_u_at_origin(shifted, s, times, one);
    for (std::size_t j = 0; j < times.size(); ++j) table.samples[j][i] = u[j];
  });
  const double scale = c.beta * (1.0 + norm(theta, gh.dim()));
  for (std::size_t j = 0; j < times.size(); ++j)
    for (double u : table.samples[j]) {
      const double ratio = std::abs(u) / (scale * times[j]);
      table.bound_ratio_max = std::max(table.bound_ratio_max, ratio);
      if (ratio > 1.0 + 1e-12) ++table.bound_violations;
    }
  table.aggregate();
  return table;
}

double azuma_bound(const std::vector<double>& c, double M) {
  NeumaierSum s;
  for (double x : c) {
    if (!(x >= 0.0)) throw ConfigError("azuma_bound: increments must be nonnegative");
    s.add(x * x);
  }
  if (M == 0.0) return 2.0;
  if (s.value() == 0.0) return 0.0;
  return 2.0 * std::exp(-M * M / (2.0 * s.value()));
}

ConcentrationReport check_concentration(const std::vector<double>& samples, double t,
                                        std::vector<double> m_grid) {
  std::sort(m_grid.begin(), m_grid.end());
  m_grid.erase(std::unique(m_grid.begin(), m_grid.end()), m_grid.end());
  ConcentrationReport rep;
  rep.t = t;
  rep.samples = static_cast<int>(samples.size());
  rep.m_grid = m_grid;
  const MeanVar mv = mean_var(samples);
  rep.degenerate = mv.var == 0.0;
  const double root_t = std::sqrt(t);
  for (double m : m_grid) {
    int hits = 0;
    for (double u : samples)
      if (std::abs(u - mv.mean) >= m * root_t) ++hits;
    rep.hits.push_back(hits);
    rep.freq.push_back(samples.empty() ? 0.0 : static_cast<double>(hits) / samples.size());
    if (hits < 10) rep.under_powered = true;
  }
  for (std::size_t j = 1; j < rep.freq.size(); ++j)
    if (rep.freq[j] > rep.freq[j - 1]) rep.monotone = false;
  for (std::size_t j = 0; j + 2 < m_grid.size(); ++j) {
    if (rep.hits[j] == 0 || rep.hits[j + 1] == 0 || rep.hits[j + 2] == 0) continue;
    const double l0 = std::log(rep.freq[j]);
    const double l1 = std::log(rep.freq[j + 1]);
    const double l2 = std::log(rep.freq[j + 2]);
    const double d1 = m_grid[j + 1] - m_grid[j];
    const double d2 = m_grid[j + 2] - m_grid[j + 1];
    const double v0 = 1.0 / rep.hits[j];
    const double v1 = 1.0 / rep.hits[j + 1];
    const double v2 = 1.0 / rep.hits[j + 2];
    const double tol = 2.0 * std::sqrt((v0 + v1) / (d1 * d1) + (v1 + v2) / (d2 * d2));
    if ((l2 - l1) / d2 > (l1 - l0) / d1 + tol) rep.concave = false;
  }
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t j = 0; j < m_grid.size(); ++j)
    if (rep.hits[j] > 0) {
      x.push_back(m_grid[j] * m_grid[j]);
      y.push_back(std::log(rep.freq[j]));
    }
  if (x.size() >= 2 && x.front() != x.back()) {
    const LinearFit f = linear_fit(x, y);
    rep.fitted = true;
    rep.slope = f.slope;
    rep.c_hat = -f.slope;
    rep.r2 = f.r2;
  }
  return rep;
}

ConcentrationReport check_concentration(const UTable& table, double t,
                                        const std::vector<double>& m_grid) {
  const int j = find_time(table.times, t);
  if (j < 0 || table.samples.empty())
    throw ConfigError("check_concentration: table has no samples at t = " + std::to_string(t));
  return check_concentration(table.samples[j], t, m_grid);
}

std::vector<double> additive_surrogate_samples(int t, int M, std::uint64_t seed, double lo,
                                               double hi) {
  std::vector<double> out(M);
  for (int i = 0; i < M; ++i) {
    NeumaierSum s;
    for (int k = 0; k < t; ++k)
      s.add(lo + (hi - lo) * to_unit(hash_key({seed, static_cast<std::uint64_t>(i),
                                               static_cast<std::uint64_t>(k)})));
    out[i] = s.value();
  }
  return out;
}

SpreadProfile spread_profile(const UTable& table) {
  SpreadProfile p;
  p.times = table.times;
  for (std::size_t j = 0; j < table.times.size(); ++j) {
    const double s = std::sqrt(table.var[j]) / std::sqrt(table.times[j]);
    p.scaled_std.push_back(s);
    p.se.push_back(table.M > 1 ? s / std::sqrt(2.0 * (table.M - 1)) : 0.0);
  }
  for (std::size_t i = 0; i < p.times.size(); ++i)
    for (std::size_t j = i + 1; j < p.times.size(); ++j)
      if (p.scaled_std[j] > p.scaled_std[i] + 2.0 * std::hypot(p.se[i], p.se[j]))
        p.non_increasing = false;
  return p;
}

StripReport strip_experiment(const GameHamiltonian& gh, const Environment& env,
                             const HamiltonianConstants& c, double lo, double hi,
                             const Point& shift, const Point& theta, const SolveConfig& cfg) {
  require_oriented(c);
  if (cfg.eps != 1.0) throw ConfigError("strip_experiment: requires eps = 1");
  const Environment env_hat = replace_on_strip(env, lo, hi, c.e, shift);
  const GameHamiltonian g = gh.shifted(theta);
  const int d = gh.dim();
  StripReport rep;
  rep.delta = c.delta;
  rep.width = hi - lo;
  rep.tolerance = 5.0 * cfg.dx;
  const Grid grid = plan_solve_grid(g, cfg);
  const Box dom = fast_box(grid, 1.0);
  double smin = kInf;
  double smax = -kInf;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Point x{0.0, 0.0};
    for (int k = 0; k < d; ++k) x[k] = (corner >> k) & 1 ? dom.hi[k] : dom.lo[k];
    smin = std::min(smin, dot(x, c.e, d));
    smax = std::max(smax, dot(x, c.e, d));
  }
  if (hi < smin || lo > smax) throw ConfigError("strip_experiment: strip outside the solve box");

  // probe |l - l_hat| at grid nodes and on a 4x finer lattice
  const double h = grid.dx / 4.0;
  std::array<std::int64_t, 2> n{0, 0};
  for (int k = 0; k < d; ++k) n[k] = static_cast<std::int64_t>(std::llround((dom.hi[k] - dom.lo[k]) / h));
  for (std::int64_t i0 = 0; i0 <= n[0]; ++i0)
    for (std::int64_t i1 = 0; i1 <= n[1]; ++i1) {
      const Point x{dom.lo[0] + i0 * h, d == 2 ? dom.lo[1] + i1 * h : 0.0};
      const double s = dot(x, c.e, d);
      if (s < lo || s > hi) continue;
      for (int a = 0; a < g.num_a(); ++a)
        for (int b = 0; b < g.num_b(); ++b)
          rep.l_diff_sup = std::max(rep.l_diff_sup,
                                    std::abs(g.cost(x, a, b, &env) - g.cost(x, a, b, &env_hat)));
    }
  rep.bound = rep.width / rep.delta * rep.l_diff_sup;

  const SolveResult u = solve(g, &env, cfg);
  const SolveResult uh = solve(g, &env_hat, cfg);
  const IndexBox report = grid.nodes_in(cfg.report_box);
  for (std::size_t s = 0; s < u.snapshots.size(); ++s) {
    const IndexBox box = report.intersect(u.snapshots[s].active);
    for (std::int64_t i0 = box.lo[0]; i0 <= box.hi[0]; ++i0)
      for (std::int64_t i1 = box.lo[1]; i1 <= box.hi[1]; ++i1)
        rep.observed = std::max(
            rep.observed, std::abs(u.snapshots[s].at(i0, i1) - uh.snapshots[s].at(i0, i1)));
  }
  rep.holds = rep.observed <= rep.bound + rep.tolerance;
  return rep;
}

SubadditivityReport check_subadditivity(const UTable& table) {
  SubadditivityReport rep;
  const auto& ts = table.times;
  const bool have_samples = !table.samples.empty() && table.M > 0;
  std::map<double, std::vector<std::size_t>> by_n;
  for (std::size_t jm = 0; jm < ts.size(); ++jm)
    for (std::size_t jn = 0; jn < ts.size(); ++jn) {
      const double m = ts[jm];
      const double n = ts[jn];
      if (n < 2.0) continue;
      const int js = find_time(ts, m + n);
      if (js < 0) continue;
      SubadditivityRow row;
      row.m = m;
      row.n = n;
      if (have_samples) {
        std::vector<double> d(table.M);
        for (int i = 0; i < table.M; ++i)
          d[i] = table.samples[jm][i] + table.samples[jn][i] - table.samples[js][i];
        const MeanVar mv = mean_var(d);
        row.defect = mv.mean;
        row.se = mv.se;
      } else {
        row.defect = table.mean[jm] + table.mean[jn] - table.mean[js];
      }
      const double norm_n = std::sqrt(n * std::log(n));
      row.normalized = row.defect / norm_n;
      by_n[n].push_back(rep.rows.size());
      rep.rows.push_back(row);
    }
  for (const auto& [n, idx] : by_n) {
    const double norm_n = std::sqrt(n * std::log(n));
    double k = -kInf;
    double ke = 0.0;
    double km = -kInf;
    double kme = 0.0;
    for (std::size_t r : idx) {
      const SubadditivityRow& row = rep.rows[r];
      if (row.normalized > k) {
        k = row.normalized;
        ke = row.se / norm_n;
      }
      if (-row.normalized > km) {
        km = -row.normalized;
        kme = row.se / norm_n;
      }
      rep.k_abs_max = std::max(rep.k_abs_max, std::abs(row.normalized));
    }
    rep.n_values.push_back(n);
    rep.k_hat.push_back(k);
    rep.k_err.push_back(ke);
    rep.k_hat_mirror.push_back(km);
    rep.k_err_mirror.push_back(kme);
  }
  rep.k_hat_max = rep.k_hat.empty() ? 0.0 : *std::max_element(rep.k_hat.begin(), rep.k_hat.end());
  for (std::size_t i = 0; i < rep.n_values.size(); ++i)
    for (std::size_t j = i + 1; j < rep.n_values.size(); ++j) {
      if (rep.k_hat[j] > rep.k_hat[i] + 2.0 * std::hypot(rep.k_err[i], rep.k_err[j]))
        rep.stable = false;
      if (rep.k_hat_mirror[j] >
          rep.k_hat_mirror[i] + 2.0 * std::hypot(rep.k_err_mirror[i], rep.k_err_mirror[j]))
        rep.stable_mirror = false;
    }
  return rep;
}

double doubling_constant() {
  NeumaierSum s;
  for (int k = 1; k < 400; ++k) s.add(std::pow(2.0, -0.5 * k) * std::sqrt(k + 1.0));
  return s.value();
}

RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& seq,
                 bool log_corrected) {
  RateFit fit;
  fit.log_corrected = log_corrected;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const int k = find_time(times, 2.0 * times[j]);
    if (k < 0 || times[j] <= 1.0) continue;
    double e = std::abs(seq[k] - seq[j]);
    if (log_corrected) e /= std::sqrt(std::log(times[j]));
    if (!(e > 0.0)) continue;
    fit.t.push_back(times[j]);
    fit.err.push_back(e);
  }
  if (fit.t.size() < 2) {
    fit.note = "fewer than two nonzero doubling differences";
    return fit;
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < fit.t.size(); ++i) {
    lx.push_back(std::log(fit.t[i]));
    ly.push_back(std::log(fit.err[i]));
  }
  const LinearFit f = linear_fit(lx, ly);
  fit.fitted = true;
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.r2 = f.r2;
  return fit;
}

EffectiveEstimate extract_effective_H(const UTable& table, std::optional<double> k_hat,
                                      bool log_corrected) {
  if (table.times.size() < 3)
    throw ConfigError("extract_effective_H: fewer than 3 schedule points, refusing to fit a rate");
  validate_schedule(table.times);
  if (k_hat && !(*k_hat >= 0.0)) throw ConfigError("extract_effective_H: K must be >= 0");
  EffectiveEstimate est;
  est.theta = table.theta;
  est.times = table.times;
  for (std::size_t j = 0; j < table.times.size(); ++j)
    est.sequence.push_back(-table.mean[j] / table.times[j]);
  est.defects = check_subadditivity(table);
  est.k_fitted = !k_hat.has_value();
  est.k_hat = k_hat ? *k_hat : est.defects.k_abs_max;
  est.A = est.k_hat * doubling_constant();
  const std::size_t last = table.times.size() - 1;
  est.t_max = table.times[last];
  est.h_bar = est.sequence[last];
  est.band = est.A * std::sqrt(std::max(0.0, std::log(est.t_max)) / est.t_max);
  est.se = table.se(last) / est.t_max;
  est.ci = 3.0 * est.se + est.band;
  est.rate = fit_rate(table.times, est.sequence, log_corrected);
  return est;
}

TimeLipschitzReport check_time_lipschitz(const UTable& table) {
  TimeLipschitzReport rep;
  rep.worst_excess = -kInf;
  const double slope = table.beta * (1.0 + norm(table.theta, table.dim));
  const bool have_samples = !table.samples.empty() && table.M > 1;
  for (std::size_t j = 0; j < table.times.size(); ++j)
    for (std::size_t k = j + 1; k < table.times.size(); ++k) {
      double sd = 0.0;
      if (have_samples) {
        std::vector<double> d(table.M);
        for (int i = 0; i < table.M; ++i) d[i] = table.samples[k][i] - table.samples[j][i];
        sd = mean_var(d).se;
      }
      const double excess = std::abs(table.mean[k] - table.mean[j]) -
                            slope * (table.times[k] - table.times[j]) - 2.0 * sd;
      rep.worst_excess = std::max(rep.worst_excess, excess);
    }
  rep.holds = rep.worst_excess <= 0.0;
  return rep;
}

EffectivePropertiesReport effective_H_properties(const std::vector<EffectiveEstimate>& est,
                                                 double beta, int dim) {
  if (est.size() < 2) throw ConfigError("effective_H_properties: need at least two theta values");
  EffectivePropertiesReport rep;
  rep.worst_bound_excess = -kInf;
  rep.worst_lip_excess = -kInf;
  for (const auto& e : est)
    rep.worst_bound_excess = std::max(
        rep.worst_bound_excess, std::abs(e.h_bar) - beta * (1.0 + norm(e.theta, dim)) - e.ci);
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = i + 1; j < est.size(); ++j)
      rep.worst_lip_excess =
          std::max(rep.worst_lip_excess, std::abs(est[i].h_bar - est[j].h_bar) -
                                             beta * norm(sub(est[i].theta, est[j].theta), dim) -
                                             est[i].ci - est[j].ci);
  rep.bound_ok = rep.worst_bound_excess <= 0.0;
  rep.lipschitz_ok = rep.worst_lip_excess <= 0.0;
  return rep;
}

double transport_mean_cost(const EnvSpec& spec, double c, double scale) {
  spec.validate();
  const double r = spec.bump_radius;
  const double lambda = spec.density / std::pow(spec.range, spec.dim);
  const double lo = spec.amp_lo;
  const double hi = spec.amp_hi;
  if (hi == 0.0) return c;
  // measure of {z : phi(|z| / r) > q}, q in (0, 1)
  auto level_set = [&](double q) {
    if (q >= 1.0) return 0.0;
    const double s2 = 1.0 - std::sqrt(q);
    return spec.dim == 1 ? 2.0 * r * std::sqrt(s2) : std::numbers::pi * r * r * s2;
  };
  auto mean_measure = [&](double y) {
    if (hi == lo) return y < hi ? level_set(y / hi) : 0.0;
    const double a = std::max(lo, y);
    if (a >= hi) return 0.0;
    // xi = a + (hi - a) s^2 removes the square-root endpoint behaviour
    const double integral = simpson(
        [&](double s) {
          const double xi = a + (hi - a) * s * s;
          return xi > 0.0 ? level_set(y / xi) * 2.0 * (hi - a) * s : 0.0;
        },
        0.0, 1.0, 600);
    return integral / (hi - lo);
  };
  const double mean = simpson(
      [&](double y) { return 1.0 - std::exp(-lambda * mean_measure(y)); }, 0.0, hi, 2000);
  return c + scale * mean;
}

RateReport rate_experiment(const GameHamiltonian& gh, const EnvSpec& family, const Point& theta,
                           double h_bar, const std::vector<double>& eps_list, double R, double T,
                           int M, std::uint64_t base_seed, const RateOptions& opt) {
  if (eps_list.size() < 2) throw ConfigError("campaign.eps_list: need at least two values");
  for (double e : eps_list)
    if (!(e > 0.0) || e > 0.5) throw ConfigError("campaign.eps_list: eps must lie in (0, 1/2]");
  if (M < 2) throw ConfigError("campaign.M: need at least two samples");
  family.validate();
  const HamiltonianConstants c = certify_constants(gh, family);
  require_oriented(c);
  const GameHamiltonian g = gh.shifted(theta);
  const int d = gh.dim();
  const std::size_t ne = eps_list.size();

  RateReport rep;
  rep.degenerate = !gh.uses_env() && !gh.localized();
  rep.rows.resize(ne);
  for (std::size_t k = 0; k < ne; ++k) {
    rep.rows[k].eps = eps_list[k];
    rep.rows[k].errors.assign(M, 0.0);
    rep.rows[k].calibration_errors.assign(M, 0.0);
  }
  parallel_for(static_cast<std::size_t>(2 * M), opt.workers, [&](std::size_t unit) {
    const bool calib = unit >= static_cast<std::size_t>(M);
    const std::size_t i = calib ? unit - M : unit;
    EnvSpec s = family;
    s.seed = sample_seed(calib ? opt.calibration_seed : base_seed, i);
    for (std::size_t k = 0; k < ne; ++k) {
      const double eps = eps_list[k];
      SolveConfig cfg;
      cfg.dx = eps * opt.dx;
      cfg.dt = eps * opt.dt;
      cfg.T = T;
      cfg.eps = eps;
      cfg.report_box = Box::cube(d, R);
      const Grid grid = plan_solve_grid(g, cfg);
      EnvSpec se = s;
      se.box = fast_box(grid, eps);
      const Environment env = Environment::sample(se);
      const IndexBox report = grid.nodes_in(cfg.report_box);
      double err = 0.0;
      solve_sl(g, &env, cfg, [&](const Field& u) {
        for (std::int64_t i0 = report.lo[0]; i0 <= report.hi[0]; ++i0)
          for (std::int64_t i1 = report.lo[1]; i1 <= report.hi[1]; ++i1)
            err = std::max(err, std::abs(u.at(i0, i1) + u.t * h_bar));
      });
      (calib ? rep.rows[k].calibration_errors : rep.rows[k].errors)[i] = err;
    }
  });

  auto scale_of = [](double eps) { return std::sqrt(-eps * std::log(eps)); };
  for (const auto& row : rep.rows)
    for (double e : row.calibration_errors) rep.k_hat = std::max(rep.k_hat, e / scale_of(row.eps));
  std::vector<double> lx;
  std::vector<double> ly;
  for (auto& row : rep.rows) {
    row.q25 = quantile(row.errors, 0.25);
    row.median = median(row.errors);
    row.q75 = quantile(row.errors, 0.75);
    row.threshold = rep.k_hat * scale_of(row.eps);
    int over = 0;
    for (double e : row.errors)
      if (e > row.threshold) ++over;
    row.exceedance = static_cast<double>(over) / M;
    row.exceedance_ok = row.exceedance <= 5.0 * row.eps * row.eps;
    rep.exceedance_ok = rep.exceedance_ok && row.exceedance_ok;
    lx.push_back(std::log(row.eps));
    ly.push_back(std::log(std::max(row.median, 1e-300)));
  }
  rep.slope = linear_fit(lx, ly).slope;

  SplitMix64 rng(base_seed ^ 0xb007b007ULL);
  std::vector<double> slopes;
  std::vector<double> resampled(M);
  for (int b = 0; b < opt.bootstrap; ++b) {
    std::vector<int> idx(M);
    for (int i = 0; i < M; ++i) idx[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(M));
    std::vector<double> by;
    for (const auto& row : rep.rows) {
      for (int i = 0; i < M; ++i) resampled[i] = row.errors[idx[i]];
      by.push_back(std::log(std::max(median(resampled), 1e-300)));
    }
    slopes.push_back(linear_fit(lx, by).slope);
  }
  rep.slope_se = slopes.size() > 1 ? std::sqrt(mean_var(slopes).var) : 0.0;

  constexpr double kLo = 0.35;
  constexpr double kHi = 0.65;
  if (rep.degenerate) {
    rep.status = "degenerate";
  } else if (rep.slope >= kLo && rep.slope <= kHi) {
    rep.status = "pass";
  } else if (rep.slope + 2.0 * rep.slope_se < kLo || rep.slope - 2.0 * rep.slope_se > kHi) {
    rep.status = "fail";
  } else {
    rep.status = "inconclusive";
  }
  return rep;
}

double EffectiveTable::operator()(const Point& p) const {
  auto locate = [](const std::vector<double>& axis, double q, double& w) -> std::size_t {
    const double tol = 1e-12 * std::max(1.0, std::abs(axis.back() - axis.front()));
    if (q < axis.front() - tol || q > axis.back() + tol)
      throw DomainError("effective table: p = " + std::to_string(q) + " outside [" +
                        std::to_string(axis.front()) + ", " + std::to_string(axis.back()) + "]");
    q = std::clamp(q, axis.front(), axis.back());
    std::size_t j = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), q) - axis.begin());
    j = std::clamp<std::size_t>(j, 1, axis.size() - 1) - 1;
    w = (q - axis[j]) / (axis[j + 1] - axis[j]);
    return j;
  };
  double w0 = 0.0;
  const std::size_t j0 = locate(p0, p[0], w0);
  if (dim == 1) return (1.0 - w0) * values[j0] + w0 * values[j0 + 1];
  double w1 = 0.0;
  const std::size_t j1 = locate(p1, p[1], w1);
  const std::size_t n1 = p1.size();
  auto v = [&](std::size_t a, std::size_t b) { return values[a * n1 + b]; };
  const double lo = (1.0 - w0) * v(j0, j1) + w0 * v(j0 + 1, j1);
  const double hi = (1.0 - w0) * v(j0, j1 + 1) + w0 * v(j0 + 1, j1 + 1);
  return (1.0 - w1) * lo + w1 * hi;
}

std::array<double, 2> EffectiveTable::slopes() const {
  std::array<double, 2> s{0.0, 0.0};
  const std::size_t n1 = dim == 2 ? p1.size() : 1;
  for (std::size_t a = 0; a + 1 < p0.size(); ++a)
    for (std::size_t b = 0; b < n1; ++b)
      s[0] = std::max(s[0], std::abs(values[(a + 1) * n1 + b] - values[a * n1 + b]) /
                                (p0[a + 1] - p0[a]));
  if (dim == 2)
    for (std::size_t a = 0; a < p0.size(); ++a)
      for (std::size_t b = 0; b + 1 < n1; ++b)
        s[1] = std::max(s[1], std::abs(values[a * n1 + b + 1] - values[a * n1 + b]) /
                                  (p1[b + 1] - p1[b]));
  return s;
}

SolveResult solve_effective(const EffectiveTable& h_bar, const InitialDatum& g, int dim, double T,
                            double R, double dx, double dt, int snapshots) {
  SolveConfig cfg;
  cfg.scheme = Scheme::kLaxFriedrichs;
  cfg.dx = dx;
  cfg.dt = dt;
  cfg.T = T;
  cfg.datum = g;
  cfg.report_box = Box::cube(dim, R);
  cfg.snapshots = snapshots;
  return solve_lf_with(
      [&](const Grid&) -> std::unique_ptr<NodeHamiltonian> {
        return std::make_unique<EffectiveNodeHamiltonian>(h_bar);
      },
      dim, cfg);
}

HomogenizationReport general_datum_homogenization(const GameHamiltonian& gh,
                                                  const EnvSpec& family,
                                                  const EffectiveTable& h_bar,
                                                  const InitialDatum& g,
                                                  const std::vector<double>& eps_list,
                                                  const HomogenizationOptions& opt) {
  if (eps_list.empty()) throw ConfigError("campaign.eps_list: empty");
  if (opt.samples < 1) throw ConfigError("homogenization: need at least one sample");
  family.validate();
  const int d = gh.dim();
  const SolveResult bar =
      solve_effective(h_bar, g, d, opt.T, opt.R, opt.dx_bar, opt.dt_bar, opt.snapshots);
  const IndexBox report = bar.final.grid.nodes_in(Box::cube(d, opt.R));
  const std::size_t ne = eps_list.size();
  const int S = opt.samples;
  std::vector<std::vector<double>> dist(ne, std::vector<double>(S, 0.0));
  parallel_for(ne * S, opt.workers, [&](std::size_t unit) {
    const std::size_t k = unit / S;
    const std::size_t i = unit % S;
    const double eps = eps_list[k];
    SolveConfig cfg;
    cfg.dx = eps * opt.dx;
    cfg.dt = eps * opt.dt;
    cfg.T = opt.T;
    cfg.eps = eps;
    cfg.datum = g;
    cfg.report_box = Box::cube(d, opt.R);
    cfg.snapshots = opt.snapshots;
    const Grid grid = plan_solve_grid(gh, cfg);
    EnvSpec s = family;
    s.seed = sample_seed(opt.base_seed, i);
    s.box = fast_box(grid, eps);
    const Environment env = Environment::sample(s);
    const SolveResult u = solve_sl(gh, &env, cfg);
    double sup = 0.0;
    const std::size_t J = std::min(u.snapshots.size(), bar.snapshots.size());
    for (std::size_t j = 0; j < J; ++j) {
      const Field& ub = bar.snapshots[j];
      for (std::int64_t i0 = report.lo[0]; i0 <= report.hi[0]; ++i0)
        for (std::int64_t i1 = report.lo[1]; i1 <= report.hi[1]; ++i1) {
          const Point x = ub.grid.coord(i0, i1);
          sup = std::max(sup, std::abs(u.snapshots[j].interpolate(x) - ub.at(i0, i1)));
        }
    }
    dist[k][i] = sup;
  });
  HomogenizationReport rep;
  for (std::size_t k = 0; k < ne; ++k) {
    const MeanVar mv = mean_var(dist[k]);
    rep.rows.push_back({eps_list[k], mv.mean, mv.se, dist[k]});
  }
  for (std::size_t k = 0; k + 1 < ne; ++k)
    if (rep.rows[k + 1].distance > rep.rows[k].distance + 2.0 * std::hypot(rep.rows[k].se, rep.rows[k + 1].se))
      rep.decreasing = false;
  return rep;
}

}  // namespace hjlab
