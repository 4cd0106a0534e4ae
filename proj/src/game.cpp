#include "hjlab/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hjlab/rng.hpp"

namespace hjlab {

GameHamiltonian::GameHamiltonian(int dim, std::vector<Point> actions_a,
                                 std::vector<Point> actions_b, std::vector<Point> f_table)
    : dim_(dim),
      actions_a_(std::move(actions_a)),
      actions_b_(std::move(actions_b)),
      f_(std::move(f_table)) {
  if (dim_ != 1 && dim_ != 2) throw ConfigError("hamiltonian: dimension must be 1 or 2");
  if (actions_a_.empty() || actions_b_.empty())
    throw ConfigError("hamiltonian: action sets must be nonempty");
  if (static_cast<int>(f_.size()) != num_pairs())
    throw ConfigError("hamiltonian.f: table must have |A|*|B| entries");
  for (const Point& v : f_)
    for (int k = 0; k < dim_; ++k)
      if (!std::isfinite(v[k])) throw ConfigError("hamiltonian.f: entries must be finite");
  constant_.assign(num_pairs(), 0.0);
  theta_offset_.assign(num_pairs(), 0.0);
}

void GameHamiltonian::set_constant(std::vector<double> c) {
  if (static_cast<int>(c.size()) != num_pairs())
    throw ConfigError("hamiltonian.constants: need |A|*|B| entries");
  constant_ = std::move(c);
}

void GameHamiltonian::set_env_term(double scale, bool per_pair) {
  env_scale_ = scale;
  per_pair_ = per_pair;
}

void GameHamiltonian::set_analytic(AnalyticCost term) { analytic_ = std::move(term); }

void GameHamiltonian::set_localized(Localized term) { localized_ = std::move(term); }

void GameHamiltonian::set_e_hint(const Point& e) { e_hint_ = e; }

double GameHamiltonian::cost(const Point& x, int a, int b, const Environment* env) const {
  const int p = pair(a, b);
  double l = constant_[p] + theta_offset_[p];
  if (env_scale_ != 0.0) {
    if (env == nullptr) throw ConfigError("hamiltonian: environment term needs an environment");
    l += env_scale_ * (per_pair_ ? env->cost(x, a, b) : env->cost(x, 0, 0));
  }
  if (analytic_) l += analytic_->fn(x, a, b);
  if (localized_) {
    const Localized& loc = *localized_;
    const Point& av = actions_a_[a];
    const Point& bv = actions_b_[b];
    l += -loc.g.fn(x, bv, env) + loc.beta * dot(av, bv, loc.action_dim);
  }
  return l;
}

void GameHamiltonian::check_env(const EnvSpec& spec) const {
  if (spec.dim != dim_) throw ConfigError("environment.dim: does not match the Hamiltonian");
  if (!uses_env() || !per_pair_ || spec.shared_channels) return;
  if (spec.channels_a < num_a() || spec.channels_b < num_b())
    throw ConfigError("environment.channels: need at least |A| x |B| = " +
                      std::to_string(num_a()) + " x " + std::to_string(num_b()) +
                      " channels or shared channels");
}

GameHamiltonian GameHamiltonian::shifted(const Point& shift) const {
  GameHamiltonian out = *this;
  for (int k = 0; k < dim_; ++k) out.theta_[k] += shift[k];
  for (int p = 0; p < num_pairs(); ++p) out.theta_offset_[p] = dot(f_[p], out.theta_, dim_);
  return out;
}

double GameHamiltonian::nonenv_sup() const {
  double s = 0.0;
  for (int p = 0; p < num_pairs(); ++p)
    s = std::max(s, std::abs(constant_[p]) + std::abs(theta_offset_[p]));
  if (analytic_) s += analytic_->sup;
  if (localized_) s += localized_->g.sup_on_ball + localized_->beta * localized_->radius;
  return s;
}

double GameHamiltonian::nonenv_lip() const {
  double s = 0.0;
  if (analytic_) s += analytic_->lip;
  if (localized_) s += localized_->g.lip_x;
  return s;
}

double eval_H(const GameHamiltonian& gh, const Point& x, const Point& p, const Environment* env) {
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < gh.num_b(); ++b) {
    double inner = std::numeric_limits<double>::infinity();
    for (int a = 0; a < gh.num_a(); ++a)
      inner = std::min(inner, -gh.cost(x, a, b, env) - dot(gh.f(a, b), p, gh.dim()));
    best = std::max(best, inner);
  }
  return best;
}

double orientation_margin(const GameHamiltonian& gh, const Point& e) {
  double m = std::numeric_limits<double>::infinity();
  for (const Point& v : gh.f_table()) m = std::min(m, dot(v, e, gh.dim()));
  return m;
}

Point select_orientation(const GameHamiltonian& gh) {
  if (gh.dim() == 1) {
    const Point plus{1.0, 0.0};
    const Point minus{-1.0, 0.0};
    return orientation_margin(gh, plus) >= orientation_margin(gh, minus) ? plus : minus;
  }
  auto at = [](double phi) { return Point{std::cos(phi), std::sin(phi)}; };
  constexpr int kAngles = 720;
  double best_phi = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kAngles; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / kAngles;
    const double m = orientation_margin(gh, at(phi));
    if (m > best) {
      best = m;
      best_phi = phi;
    }
  }
  for (double step = 2.0 * std::numbers::pi / kAngles; step > 1e-13; step *= 0.5) {
    for (bool moved = true; moved;) {
      moved = false;
      for (double cand : {best_phi + step, best_phi - step}) {
        const double m = orientation_margin(gh, at(cand));
        if (m > best) {
          best = m;
          best_phi = cand;
          moved = true;
        }
      }
    }
  }
  return at(best_phi);
}

HamiltonianConstants certify_constants(const GameHamiltonian& gh,
                                       const std::optional<EnvSpec>& env_family) {
  HamiltonianConstants c;
  for (const Point& v : gh.f_table()) c.f_inf = std::max(c.f_inf, norm(v, gh.dim()));
  c.e = gh.e_hint() ? *gh.e_hint() : select_orientation(gh);
  c.delta = orientation_margin(gh, c.e);
  c.l_inf = gh.nonenv_sup();
  c.lip_l = gh.nonenv_lip();
  if (gh.uses_env()) {
    if (!env_family)
      throw ConfigError("hamiltonian: environment term present but no environment family given");
    gh.check_env(*env_family);
    const EnvCertificate cert = certify(*env_family);
    c.l_inf += std::abs(gh.env_scale()) * cert.sup;
    c.lip_l += std::abs(gh.env_scale()) * cert.lip;
  }
  c.beta1 = std::max(c.l_inf, c.f_inf);
  c.beta3 = c.lip_l;
  c.beta = std::max(c.beta1, c.lip_l);
  return c;
}

BoundsProbeReport probe_bounds(const GameHamiltonian& gh, const Environment* env,
                               const HamiltonianConstants& c, const Box& x_box, double p_radius,
                               int probes, std::uint64_t seed) {
  const int d = gh.dim();
  SplitMix64 rng(seed);
  BoundsProbeReport rep;
  rep.probes = probes;
  rep.tolerance = 1e-12 * std::max(1.0, c.beta * (1.0 + p_radius * d));
  rep.worst_h1 = rep.worst_h2 = rep.worst_h3 = -std::numeric_limits<double>::infinity();
  const auto draw = [&](const Point& lo, const Point& hi) {
    Point z{0.0, 0.0};
    for (int k = 0; k < d; ++k) z[k] = rng.uniform(lo[k], hi[k]);
    return z;
  };
  const Point plo{-p_radius, -p_radius};
  const Point phi{p_radius, p_radius};
  for (int i = 0; i < probes; ++i) {
    const Point x = draw(x_box.lo, x_box.hi);
    const Point y = draw(x_box.lo, x_box.hi);
    const Point p = draw(plo, phi);
    const Point q = draw(plo, phi);
    const double hxp = eval_H(gh, x, p, env);
    rep.worst_h1 = std::max(rep.worst_h1, std::abs(hxp) - c.beta * (1.0 + norm(p, d)));
    rep.worst_h2 = std::max(rep.worst_h2, std::abs(hxp - eval_H(gh, x, q, env)) -
                                              c.beta * norm(sub(p, q), d));
    rep.worst_h3 = std::max(rep.worst_h3, std::abs(hxp - eval_H(gh, y, p, env)) -
                                              c.beta * norm(sub(x, y), d));
  }
  return rep;
}

void require_oriented(const HamiltonianConstants& c) {
  if (!c.oriented())
    throw ConfigError("hamiltonian: not oriented (delta = " + std::to_string(c.delta) +
                      " <= 0); homogenization experiments refuse to run");
}

GameHamiltonian shift_momentum(const GameHamiltonian& gh, const Point& theta) {
  return gh.shifted(theta);
}

std::vector<Point> ball_grid(int m, int n, double radius) {
  if (m != 1 && m != 2) throw ConfigError("localize: action dimension must be 1 or 2");
  if (n < 2) throw ConfigError("localize: grid counts must be >= 2");
  std::vector<Point> pts;
  auto coord = [&](int i) { return -radius + 2.0 * radius * i / (n - 1); };
  if (m == 1) {
    for (int i = 0; i < n; ++i) pts.push_back({coord(i), 0.0});
    return pts;
  }
  const double lim = radius * (1.0 + 1e-12);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point q{coord(i), coord(j)};
      if (norm(q, 2) <= lim) pts.push_back(q);
    }
  return pts;
}

GameHamiltonian localize(const LipschitzHamiltonian& g, double beta, double radius, const Point& v,
                         const std::vector<std::vector<double>>& pi, int dim, int n_a, int n_b) {
  if (!(beta > 0.0)) throw ConfigError("localize: beta must be positive");
  if (!(radius > 0.0)) throw ConfigError("localize: R must be positive");
  if (g.lip_q > beta * (1.0 + 1e-12))
    throw ConfigError("localize: G is not beta-Lipschitz in p for the supplied beta");
  const int m = static_cast<int>(pi.size());
  if (m < 1 || m > 2) throw ConfigError("localize: pi must have 1 or 2 rows");
  for (const auto& row : pi)
    if (static_cast<int>(row.size()) != dim) throw ConfigError("localize: pi rows must have d entries");
  const double vn = norm(v, dim);
  if (!(vn > 0.0)) throw ConfigError("localize: v must be nonzero");
  for (const auto& row : pi) {
    double s = 0.0;
    double scale = 0.0;
    for (int j = 0; j < dim; ++j) {
      s += row[j] * v[j];
      scale += std::abs(row[j] * v[j]);
    }
    if (std::abs(s) > 1e-12 * std::max(1.0, scale))
      throw ConfigError("localize: pi(v) != 0, the orientation certificate would fail");
  }
  std::vector<Point> as = ball_grid(m, n_a, 1.0);
  std::vector<Point> bs = ball_grid(m, n_b, radius);
  std::vector<Point> f;
  f.reserve(as.size() * bs.size());
  for (const Point& a : as) {
    Point fa{0.0, 0.0};
    for (int j = 0; j < dim; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += pi[i][j] * (-beta * a[i]);
      fa[j] = s - v[j];
    }
    for (std::size_t b = 0; b < bs.size(); ++b) f.push_back(fa);
  }
  GameHamiltonian gh(dim, std::move(as), std::move(bs), std::move(f));
  GameHamiltonian::Localized loc;
  loc.g = g;
  loc.beta = beta;
  loc.radius = radius;
  loc.action_dim = m;
  loc.pi = pi;
  loc.v = v;
  gh.set_localized(std::move(loc));
  Point e{0.0, 0.0};
  for (int k = 0; k < dim; ++k) e[k] = -v[k] / vn;
  gh.set_e_hint(e);
  return gh;
}

LocalizationReport verify_localization(const GameHamiltonian& gh, const Environment* env,
                                       const Box& probe_box, int probes, std::uint64_t seed) {
  if (!gh.localized()) throw ConfigError("verify_localization: Hamiltonian was not localized");
  const auto& loc = *gh.localized();
  const int d = gh.dim();
  SplitMix64 rng(seed);
  LocalizationReport rep;
  rep.probes = probes;
  for (int i = 0; i < probes; ++i) {
    Point x{0.0, 0.0};
    for (int k = 0; k < d; ++k) x[k] = rng.uniform(probe_box.lo[k], probe_box.hi[k]);
    Point dir{1.0, 0.0};
    if (d == 1) {
      dir[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    } else {
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      dir = {std::cos(phi), std::sin(phi)};
    }
    // every fourth probe sits on the sphere |p| = R
    const double rad =
        i % 4 == 0 ? loc.radius : loc.radius * std::pow(rng.uniform(), 1.0 / d);
    const Point p = scale(dir, rad);
    Point q{0.0, 0.0};
    for (int r = 0; r < loc.action_dim; ++r)
      for (int j = 0; j < d; ++j) q[r] += loc.pi[r][j] * p[j];
    const double target = loc.g.fn(x, q, env) + dot(p, loc.v, d);
    const double err = std::abs(eval_H(gh, x, p, env) - target);
    if (err > rep.max_error) {
      rep.max_error = err;
      rep.worst_x = x;
      rep.worst_p = p;
    }
  }
  return rep;
}

GameHamiltonian make_transport(int dim, const Point& velocity, double c, double env_scale) {
  GameHamiltonian gh(dim, {Point{0.0, 0.0}}, {Point{0.0, 0.0}}, {velocity});
  gh.set_constant({c});
  gh.set_env_term(env_scale, false);
  return gh;
}

GameHamiltonian make_two_speed_control(int dim, const Point& direction,
                                       const std::vector<double>& speeds,
                                       const std::vector<double>& constants, double env_scale) {
  if (speeds.empty()) throw ConfigError("hamiltonian.params.speeds: need at least one speed");
  if (constants.size() != speeds.size())
    throw ConfigError("hamiltonian.params.constants: need one constant per speed");
  const double n = norm(direction, dim);
  if (std::abs(n - 1.0) > 1e-9)
    throw ConfigError("hamiltonian.params.direction: must be a unit vector");
  std::vector<Point> as;
  std::vector<Point> f;
  for (double s : speeds) {
    as.push_back({s, 0.0});
    f.push_back(scale(direction, s));
  }
  GameHamiltonian gh(dim, std::move(as), {Point{0.0, 0.0}}, std::move(f));
  gh.set_constant(constants);
  gh.set_env_term(env_scale, true);
  return gh;
}

GameHamiltonian make_saddle_game(int dim, int n_a, int n_b, std::vector<Point> f_table,
                                 std::vector<double> constants, double env_scale) {
  if (n_a < 1 || n_b < 1) throw ConfigError("hamiltonian.params: action counts must be >= 1");
  std::vector<Point> as;
  std::vector<Point> bs;
  for (int i = 0; i < n_a; ++i) as.push_back({static_cast<double>(i), 0.0});
  for (int j = 0; j < n_b; ++j) bs.push_back({static_cast<double>(j), 0.0});
  GameHamiltonian gh(dim, std::move(as), std::move(bs), std::move(f_table));
  gh.set_constant(std::move(constants));
  gh.set_env_term(env_scale, true);
  return gh;
}

LipschitzHamiltonian profile_hamiltonian(const std::string& name, int m, double slope,
                                         const Point& centre, double radius, double env_scale,
                                         const EnvCertificate& env_cert) {
  LipschitzHamiltonian g;
  std::function<double(const Point&)> g0;
  double g0_sup = 0.0;
  if (name == "abs") {
    g0 = [=](const Point& q) { return slope * norm(sub(q, centre), m); };
    g0_sup = std::abs(slope) * (radius + norm(centre, m));
    g.lip_q = std::abs(slope);
  } else if (name == "sin") {
    g0 = [=](const Point& q) { return slope * std::sin(q[0] - centre[0]); };
    g0_sup = std::abs(slope);
    g.lip_q = std::abs(slope);
  } else if (name == "const") {
    g0 = [=](const Point&) { return centre[0]; };
    g0_sup = std::abs(centre[0]);
  } else {
    throw ConfigError("hamiltonian.params.G0: unknown profile '" + name + "'");
  }
  if (env_scale != 0.0) {
    g.fn = [=](const Point& x, const Point& q, const Environment* env) {
      if (env == nullptr) throw ConfigError("localized: V(x) needs an environment");
      return env_scale * env->cost(x, 0, 0) + g0(q);
    };
  } else {
    g.fn = [=](const Point&, const Point& q, const Environment*) { return g0(q); };
  }
  g.sup_on_ball = g0_sup + std::abs(env_scale) * env_cert.sup;
  g.lip_x = std::abs(env_scale) * env_cert.lip;
  return g;
}

}  // namespace hjlab
