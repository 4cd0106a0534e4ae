#include "hjlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hjlab/parallel.hpp"

namespace hjlab {

namespace {

constexpr double kSnap = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct FootPlan {
  std::vector<std::array<std::int64_t, 2>> offset;
  std::vector<std::array<double, 2>> weight;
  std::array<int, 2> shrink_lo{0, 0};
  std::array<int, 2> shrink_hi{0, 0};
};

FootPlan plan_feet(const GameHamiltonian& gh, double dt, double dx) {
  FootPlan plan;
  const int d = gh.dim();
  for (const Point& f : gh.f_table()) {
    std::array<std::int64_t, 2> o{0, 0};
    std::array<double, 2> w{0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      const double s = dt * f[k] / dx;
      double fl = std::floor(s);
      double frac = s - fl;
      if (frac < kSnap) {
        frac = 0.0;
      } else if (frac > 1.0 - kSnap) {
        fl += 1.0;
        frac = 0.0;
      }
      o[k] = static_cast<std::int64_t>(fl);
      w[k] = frac;
      plan.shrink_lo[k] = std::max<int>(plan.shrink_lo[k], static_cast<int>(-o[k]));
      plan.shrink_hi[k] =
          std::max<int>(plan.shrink_hi[k], static_cast<int>(o[k] + (frac > 0.0 ? 1 : 0)));
    }
    plan.offset.push_back(o);
    plan.weight.push_back(w);
  }
  return plan;
}

IndexBox shrink(const IndexBox& b, const std::array<int, 2>& lo, const std::array<int, 2>& hi,
                int dim) {
  IndexBox out = b;
  for (int k = 0; k < dim; ++k) {
    out.lo[k] += lo[k];
    out.hi[k] -= hi[k];
  }
  return out;
}

[[noreturn]] void audit_failure(std::int64_t i0, std::int64_t i1) {
  throw std::logic_error("audit: read at node (" + std::to_string(i0) + ", " + std::to_string(i1) +
                         ") outside the active box");
}

constexpr std::int64_t kRowChunk = 256;

}  // namespace

bool IndexBox::empty(int dim) const {
  for (int k = 0; k < dim; ++k)
    if (lo[k] > hi[k]) return true;
  return false;
}

std::int64_t IndexBox::count(int dim) const {
  if (empty(dim)) return 0;
  std::int64_t n = 1;
  for (int k = 0; k < dim; ++k) n *= extent(k);
  return n;
}

bool IndexBox::contains(const IndexBox& other, int dim) const {
  for (int k = 0; k < dim; ++k)
    if (other.lo[k] < lo[k] || other.hi[k] > hi[k]) return false;
  return true;
}

IndexBox IndexBox::intersect(const IndexBox& other) const {
  IndexBox out;
  for (int k = 0; k < 2; ++k) {
    out.lo[k] = std::max(lo[k], other.lo[k]);
    out.hi[k] = std::min(hi[k], other.hi[k]);
  }
  return out;
}

IndexBox Grid::nodes_in(const Box& b) const {
  IndexBox out;
  for (int k = 0; k < dim; ++k) {
    if (!std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k]))
      throw ConfigError("grid: box bounds must be finite");
    out.lo[k] = static_cast<std::int64_t>(std::ceil(b.lo[k] / dx - 1e-9));
    out.hi[k] = static_cast<std::int64_t>(std::floor(b.hi[k] / dx + 1e-9));
  }
  return out;
}

double Field::interpolate(const Point& x) const {
  const int d = grid.dim;
  std::array<std::int64_t, 2> i{0, 0};
  std::array<double, 2> w{0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    const double s = x[k] / grid.dx;
    double fl = std::floor(s);
    double frac = s - fl;
    if (frac < kSnap) {
      frac = 0.0;
    } else if (frac > 1.0 - kSnap) {
      fl += 1.0;
      frac = 0.0;
    }
    i[k] = static_cast<std::int64_t>(fl);
    w[k] = frac;
  }
  const std::int64_t j0 = i[0] + (w[0] > 0.0 ? 1 : 0);
  const std::int64_t j1 = i[1] + (w[1] > 0.0 ? 1 : 0);
  if (!active.contains(i[0], i[1]) || !active.contains(j0, j1))
    throw DomainError("field: probe " + format_point(x, d) + " outside the active box");
  const double v00 = at(i[0], i[1]);
  const double v10 = w[0] > 0.0 ? at(j0, i[1]) : 0.0;
  const double lo = w[0] > 0.0 ? (1.0 - w[0]) * v00 + w[0] * v10 : v00;
  if (d == 1 || w[1] == 0.0) return lo;
  const double v01 = at(i[0], j1);
  const double v11 = w[0] > 0.0 ? at(j0, j1) : 0.0;
  const double hi = w[0] > 0.0 ? (1.0 - w[0]) * v01 + w[0] * v11 : v01;
  return (1.0 - w[1]) * lo + w[1] * hi;
}

InitialDatum InitialDatum::zero() {
  return {"zero", [](const Point&) { return 0.0; }, 0.0};
}

InitialDatum InitialDatum::linear(const Point& theta, double c, int dim) {
  return {"linear", [theta, c, dim](const Point& x) { return dot(theta, x, dim) + c; },
          norm(theta, dim)};
}

InitialDatum InitialDatum::function(std::function<double(const Point&)> g, double lip,
                                    std::string kind) {
  return {std::move(kind), std::move(g), lip};
}

InitialDatum InitialDatum::tabulated(Field table, double lip) {
  auto shared = std::make_shared<const Field>(std::move(table));
  return {"tabulated", [shared](const Point& x) { return shared->interpolate(x); }, lip};
}

std::string scheme_name(Scheme s) {
  return s == Scheme::kSemiLagrangian ? "semi-lagrangian" : "lax-friedrichs";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "semi-lagrangian" || s == "sl") return Scheme::kSemiLagrangian;
  if (s == "lax-friedrichs" || s == "lf") return Scheme::kLaxFriedrichs;
  throw ConfigError("solver.scheme: unknown scheme '" + s + "'");
}

int SolveConfig::steps() const {
  const int raw = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  const int j = std::max(1, snapshots);
  return (raw + j - 1) / j * j;
}

void SolveConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver.dt: must be positive");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("solver.dx: must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("solver.T: must be positive");
  if (!(eps > 0.0)) throw ConfigError("solver.eps: must be positive");
  if (snapshots < 1) throw ConfigError("solver.snapshots: must be >= 1");
  if (!(alpha_factor >= 1.0))
    throw ConfigError("solver.alpha_factor: must be >= 1 for a monotone scheme");
  if (!(cfl_max > 0.0) || cfl_max > 1.0) throw ConfigError("solver.cfl_max: must lie in (0, 1]");
  if (!datum.fn) throw ConfigError("solver.datum: missing initial datum");
}

CostTable::CostTable(const GameHamiltonian& gh, const Environment* env, const Grid& grid,
                     double eps, int workers)
    : pairs_(gh.num_pairs()) {
  const std::size_t n = grid.size();
  if (static_cast<double>(n) * pairs_ > 1.5e8)
    throw ConfigError("solver: cost table of " + std::to_string(n) + " nodes x " +
                      std::to_string(pairs_) + " pairs is too large");
  values_.resize(n * pairs_);
  const std::int64_t rows = grid.box.extent(0);
  const std::size_t chunks = static_cast<std::size_t>((rows + kRowChunk - 1) / kRowChunk);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::int64_t r0 = grid.box.lo[0] + static_cast<std::int64_t>(c) * kRowChunk;
    const std::int64_t r1 = std::min(grid.box.hi[0], r0 + kRowChunk - 1);
    for (std::int64_t i0 = r0; i0 <= r1; ++i0)
      for (std::int64_t i1 = grid.box.lo[1]; i1 <= grid.box.hi[1]; ++i1) {
        const Point x = grid.coord(i0, i1);
        const Point y{x[0] / eps, x[1] / eps};
        const std::size_t node = grid.flat(i0, i1);
        for (int a = 0; a < gh.num_a(); ++a)
          for (int b = 0; b < gh.num_b(); ++b)
            values_[node * pairs_ + gh.pair(a, b)] = gh.cost(y, a, b, env);
      }
  });
}

SemiLagrangianStepper::SemiLagrangianStepper(const GameHamiltonian& gh, const Environment* env,
                                             const Grid& grid, double dt, double eps, int workers)
    : gh_(&gh), grid_(grid), dt_(dt), workers_(workers), costs_(gh, env, grid, eps, workers) {
  if (gh.dim() != grid.dim) throw ConfigError("solver: grid and Hamiltonian dimensions differ");
  FootPlan plan = plan_feet(gh, dt, grid.dx);
  for (std::size_t p = 0; p < plan.offset.size(); ++p) feet_.push_back({plan.offset[p], plan.weight[p]});
  shrink_lo_ = plan.shrink_lo;
  shrink_hi_ = plan.shrink_hi;
}

Field SemiLagrangianStepper::step(const Field& in, bool audit) const {
  Field out;
  step_into(in, out, audit);
  return out;
}

void SemiLagrangianStepper::step_into(const Field& in, Field& out, bool audit) const {
  const int d = grid_.dim;
  const IndexBox next = shrink(in.active, shrink_lo_, shrink_hi_, d);
  if (next.empty(d))
    throw UnderMarginedDomain("solver: active box exhausted at t = " + std::to_string(in.t),
                              grid_.dx * std::max({shrink_lo_[0], shrink_hi_[0], shrink_lo_[1],
                                                   shrink_hi_[1]}));
  out.grid = in.grid;
  out.t = in.t + dt_;
  out.active = next;
  if (out.values.size() != in.values.size())
    out.values.assign(in.values.size(), std::numeric_limits<double>::quiet_NaN());
  const int na = gh_->num_a();
  const int nb = gh_->num_b();
  const IndexBox& src = in.active;
  const std::int64_t rows = next.extent(0);
  const std::size_t chunks = static_cast<std::size_t>((rows + kRowChunk - 1) / kRowChunk);
  parallel_for(chunks, workers_, [&](std::size_t c) {
    const std::int64_t r0 = next.lo[0] + static_cast<std::int64_t>(c) * kRowChunk;
    const std::int64_t r1 = std::min(next.hi[0], r0 + kRowChunk - 1);
    for (std::int64_t i0 = r0; i0 <= r1; ++i0) {
      for (std::int64_t i1 = next.lo[1]; i1 <= next.hi[1]; ++i1) {
        const std::size_t node = grid_.flat(i0, i1);
        double best_b = kInf;
        for (int b = 0; b < nb; ++b) {
          double best_a = -kInf;
          for (int a = 0; a < na; ++a) {
            const int p = a * nb + b;
            const Foot& ft = feet_[p];
            const std::int64_t j0 = i0 + ft.offset[0];
            const std::int64_t j1 = i1 + ft.offset[1];
            const double w0 = ft.weight[0];
            const double w1 = ft.weight[1];
            if (audit) {
              if (!src.contains(j0, j1)) audit_failure(j0, j1);
              if (w0 > 0.0 && !src.contains(j0 + 1, j1)) audit_failure(j0 + 1, j1);
              if (w1 > 0.0 && !src.contains(j0, j1 + 1)) audit_failure(j0, j1 + 1);
              if (w0 > 0.0 && w1 > 0.0 && !src.contains(j0 + 1, j1 + 1))
                audit_failure(j0 + 1, j1 + 1);
            }
            const double* base = in.values.data() + grid_.flat(j0, j1);
            double v = base[0];
            if (w0 > 0.0) v = (1.0 - w0) * v + w0 * base[grid_.box.extent(1)];
            if (w1 > 0.0) {
              double v1 = base[1];
              if (w0 > 0.0) v1 = (1.0 - w0) * v1 + w0 * base[grid_.box.extent(1) + 1];
              v = (1.0 - w1) * v + w1 * v1;
            }
            best_a = std::max(best_a, dt_ * costs_(node, p) + v);
          }
          best_b = std::min(best_b, best_a);
        }
        out.values[node] = best_b;
      }
    }
  });
}

GameNodeHamiltonian::GameNodeHamiltonian(const GameHamiltonian& gh, const Environment* env,
                                         const Grid& grid, double eps, int workers)
    : gh_(&gh), costs_(gh, env, grid, eps, workers) {}

double GameNodeHamiltonian::operator()(std::size_t node, const Point& p) const {
  const int na = gh_->num_a();
  const int nb = gh_->num_b();
  const int d = gh_->dim();
  double best_b = -kInf;
  for (int b = 0; b < nb; ++b) {
    double best_a = kInf;
    for (int a = 0; a < na; ++a) {
      const int q = a * nb + b;
      best_a = std::min(best_a, -costs_(node, q) - dot(gh_->f_table()[q], p, d));
    }
    best_b = std::max(best_b, best_a);
  }
  return best_b;
}

std::array<double, 2> GameNodeHamiltonian::speed_bounds() const {
  std::array<double, 2> s{0.0, 0.0};
  for (const Point& f : gh_->f_table())
    for (int k = 0; k < gh_->dim(); ++k) s[k] = std::max(s[k], std::abs(f[k]));
  return s;
}

LaxFriedrichsStepper::LaxFriedrichsStepper(const NodeHamiltonian& h, const Grid& grid, double dt,
                                           double alpha_factor, double cfl_max, int workers)
    : h_(&h), grid_(grid), dt_(dt), workers_(workers) {
  const auto speeds = h.speed_bounds();
  double sum = 0.0;
  for (int k = 0; k < grid.dim; ++k) {
    alpha_[k] = alpha_factor * speeds[k];
    sum += alpha_[k];
  }
  cfl_ = dt * sum / grid.dx;
  if (cfl_ > cfl_max + 1e-12)
    throw ConfigError("solver: CFL number " + std::to_string(cfl_) + " exceeds " +
                      std::to_string(cfl_max) + " (dt * sum alpha_k / dx)");
}

Field LaxFriedrichsStepper::step(const Field& in, bool audit) const {
  Field out;
  step_into(in, out, audit);
  return out;
}

void LaxFriedrichsStepper::step_into(const Field& in, Field& out, bool audit) const {
  const int d = grid_.dim;
  const std::array<int, 2> one{1, d == 2 ? 1 : 0};
  const IndexBox next = shrink(in.active, one, one, d);
  if (next.empty(d))
    throw UnderMarginedDomain("solver: active box exhausted at t = " + std::to_string(in.t),
                              grid_.dx);
  out.grid = in.grid;
  out.t = in.t + dt_;
  out.active = next;
  if (out.values.size() != in.values.size())
    out.values.assign(in.values.size(), std::numeric_limits<double>::quiet_NaN());
  const double inv_dx = 1.0 / grid_.dx;
  const std::int64_t stride0 = grid_.box.extent(1);
  const IndexBox& src = in.active;
  const std::int64_t rows = next.extent(0);
  const std::size_t chunks = static_cast<std::size_t>((rows + kRowChunk - 1) / kRowChunk);
  parallel_for(chunks, workers_, [&](std::size_t c) {
    const std::int64_t r0 = next.lo[0] + static_cast<std::int64_t>(c) * kRowChunk;
    const std::int64_t r1 = std::min(next.hi[0], r0 + kRowChunk - 1);
    for (std::int64_t i0 = r0; i0 <= r1; ++i0) {
      for (std::int64_t i1 = next.lo[1]; i1 <= next.hi[1]; ++i1) {
        if (audit) {
          if (!src.contains(i0 - 1, i1) || !src.contains(i0 + 1, i1)) audit_failure(i0 + 1, i1);
          if (d == 2 && (!src.contains(i0, i1 - 1) || !src.contains(i0, i1 + 1)))
            audit_failure(i0, i1 + 1);
        }
        const std::size_t node = grid_.flat(i0, i1);
        const double* u = in.values.data() + node;
        Point pbar{0.0, 0.0};
        double visc = 0.0;
        const std::int64_t strides[2] = {stride0, 1};
        for (int k = 0; k < d; ++k) {
          const double pp = (u[strides[k]] - u[0]) * inv_dx;
          const double pm = (u[0] - u[-strides[k]]) * inv_dx;
          pbar[k] = 0.5 * (pp + pm);
          visc += alpha_[k] * 0.5 * (pp - pm);
        }
        out.values[node] = u[0] - dt_ * ((*h_)(node, pbar) - visc);
      }
    }
  });
}

Grid plan_grid(int dim, double dx, const Box& report_box, int steps,
               const std::array<int, 2>& shrink_lo, const std::array<int, 2>& shrink_hi,
               const std::optional<Box>& domain) {
  Grid g;
  g.dim = dim;
  g.dx = dx;
  const IndexBox report = g.nodes_in(report_box);
  if (report.empty(dim)) throw ConfigError("solver.report_box: contains no grid node");
  IndexBox need = report;
  for (int k = 0; k < dim; ++k) {
    need.lo[k] -= static_cast<std::int64_t>(steps) * shrink_lo[k];
    need.hi[k] += static_cast<std::int64_t>(steps) * shrink_hi[k];
  }
  if (!domain) {
    g.box = need;
    return g;
  }
  const IndexBox have = g.nodes_in(*domain);
  if (!have.contains(need, dim)) {
    double margin = 0.0;
    for (int k = 0; k < dim; ++k)
      margin = std::max({margin, dx * steps * shrink_lo[k], dx * steps * shrink_hi[k]});
    throw UnderMarginedDomain(
        "solver.domain: under-margined; the report box needs a margin of " +
            std::to_string(margin) + " around it for the requested horizon",
        margin);
  }
  g.box = have;
  return g;
}

Grid plan_solve_grid(const GameHamiltonian& gh, const SolveConfig& cfg) {
  cfg.validate();
  const int n = cfg.steps();
  if (cfg.scheme == Scheme::kSemiLagrangian) {
    const FootPlan plan = plan_feet(gh, cfg.step_size(), cfg.dx);
    return plan_grid(gh.dim(), cfg.dx, cfg.report_box, n, plan.shrink_lo, plan.shrink_hi,
                     cfg.domain);
  }
  const std::array<int, 2> one{1, gh.dim() == 2 ? 1 : 0};
  return plan_grid(gh.dim(), cfg.dx, cfg.report_box, n, one, one, cfg.domain);
}

Box fast_box(const Grid& grid, double eps) {
  Box b = Box::cube(grid.dim, 0.0);
  for (int k = 0; k < grid.dim; ++k) {
    b.lo[k] = static_cast<double>(grid.box.lo[k]) * grid.dx / eps;
    b.hi[k] = static_cast<double>(grid.box.hi[k]) * grid.dx / eps;
  }
  return b;
}

Field initial_field(const Grid& grid, const InitialDatum& g) {
  Field f;
  f.grid = grid;
  f.t = 0.0;
  f.active = grid.box;
  f.values.resize(grid.size());
  for (std::int64_t i0 = grid.box.lo[0]; i0 <= grid.box.hi[0]; ++i0)
    for (std::int64_t i1 = grid.box.lo[1]; i1 <= grid.box.hi[1]; ++i1)
      f.values[grid.flat(i0, i1)] = g.fn(grid.coord(i0, i1));
  return f;
}

namespace {

template <class Stepper>
SolveResult run_steps(const Stepper& stepper, const Grid& grid, const SolveConfig& cfg,
                      const FieldObserver& observer) {
  SolveResult res;
  res.steps = cfg.steps();
  res.dt = cfg.step_size();
  const int every = res.steps / cfg.snapshots;
  Field cur = initial_field(grid, cfg.datum);
  Field next;
  res.snapshots.push_back(cur);
  if (observer) observer(cur);
  for (int n = 1; n <= res.steps; ++n) {
    stepper.step_into(cur, next, cfg.audit_reads);
    next.t = cfg.T * n / res.steps;
    std::swap(cur, next);
    res.telemetry.push_back({n, cur.t, cur.active, cur.active.count(grid.dim)});
    if (observer) observer(cur);
    if (n % every == 0) res.snapshots.push_back(cur);
  }
  res.final = std::move(cur);
  return res;
}

}  // namespace

SolveResult solve_sl(const GameHamiltonian& gh, const Environment* env, const SolveConfig& cfg,
                     const FieldObserver& observer) {
  cfg.validate();
  const int n = cfg.steps();
  const double dt = cfg.step_size();
  const FootPlan plan = plan_feet(gh, dt, cfg.dx);
  const Grid grid =
      plan_grid(gh.dim(), cfg.dx, cfg.report_box, n, plan.shrink_lo, plan.shrink_hi, cfg.domain);
  const SemiLagrangianStepper stepper(gh, env, grid, dt, cfg.eps, cfg.workers);
  return run_steps(stepper, grid, cfg, observer);
}

SolveResult solve_lf_with(
    const std::function<std::unique_ptr<NodeHamiltonian>(const Grid&)>& make_h, int dim,
    const SolveConfig& cfg, const FieldObserver& observer) {
  cfg.validate();
  const int n = cfg.steps();
  const double dt = cfg.step_size();
  const std::array<int, 2> one{1, dim == 2 ? 1 : 0};
  const Grid grid = plan_grid(dim, cfg.dx, cfg.report_box, n, one, one, cfg.domain);
  const std::unique_ptr<NodeHamiltonian> h = make_h(grid);
  const LaxFriedrichsStepper stepper(*h, grid, dt, cfg.alpha_factor, cfg.cfl_max, cfg.workers);
  return run_steps(stepper, grid, cfg, observer);
}

SolveResult solve_lf(const GameHamiltonian& gh, const Environment* env, const SolveConfig& cfg,
                     const FieldObserver& observer) {
  // reject CFL violations before any cost evaluation
  cfg.validate();
  double sum = 0.0;
  for (int k = 0; k < gh.dim(); ++k) {
    double s = 0.0;
    for (const Point& f : gh.f_table()) s = std::max(s, std::abs(f[k]));
    sum += cfg.alpha_factor * s;
  }
  const double cfl = cfg.step_size() * sum / cfg.dx;
  if (cfl > cfg.cfl_max + 1e-12)
    throw ConfigError("solver: CFL number " + std::to_string(cfl) + " exceeds " +
                      std::to_string(cfg.cfl_max) + " (dt * sum alpha_k / dx)");
  return solve_lf_with(
      [&](const Grid& grid) -> std::unique_ptr<NodeHamiltonian> {
        return std::make_unique<GameNodeHamiltonian>(gh, env, grid, cfg.eps, cfg.workers);
      },
      gh.dim(), cfg, observer);
}

SolveResult solve(const GameHamiltonian& gh, const Environment* env, const SolveConfig& cfg,
                  const FieldObserver& observer) {
  return cfg.scheme == Scheme::kSemiLagrangian ? solve_sl(gh, env, cfg, observer)
                                               : solve_lf(gh, env, cfg, observer);
}

LipschitzReport check_lipschitz(const std::vector<Field>& traj, const HamiltonianConstants& c,
                                double lip_g) {
  LipschitzReport rep;
  if (traj.empty()) return rep;
  const int d = traj.front().grid.dim;
  const double dx = traj.front().grid.dx;
  rep.tolerance = 10.0 * dx;
  rep.time_bound = c.beta1 * (1.0 + lip_g);
  rep.worst_space_excess = -kInf;
  rep.worst_time_excess = -kInf;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const Field& u = traj[s];
    double q = 0.0;
    u.for_active([&](std::int64_t i0, std::int64_t i1) {
      if (i0 < u.active.hi[0]) q = std::max(q, std::abs(u.at(i0 + 1, i1) - u.at(i0, i1)) / dx);
      if (d == 2 && i1 < u.active.hi[1])
        q = std::max(q, std::abs(u.at(i0, i1 + 1) - u.at(i0, i1)) / dx);
    });
    rep.max_space_quotient = std::max(rep.max_space_quotient, q);
    rep.worst_space_excess = std::max(rep.worst_space_excess, q - (c.beta3 * u.t + lip_g));
    if (s == 0) continue;
    const Field& prev = traj[s - 1];
    const double dt = u.t - prev.t;
    if (!(dt > 0.0)) continue;
    const IndexBox both = u.active.intersect(prev.active);
    double tq = 0.0;
    for (std::int64_t i0 = both.lo[0]; i0 <= both.hi[0]; ++i0)
      for (std::int64_t i1 = both.lo[1]; i1 <= both.hi[1]; ++i1)
        tq = std::max(tq, std::abs(u.at(i0, i1) - prev.at(i0, i1)) / dt);
    rep.max_time_quotient = std::max(rep.max_time_quotient, tq);
    rep.worst_time_excess = std::max(rep.worst_time_excess, tq - rep.time_bound);
  }
  rep.space_bound_at_T = c.beta3 * traj.back().t + lip_g;
  rep.space_ok = rep.worst_space_excess <= rep.tolerance;
  rep.time_ok = traj.size() < 2 || rep.worst_time_excess <= rep.tolerance;
  return rep;
}

ComparisonReport check_comparison(const InitialDatum& u0, const InitialDatum& v0,
                                  const GameHamiltonian& gh, const Environment* env,
                                  const SolveConfig& cfg, double tolerance) {
  cfg.validate();
  const int n = cfg.steps();
  const double dt = cfg.step_size();
  ComparisonReport rep;
  rep.tolerance = tolerance;
  rep.steps = n;
  auto gaps = [](const Field& u, const Field& v) {
    double sup = -kInf;
    double inf = kInf;
    u.for_active([&](std::int64_t i0, std::int64_t i1) {
      const double g = u.at(i0, i1) - v.at(i0, i1);
      sup = std::max(sup, g);
      inf = std::min(inf, g);
    });
    return std::pair{sup, inf};
  };
  auto run = [&](const auto& stepper, const Grid& grid) {
    Field u = initial_field(grid, u0);
    Field v = initial_field(grid, v0);
    std::tie(rep.initial_sup_gap, rep.initial_inf_gap) = gaps(u, v);
    rep.max_sup_gap = rep.initial_sup_gap;
    rep.min_inf_gap = rep.initial_inf_gap;
    Field un;
    Field vn;
    for (int s = 1; s <= n; ++s) {
      stepper.step_into(u, un, cfg.audit_reads);
      stepper.step_into(v, vn, cfg.audit_reads);
      std::swap(u, un);
      std::swap(v, vn);
      const auto [sup, inf] = gaps(u, v);
      rep.max_sup_gap = std::max(rep.max_sup_gap, sup);
      rep.min_inf_gap = std::min(rep.min_inf_gap, inf);
      if (sup > rep.initial_sup_gap + tolerance) rep.holds = false;
    }
  };
  if (cfg.scheme == Scheme::kSemiLagrangian) {
    const FootPlan plan = plan_feet(gh, dt, cfg.dx);
    const Grid grid =
        plan_grid(gh.dim(), cfg.dx, cfg.report_box, n, plan.shrink_lo, plan.shrink_hi, cfg.domain);
    run(SemiLagrangianStepper(gh, env, grid, dt, cfg.eps, cfg.workers), grid);
  } else {
    const std::array<int, 2> one{1, gh.dim() == 2 ? 1 : 0};
    const Grid grid = plan_grid(gh.dim(), cfg.dx, cfg.report_box, n, one, one, cfg.domain);
    const GameNodeHamiltonian h(gh, env, grid, cfg.eps, cfg.workers);
    run(LaxFriedrichsStepper(h, grid, dt, cfg.alpha_factor, cfg.cfl_max, cfg.workers), grid);
  }
  return rep;
}

ScalingReport check_scaling(const GameHamiltonian& gh, const Environment* env, const Point& theta,
                            double eps, const SolveConfig& fine_cfg) {
  const int d = gh.dim();
  SolveConfig coarse = fine_cfg;
  coarse.dx = fine_cfg.dx / eps;
  coarse.dt = fine_cfg.dt / eps;
  coarse.T = fine_cfg.T / eps;
  coarse.eps = 1.0;
  coarse.report_box = fine_cfg.report_box.scaled(1.0 / eps, d);
  if (fine_cfg.domain) coarse.domain = fine_cfg.domain->scaled(1.0 / eps, d);
  const auto g = fine_cfg.datum.fn;
  coarse.datum = InitialDatum::function(
      [g, eps](const Point& y) { return g(Point{eps * y[0], eps * y[1]}) / eps; },
      fine_cfg.datum.lip, fine_cfg.datum.kind);
  return check_scaling(gh, env, theta, eps, fine_cfg, coarse);
}

ScalingReport check_scaling(const GameHamiltonian& gh, const Environment* env, const Point& theta,
                            double eps, const SolveConfig& fine_cfg,
                            const SolveConfig& coarse_cfg) {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  SolveConfig fine = fine_cfg;
  fine.eps = eps;
  if (!close(coarse_cfg.eps, 1.0) || !close(coarse_cfg.dx * eps, fine.dx) ||
      !close(coarse_cfg.step_size() * eps, fine.step_size()) || !close(coarse_cfg.T * eps, fine.T) ||
      coarse_cfg.steps() != fine.steps() || coarse_cfg.snapshots != fine.snapshots ||
      coarse_cfg.scheme != fine.scheme)
    throw ConfigError("check_scaling: grids do not match (need dx, dt, T scaled by eps)");
  const GameHamiltonian g = gh.shifted(theta);
  const SolveResult rf = solve(g, env, fine);
  const SolveResult rc = solve(g, env, coarse_cfg);
  ScalingReport rep;
  rep.eps = eps;
  for (std::size_t s = 0; s < rf.snapshots.size() && s < rc.snapshots.size(); ++s) {
    const Field& uf = rf.snapshots[s];
    const Field& uc = rc.snapshots[s];
    const IndexBox both = uf.active.intersect(uc.active);
    if (both.empty(gh.dim())) continue;
    ++rep.compared_times;
    for (std::int64_t i0 = both.lo[0]; i0 <= both.hi[0]; ++i0)
      for (std::int64_t i1 = both.lo[1]; i1 <= both.hi[1]; ++i1) {
        rep.max_abs_diff =
            std::max(rep.max_abs_diff, std::abs(uf.at(i0, i1) - eps * uc.at(i0, i1)));
        ++rep.shared_nodes;
      }
  }
  return rep;
}

}  // namespace hjlab
