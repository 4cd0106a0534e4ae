#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/env.hpp"
#include "hjlab/game.hpp"
#include "hjlab/types.hpp"

namespace hjlab {

/// Inclusive integer index box; axis 1 is {0} in one dimension.
struct IndexBox {
  std::array<std::int64_t, 2> lo{0, 0};
  std::array<std::int64_t, 2> hi{0, 0};

  bool empty(int dim) const;
  std::int64_t extent(int k) const { return hi[k] - lo[k] + 1; }
  std::int64_t count(int dim) const;
  bool contains(std::int64_t i0, std::int64_t i1) const {
    return i0 >= lo[0] && i0 <= hi[0] && i1 >= lo[1] && i1 <= hi[1];
  }
  bool contains(const IndexBox& other, int dim) const;
  IndexBox intersect(const IndexBox& other) const;
  friend bool operator==(const IndexBox&, const IndexBox&) = default;
};

/// Uniform grid with nodes at integer multiples of dx.
struct Grid {
  int dim = 1;
  double dx = 0.1;
  IndexBox box;

  std::size_t size() const { return static_cast<std::size_t>(box.count(dim)); }
  std::size_t flat(std::int64_t i0, std::int64_t i1) const {
    return static_cast<std::size_t>((i0 - box.lo[0]) * box.extent(1) + (i1 - box.lo[1]));
  }
  Point coord(std::int64_t i0, std::int64_t i1) const {
    return {static_cast<double>(i0) * dx, dim == 2 ? static_cast<double>(i1) * dx : 0.0};
  }
  /// Nodes inside a closed box (within 1e-9 dx).
  IndexBox nodes_in(const Box& b) const;
};

/// Grid function u(t, .) with the region still carrying valid values.
struct Field {
  Grid grid;
  double t = 0.0;
  std::vector<double> values;
  IndexBox active;

  double at(std::int64_t i0, std::int64_t i1 = 0) const { return values[grid.flat(i0, i1)]; }
  double& at(std::int64_t i0, std::int64_t i1 = 0) { return values[grid.flat(i0, i1)]; }
  /// Multilinear interpolation inside the active box; DomainError outside.
  double interpolate(const Point& x) const;
  /// Calls fn(i0, i1) for every active node in row-major order.
  template <class Fn>
  void for_active(Fn&& fn) const {
    for (std::int64_t i0 = active.lo[0]; i0 <= active.hi[0]; ++i0)
      for (std::int64_t i1 = active.lo[1]; i1 <= active.hi[1]; ++i1) fn(i0, i1);
  }
};

/// Initial datum g. lip is the certified Lipschitz constant (|Dg|_inf).
struct InitialDatum {
  std::string kind = "zero";
  std::function<double(const Point&)> fn;
  double lip = 0.0;

  static InitialDatum zero();
  static InitialDatum linear(const Point& theta, double c, int dim);
  static InitialDatum function(std::function<double(const Point&)> g, double lip,
                               std::string kind = "function");
  /// Multilinear interpolant of tabulated values; probes outside the table throw DomainError.
  static InitialDatum tabulated(Field table, double lip);
};

enum class Scheme { kSemiLagrangian, kLaxFriedrichs };
std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& s);

struct SolveConfig {
  Scheme scheme = Scheme::kSemiLagrangian;
  double dt = 0.05;
  double dx = 0.05;
  double T = 1.0;
  double eps = 1.0;
  InitialDatum datum = InitialDatum::zero();
  Box report_box = Box::cube(1, 0.0);
  std::optional<Box> domain;  ///< explicit computational box; planned when absent
  int snapshots = 1;          ///< J: evenly spaced snapshot times after t = 0
  double alpha_factor = 1.0;  ///< LF viscosity = alpha_factor * max |f_k|
  double cfl_max = 0.9;
  bool audit_reads = false;   ///< verify every read lies in the active box
  int workers = 1;            ///< threads inside one step

  /// Steps and effective dt; the step count is a multiple of `snapshots`.
  int steps() const;
  double step_size() const { return T / steps(); }
  void validate() const;
};

struct StepTelemetry {
  int step = 0;
  double t = 0.0;
  IndexBox active;
  std::int64_t active_nodes = 0;
};

struct SolveResult {
  Field final;
  std::vector<Field> snapshots;  ///< t = 0 and J evenly spaced times, last equals T
  std::vector<StepTelemetry> telemetry;
  double dt = 0.0;
  int steps = 0;
};

/// Called with the initial field and after every step.
using FieldObserver = std::function<void(const Field&)>;

/// Cost l_theta at every node and action pair, evaluated at x / eps.
class CostTable {
 public:
  CostTable(const GameHamiltonian& gh, const Environment* env, const Grid& grid, double eps,
            int workers = 1);
  double operator()(std::size_t node, int pair) const { return values_[node * pairs_ + pair]; }
  int pairs() const { return pairs_; }

 private:
  int pairs_;
  std::vector<double> values_;
};

/// One step v^{n+1}(x) = min_b max_a { dt l(x/eps, a, b) + I[v^n](x + dt f(a, b)) }.
///
/// The minimizing player chooses b first and the maximizer answers with a,
/// which is the one-step form of a nonanticipating strategy for the maximizer.
/// The foot offset dt f / dx is the same at every node, so each action pair
/// stores one (integer offset, weight) per axis.
class SemiLagrangianStepper {
 public:
  SemiLagrangianStepper(const GameHamiltonian& gh, const Environment* env, const Grid& grid,
                        double dt, double eps, int workers = 1);

  Field step(const Field& in, bool audit = false) const;
  void step_into(const Field& in, Field& out, bool audit = false) const;

  /// Nodes lost per step on the low / high side of each axis.
  const std::array<int, 2>& shrink_lo() const { return shrink_lo_; }
  const std::array<int, 2>& shrink_hi() const { return shrink_hi_; }
  double dt() const { return dt_; }

 private:
  struct Foot {
    std::array<std::int64_t, 2> offset{0, 0};
    std::array<double, 2> weight{0.0, 0.0};
  };
  const GameHamiltonian* gh_;
  Grid grid_;
  double dt_;
  int workers_;
  CostTable costs_;
  std::vector<Foot> feet_;
  std::array<int, 2> shrink_lo_{0, 0};
  std::array<int, 2> shrink_hi_{0, 0};
};

/// H(node, p) for the Lax-Friedrichs scheme, plus per-axis bounds on |dH/dp_k|.
class NodeHamiltonian {
 public:
  virtual ~NodeHamiltonian() = default;
  virtual double operator()(std::size_t node, const Point& p) const = 0;
  virtual std::array<double, 2> speed_bounds() const = 0;
};

/// Game Hamiltonian at x / eps with tabulated costs.
class GameNodeHamiltonian final : public NodeHamiltonian {
 public:
  GameNodeHamiltonian(const GameHamiltonian& gh, const Environment* env, const Grid& grid,
                      double eps, int workers = 1);
  double operator()(std::size_t node, const Point& p) const override;
  std::array<double, 2> speed_bounds() const override;

 private:
  const GameHamiltonian* gh_;
  CostTable costs_;
};

/// Monotone local Lax-Friedrichs step
///   u^{n+1} = u - dt [ H(x, pbar) - sum_k alpha_k (p+_k - p-_k) / 2 ],
/// dropping one node per side and axis each step.
class LaxFriedrichsStepper {
 public:
  LaxFriedrichsStepper(const NodeHamiltonian& h, const Grid& grid, double dt,
                       double alpha_factor, double cfl_max, int workers = 1);

  Field step(const Field& in, bool audit = false) const;
  void step_into(const Field& in, Field& out, bool audit = false) const;
  double cfl() const { return cfl_; }
  const std::array<double, 2>& alpha() const { return alpha_; }

 private:
  const NodeHamiltonian* h_;
  Grid grid_;
  double dt_;
  int workers_;
  std::array<double, 2> alpha_{0.0, 0.0};
  double cfl_ = 0.0;
};

/// Grid covering the report box plus the margin consumed over `steps` steps.
/// Throws UnderMarginedDomain when an explicit domain is too small.
Grid plan_grid(int dim, double dx, const Box& report_box, int steps,
               const std::array<int, 2>& shrink_lo, const std::array<int, 2>& shrink_hi,
               const std::optional<Box>& domain);

/// Grid the configured scheme will use for gh (report box plus consumed margin).
Grid plan_solve_grid(const GameHamiltonian& gh, const SolveConfig& cfg);

/// The grid's box in the environment's (fast) coordinates x / eps.
Box fast_box(const Grid& grid, double eps);

/// Initial field on a grid (datum evaluated at every node).
Field initial_field(const Grid& grid, const InitialDatum& g);

SolveResult solve_sl(const GameHamiltonian& gh, const Environment* env, const SolveConfig& cfg,
                     const FieldObserver& observer = {});
SolveResult solve_lf(const GameHamiltonian& gh, const Environment* env, const SolveConfig& cfg,
                     const FieldObserver& observer = {});
/// LF solve of u_t + H(Du) = 0 for a generic node Hamiltonian built on the planned grid.
SolveResult solve_lf_with(const std::function<std::unique_ptr<NodeHamiltonian>(const Grid&)>& make_h,
                          int dim, const SolveConfig& cfg, const FieldObserver& observer = {});
SolveResult solve(const GameHamiltonian& gh, const Environment* env, const SolveConfig& cfg,
                  const FieldObserver& observer = {});

struct LipschitzReport {
  double max_space_quotient = 0.0;
  double max_time_quotient = 0.0;
  double space_bound_at_T = 0.0;   ///< beta3 T + Lip(g)
  double time_bound = 0.0;         ///< beta1 (1 + Lip(g))
  double tolerance = 0.0;          ///< 10 dx
  double worst_space_excess = 0.0; ///< max over snapshots of quotient - (beta3 t + Lip g)
  double worst_time_excess = 0.0;
  bool space_ok = true;
  bool time_ok = true;
  bool ok() const { return space_ok && time_ok; }
};

/// Discrete difference quotients of a trajectory (eps = 1) against the a-priori bounds.
LipschitzReport check_lipschitz(const std::vector<Field>& traj, const HamiltonianConstants& c,
                                double lip_g);

struct ComparisonReport {
  double initial_sup_gap = 0.0;  ///< sup (u0 - v0)
  double initial_inf_gap = 0.0;  ///< inf (u0 - v0)
  double max_sup_gap = 0.0;      ///< max over steps of sup (u - v)
  double min_inf_gap = 0.0;      ///< min over steps of inf (u - v)
  double tolerance = 0.0;
  int steps = 0;
  bool holds = true;
};

/// Evolves both data with the configured scheme in lockstep and checks
/// sup(u - v)(t) <= sup(u0 - v0) + tolerance at every step.
ComparisonReport check_comparison(const InitialDatum& u0, const InitialDatum& v0,
                                  const GameHamiltonian& gh, const Environment* env,
                                  const SolveConfig& cfg, double tolerance = 1e-12);

struct ScalingReport {
  double eps = 1.0;
  double max_abs_diff = 0.0;
  std::int64_t shared_nodes = 0;
  int compared_times = 0;
};

/// sup over shared nodes and snapshot times of |u^eps(t, x) - eps u(t / eps, x / eps)|.
/// fine_cfg describes the eps-problem; the unit-scale run uses dx / eps, dt / eps, T / eps.
ScalingReport check_scaling(const GameHamiltonian& gh, const Environment* env, const Point& theta,
                            double eps, const SolveConfig& fine_cfg);
/// Same with an explicit unit-scale configuration; rejects grids that do not match.
ScalingReport check_scaling(const GameHamiltonian& gh, const Environment* env, const Point& theta,
                            double eps, const SolveConfig& fine_cfg,
                            const SolveConfig& coarse_cfg);

}  // namespace hjlab
