#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/env.hpp"
#include "hjlab/game.hpp"
#include "hjlab/pde.hpp"
#include "hjlab/types.hpp"

namespace hjlab {

/// Discretization and fan-out of a Monte-Carlo campaign. dx and dt are in
/// the environment's unit scale.
struct CampaignOptions {
  double dx = 0.05;
  double dt = 0.05;
  Scheme scheme = Scheme::kSemiLagrangian;
  int workers = 1;
};

/// Monte-Carlo estimates of U_theta(t) = E[u_theta(t, 0, .)].
struct UTable {
  Point theta{0.0, 0.0};
  int dim = 1;
  std::vector<double> times;
  std::vector<std::vector<double>> samples;  ///< samples[j][i]; may be empty for synthetic tables
  std::vector<double> mean;
  std::vector<double> var;
  int M = 0;
  std::uint64_t base_seed = 0;
  double beta = 0.0;             ///< certified beta of the unshifted Hamiltonian
  double bound_ratio_max = 0.0;  ///< max |u| / (beta (1 + |theta|) t)
  int bound_violations = 0;

  double se(std::size_t j) const;
  /// Table with means only (no samples); for planted sequences.
  static UTable synthetic(const std::vector<double>& times, const std::vector<double>& means);
  /// Recompute means and variances from samples.
  void aggregate();
};

/// Sample i uses the environment seed sample_seed(base_seed, i). One solve to
/// max(times) per sample serves every scheduled time, so every time must be a
/// multiple of the step size.
UTable estimate_U(const GameHamiltonian& gh, const EnvSpec& family, const Point& theta,
                  const std::vector<double>& times, int M, std::uint64_t base_seed,
                  const CampaignOptions& opt);

/// u_theta(t, 0) at each time for one environment (the per-sample kernel of estimate_U).
std::vector<double> sample_u_at_origin(const GameHamiltonian& shifted_gh, const EnvSpec& spec,
                                       const std::vector<double>& times,
                                       const CampaignOptions& opt);

/// Pure Azuma-Hoeffding bound 2 exp(-M^2 / (2 sum c_m^2)).
double azuma_bound(const std::vector<double>& c, double M);

struct ConcentrationReport {
  double t = 0.0;
  int samples = 0;
  std::vector<double> m_grid;  ///< sorted ascending
  std::vector<double> freq;    ///< P(|u - U| >= M sqrt t)
  std::vector<int> hits;
  bool under_powered = false;  ///< some reported tail has < 10 hits; nothing asserted
  bool degenerate = false;     ///< zero sample variance
  bool monotone = true;
  bool concave = true;         ///< log-tail slopes non-increasing within noise
  double slope = 0.0;          ///< of log freq against M^2
  double c_hat = 0.0;          ///< -slope
  double r2 = 0.0;
  bool fitted = false;
  bool ok() const { return under_powered || degenerate || (monotone && concave); }
};

ConcentrationReport check_concentration(const std::vector<double>& samples, double t,
                                        std::vector<double> m_grid);
ConcentrationReport check_concentration(const UTable& table, double t,
                                        const std::vector<double>& m_grid);

/// u(t, 0) for the additive surrogate: f = 1, l piecewise constant on unit
/// cells with i.i.d. uniform values in [lo, hi]. Integer t only.
std::vector<double> additive_surrogate_samples(int t, int M, std::uint64_t seed, double lo,
                                               double hi);

struct SpreadProfile {
  std::vector<double> times;
  std::vector<double> scaled_std;  ///< std(u(t)) / sqrt t
  std::vector<double> se;          ///< approx scaled_std / sqrt(2 (M - 1))
  bool non_increasing = true;      ///< s_j <= s_i + 2 sqrt(se_i^2 + se_j^2) for i < j
};
SpreadProfile spread_profile(const UTable& table);

struct StripReport {
  double observed = 0.0;    ///< sup |u - u_hat| over report nodes and snapshots
  double l_diff_sup = 0.0;  ///< probed sup |l - l_hat|
  double delta = 0.0;
  double width = 0.0;
  double bound = 0.0;       ///< width / delta * l_diff_sup
  double tolerance = 0.0;   ///< 5 dx
  bool holds = true;
};

/// Solves with env and with env replaced on the strip {lo <= <x, e> <= hi},
/// e the certified orientation direction.
StripReport strip_experiment(const GameHamiltonian& gh, const Environment& env,
                             const HamiltonianConstants& c, double lo, double hi,
                             const Point& shift, const Point& theta, const SolveConfig& cfg);

struct RateFit {
  bool fitted = false;
  bool log_corrected = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> t;
  std::vector<double> err;
  std::string note;
};

struct SubadditivityRow {
  double m = 0.0;
  double n = 0.0;
  double defect = 0.0;  ///< U(m) + U(n) - U(m + n)
  double se = 0.0;
  double normalized = 0.0;  ///< defect / sqrt(n ln n)
};

struct SubadditivityReport {
  std::vector<SubadditivityRow> rows;
  std::vector<double> n_values;
  std::vector<double> k_hat;  ///< max over m of the normalized defect, per n
  std::vector<double> k_err;
  std::vector<double> k_hat_mirror;  ///< same for the mirrored defect -D
  std::vector<double> k_err_mirror;
  double k_hat_max = 0.0;
  double k_abs_max = 0.0;  ///< max |D| / sqrt(n ln n)
  bool stable = true;
  bool stable_mirror = true;
};

/// Pairs (m, n) with m, n, m + n in the schedule and n >= 2.
SubadditivityReport check_subadditivity(const UTable& table);

struct EffectiveEstimate {
  Point theta{0.0, 0.0};
  double h_bar = 0.0;
  double ci = 0.0;
  double se = 0.0;    ///< Monte-Carlo standard error of h_bar
  double band = 0.0;  ///< A sqrt(ln t_max / t_max)
  double A = 0.0;
  double k_hat = 0.0;
  bool k_fitted = true;
  double t_max = 0.0;
  std::vector<double> times;
  std::vector<double> sequence;  ///< -U(t) / t
  RateFit rate;
  SubadditivityReport defects;
};

/// sum_{k >= 1} 2^{-k/2} sqrt(k + 1).
double doubling_constant();

/// H_bar = -U(t_max) / t_max with ci = 3 se + A sqrt(ln t_max / t_max),
/// A = K doubling_constant(). K is fitted from the defects when absent.
EffectiveEstimate extract_effective_H(const UTable& table, std::optional<double> k_hat = {},
                                      bool log_corrected = false);

/// Slope of log |seq(2t) - seq(t)| against log t over doubling pairs.
RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& seq,
                 bool log_corrected);

struct TimeLipschitzReport {
  double worst_excess = 0.0;
  bool holds = true;
};
/// |U(t) - U(s)| <= beta (1 + |theta|) |t - s| + 2 (MC std of the difference).
TimeLipschitzReport check_time_lipschitz(const UTable& table);

struct EffectivePropertiesReport {
  double worst_bound_excess = 0.0;  ///< max |H| - beta (1 + |theta|) - ci
  double worst_lip_excess = 0.0;    ///< max |H1 - H2| - beta |theta1 - theta2| - ci1 - ci2
  bool bound_ok = true;
  bool lipschitz_ok = true;
  bool ok() const { return bound_ok && lipschitz_ok; }
};
EffectivePropertiesReport effective_H_properties(const std::vector<EffectiveEstimate>& est,
                                                 double beta, int dim);

/// E[l(0)] for the transport cost c + scale * omega in 1D, by quadrature of the
/// Poisson void probability of the max-of-bumps field.
double transport_mean_cost(const EnvSpec& spec, double c, double scale);

struct RateRow {
  double eps = 0.0;
  std::vector<double> errors;  ///< per main-bank sample
  std::vector<double> calibration_errors;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double threshold = 0.0;  ///< K sqrt(-eps ln eps)
  double exceedance = 0.0;
  bool exceedance_ok = true;  ///< exceedance <= 5 eps^2
};

struct RateReport {
  std::vector<RateRow> rows;
  double slope = 0.0;
  double slope_se = 0.0;
  double k_hat = 0.0;
  std::string status;  ///< "pass", "fail", "inconclusive" or "degenerate"
  bool exceedance_ok = true;
  bool degenerate = false;
};

struct RateOptions {
  double dx = 0.1;  ///< unit-scale spacing; the eps-grid uses eps * dx
  double dt = 0.1;
  int workers = 1;
  int bootstrap = 200;
  std::uint64_t calibration_seed = 0x5eed0001ULL;
};

/// Per sample and eps: sup over [0, T] x B_R of |u^eps_theta(t, x) + t h_bar|.
RateReport rate_experiment(const GameHamiltonian& gh, const EnvSpec& family, const Point& theta,
                           double h_bar, const std::vector<double>& eps_list, double R, double T,
                           int M, std::uint64_t base_seed, const RateOptions& opt);

/// H_bar on a tensor p-grid with multilinear interpolation.
struct EffectiveTable {
  int dim = 1;
  std::vector<double> p0;
  std::vector<double> p1;       ///< unused in 1D
  std::vector<double> values;   ///< row-major over (p0, p1)
  double operator()(const Point& p) const;  ///< DomainError outside the table
  std::array<double, 2> slopes() const;     ///< max |difference quotient| per axis
};

class EffectiveNodeHamiltonian final : public NodeHamiltonian {
 public:
  explicit EffectiveNodeHamiltonian(const EffectiveTable& table) : table_(&table) {}
  double operator()(std::size_t, const Point& p) const override { return (*table_)(p); }
  std::array<double, 2> speed_bounds() const override { return table_->slopes(); }

 private:
  const EffectiveTable* table_;
};

struct HomogenizationRow {
  double eps = 0.0;
  double distance = 0.0;  ///< mean over samples of sup |u^eps - u_bar|
  double se = 0.0;
  std::vector<double> per_sample;
};

struct HomogenizationReport {
  std::vector<HomogenizationRow> rows;  ///< in eps-list order
  bool decreasing = true;               ///< within 2 combined standard errors
};

struct HomogenizationOptions {
  double T = 1.0;
  double R = 1.0;
  double dx = 0.1;       ///< unit-scale spacing of the eps-solves
  double dt = 0.1;
  double dx_bar = 0.01;  ///< effective-equation grid
  double dt_bar = 0.005;
  int snapshots = 4;
  int samples = 4;
  std::uint64_t base_seed = 0;
  int workers = 1;
};

/// Distance on [0, T] x B_R between u^eps (datum g) and the effective solution.
HomogenizationReport general_datum_homogenization(const GameHamiltonian& gh,
                                                  const EnvSpec& family,
                                                  const EffectiveTable& h_bar,
                                                  const InitialDatum& g,
                                                  const std::vector<double>& eps_list,
                                                  const HomogenizationOptions& opt);

/// Effective solution u_bar on the report box for a p-only Hamiltonian table.
SolveResult solve_effective(const EffectiveTable& h_bar, const InitialDatum& g, int dim, double T,
                            double R, double dx, double dt, int snapshots);

}  // namespace hjlab
