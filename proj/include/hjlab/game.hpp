#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/env.hpp"
#include "hjlab/types.hpp"

namespace hjlab {

/// Lipschitz Hamiltonian G(x, q, omega) to be localized; q lives in the action space R^m.
struct LipschitzHamiltonian {
  std::function<double(const Point& x, const Point& q, const Environment* env)> fn;
  double sup_on_ball = 0.0;  ///< bound on |G(x, q)| for |q| <= R
  double lip_x = 0.0;        ///< Lipschitz constant in x
  double lip_q = 0.0;        ///< Lipschitz constant in q
};

/// Deterministic cost term c(x, a, b) with certified bounds.
struct AnalyticCost {
  std::function<double(const Point& x, int a, int b)> fn;
  double sup = 0.0;
  double lip = 0.0;
};

/// Max-min Hamiltonian H(x, p) = max_b min_a { -l(x, a, b) - <f(a, b), p> }
/// over finite action sets.
///
/// The running cost is one accessor summing every configured term:
///     l_theta = constant[a, b] + env_scale * omega(x, a, b) + analytic(x, a, b)
///               + (-G(x, b) + beta <a, b>)  [localized only]
///               + <f(a, b), theta>.
class GameHamiltonian {
 public:
  struct Localized {
    LipschitzHamiltonian g;
    double beta = 1.0;
    double radius = 1.0;
    int action_dim = 1;
    std::vector<std::vector<double>> pi;  ///< m x d matrix
    Point v{0.0, 0.0};
  };

  GameHamiltonian(int dim, std::vector<Point> actions_a, std::vector<Point> actions_b,
                  std::vector<Point> f_table);

  int dim() const { return dim_; }
  int num_a() const { return static_cast<int>(actions_a_.size()); }
  int num_b() const { return static_cast<int>(actions_b_.size()); }
  int num_pairs() const { return num_a() * num_b(); }
  int pair(int a, int b) const { return a * num_b() + b; }
  const std::vector<Point>& actions_a() const { return actions_a_; }
  const std::vector<Point>& actions_b() const { return actions_b_; }
  const Point& f(int a, int b) const { return f_[pair(a, b)]; }
  const std::vector<Point>& f_table() const { return f_; }
  const Point& theta() const { return theta_; }
  const std::optional<Point>& e_hint() const { return e_hint_; }

  /// Costs constant per action pair; size num_pairs().
  void set_constant(std::vector<double> c);
  /// Environment term; per_pair selects channel (a, b), otherwise channel (0, 0).
  void set_env_term(double scale, bool per_pair);
  void set_analytic(AnalyticCost term);
  void set_localized(Localized term);
  void set_e_hint(const Point& e);

  bool uses_env() const { return env_scale_ != 0.0; }
  bool per_pair_channels() const { return per_pair_; }
  double env_scale() const { return env_scale_; }
  const std::optional<Localized>& localized() const { return localized_; }

  /// l_theta(x, a, b, omega). env may be null only when uses_env() is false and
  /// the localized G ignores it.
  double cost(const Point& x, int a, int b, const Environment* env) const;

  /// Throws ConfigError when the environment family cannot serve this game.
  void check_env(const EnvSpec& spec) const;

  /// Copy with theta replaced by theta + shift.
  GameHamiltonian shifted(const Point& shift) const;

  /// Bounds of the cost terms other than the environment (used by certification).
  double nonenv_sup() const;
  double nonenv_lip() const;

 private:
  int dim_;
  std::vector<Point> actions_a_;
  std::vector<Point> actions_b_;
  std::vector<Point> f_;
  std::vector<double> constant_;
  double env_scale_ = 0.0;
  bool per_pair_ = false;
  std::optional<AnalyticCost> analytic_;
  std::optional<Localized> localized_;
  Point theta_{0.0, 0.0};
  std::vector<double> theta_offset_;
  std::optional<Point> e_hint_;
};

struct HamiltonianConstants {
  double beta = 0.0;
  double beta1 = 0.0;  ///< max(l_inf, f_inf): time-Lipschitz constant
  double beta3 = 0.0;  ///< lip_l: space-Lipschitz growth rate
  double delta = 0.0;
  Point e{0.0, 0.0};
  double f_inf = 0.0;
  double lip_l = 0.0;
  double l_inf = 0.0;
  bool oriented() const { return delta > 0.0; }
};

double eval_H(const GameHamiltonian& gh, const Point& x, const Point& p, const Environment* env);

/// Certified constants. env_family may be omitted for games without an environment term.
HamiltonianConstants certify_constants(const GameHamiltonian& gh,
                                       const std::optional<EnvSpec>& env_family);

struct BoundsProbeReport {
  int probes = 0;
  double worst_h1 = 0.0;  ///< max |H(x, p)| - beta (1 + |p|)
  double worst_h2 = 0.0;  ///< max |H(x, p) - H(x, q)| - beta |p - q|
  double worst_h3 = 0.0;  ///< max |H(x, p) - H(y, p)| - beta |x - y|
  double tolerance = 0.0;
  bool ok() const { return worst_h1 <= tolerance && worst_h2 <= tolerance && worst_h3 <= tolerance; }
};

/// Random probes of the three growth and Lipschitz bounds with the certified beta.
/// x, y are drawn from x_box and p, q from the cube of half-width p_radius.
BoundsProbeReport probe_bounds(const GameHamiltonian& gh, const Environment* env,
                               const HamiltonianConstants& c, const Box& x_box, double p_radius,
                               int probes, std::uint64_t seed);

/// min over the f-table of <f, e>.
double orientation_margin(const GameHamiltonian& gh, const Point& e);

/// Unit vector maximizing the orientation margin (grid search plus local ascent in 2D).
Point select_orientation(const GameHamiltonian& gh);

/// Throws ConfigError("... not oriented ...") when delta <= 0.
void require_oriented(const HamiltonianConstants& c);

GameHamiltonian shift_momentum(const GameHamiltonian& gh, const Point& theta);

/// Grid with n points per axis on [-radius, radius]^m, restricted to the closed ball.
std::vector<Point> ball_grid(int m, int n, double radius);

/// Max-min representation of G(x, pi p) + <p, v> valid for |p| <= R.
/// Actions a in a grid on the unit ball, b in a grid on the R-ball,
/// l = -G(x, b) + beta <a, b> and f(a) = pi^T(-beta a) - v.
/// Orientation holds along e = -v / |v| with margin |v|.
GameHamiltonian localize(const LipschitzHamiltonian& g, double beta, double radius, const Point& v,
                         const std::vector<std::vector<double>>& pi, int dim, int n_a, int n_b);

struct LocalizationReport {
  double max_error = 0.0;
  Point worst_x{0.0, 0.0};
  Point worst_p{0.0, 0.0};
  int probes = 0;
};

/// sup over random probes (x in probe_box, |p| <= R, boundary included) of
/// |H(x, p) - G(x, pi p) - <p, v>|.
LocalizationReport verify_localization(const GameHamiltonian& gh, const Environment* env,
                                       const Box& probe_box, int probes, std::uint64_t seed);

// Hamiltonian families.

/// Singleton actions: l = c + env_scale * omega(x), f = velocity.
GameHamiltonian make_transport(int dim, const Point& velocity, double c, double env_scale);

/// A = speeds along a unit direction, B singleton; per-action environment channel.
GameHamiltonian make_two_speed_control(int dim, const Point& direction,
                                       const std::vector<double>& speeds,
                                       const std::vector<double>& constants, double env_scale);

/// Full |A| x |B| table of velocities and constants, per-pair environment channels.
GameHamiltonian make_saddle_game(int dim, int n_a, int n_b, std::vector<Point> f_table,
                                 std::vector<double> constants, double env_scale);

/// Named profile G0(q) with slope and centre: "abs" -> slope |q - c|,
/// "sin" -> slope sin(q_1 - c_1), "const" -> c_1.
LipschitzHamiltonian profile_hamiltonian(const std::string& name, int m, double slope,
                                         const Point& centre, double radius, double env_scale,
                                         const EnvCertificate& env_cert);

}  // namespace hjlab
