#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hjlab/types.hpp"

namespace hjlab {

/// Parameters of a random running-cost field with finite range of dependence.
struct EnvSpec {
  int dim = 1;
  double range = 1.0;        ///< dependence range rho
  double bump_radius = 0.5;  ///< r, must satisfy r <= rho/2
  double amp_lo = 0.0;
  double amp_hi = 1.0;
  double density = 2.0;      ///< expected bump centres per rho^d cell
  int channels_a = 1;
  int channels_b = 1;
  bool shared_channels = false;  ///< one field shared by every action pair
  Box box = Box::unbounded();
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
  int channel_count() const { return shared_channels ? 1 : channels_a * channels_b; }
};

/// Overlap count kappa_d used in the published sup bound l <= l_hi * kappa_d.
constexpr int kernel_overlap(int dim) { return dim == 1 ? 2 : 4; }

/// The bump profile phi(s) = (1 - s^2)^2 on |s| <= 1.
double bump(double s);
/// Lipschitz constant of the bump profile, 8 / (3 sqrt 3).
double bump_lipschitz();

/// Certified constants of a field family (independent of the seed).
struct EnvCertificate {
  double sup = 0.0;  ///< bound on |l|
  double lip = 0.0;  ///< Lipschitz constant in x
};
EnvCertificate certify(const EnvSpec& spec);

/// Identifies one bump centre and the channel of the mark read from it.
struct BumpKey {
  std::int64_t cell0 = 0;
  std::int64_t cell1 = 0;
  int index = 0;
  int channel = 0;
  friend bool operator==(const BumpKey&, const BumpKey&) = default;
  friend auto operator<=>(const BumpKey&, const BumpKey&) = default;
};

namespace detail {
class BumpField;
}

/// One realization omega of the running cost l(x, a, b, omega).
///
/// Bump centres form a Poisson process of intensity density / rho^d,
/// generated cell by cell from hash(seed, cell). Each centre carries i.i.d.
/// marks uniform in [amp_lo, amp_hi], one per channel, and the field is
///     l(x, a, b) = max_i xi_i(a, b) * phi(|x - c_i| / r),
/// so values at points further apart than 2r <= rho never share a bump.
///
/// Views (shifts and strip replacements) are cheap value copies that remap
/// the probe point before it reaches the shared realization.
class Environment {
 public:
  /// Realization for spec; deterministic in spec (seed included).
  static Environment sample(const EnvSpec& spec);

  const EnvSpec& spec() const;
  int dim() const { return spec().dim; }

  /// l(x, a, b). Throws DomainError outside the box inflated by r.
  double cost(const Point& x, int a, int b) const;
  /// Same, additionally appending the keys of every bump whose support contains x.
  double cost(const Point& x, int a, int b, std::vector<BumpKey>* trace) const;

  /// tau_y omega: cost(view, x) == cost(*this, x + y).
  Environment shifted(const Point& y) const;
  /// Field equal to *this outside {lo <= <x,e> <= hi} and to x -> cost(x - shift) inside.
  Environment with_strip(double lo, double hi, const Point& e, const Point& shift) const;

  /// Region of probe points this view can evaluate.
  Box evaluable_box() const;

 private:
  struct Transform {
    enum class Kind { kShift, kStrip } kind = Kind::kShift;
    Point vec{0.0, 0.0};  // shift y, or strip displacement
    Point e{0.0, 0.0};
    double lo = 0.0;
    double hi = 0.0;
  };

  Point map_to_base(const Point& x) const;

  std::shared_ptr<const detail::BumpField> field_;
  std::vector<Transform> transforms_;  // applied in order to the probe point
  Box view_box_;
};

Environment sample_environment(const EnvSpec& spec);
Environment shift_view(const Environment& env, const Point& y);
Environment replace_on_strip(const Environment& env, double lo, double hi, const Point& e,
                             const Point& shift);

}  // namespace hjlab
