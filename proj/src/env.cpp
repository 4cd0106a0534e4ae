#include "hjlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjlab/rng.hpp"

namespace hjlab {

namespace {

constexpr std::uint64_t kTagCount = 0xC0u;
constexpr std::uint64_t kTagPos = 0xC1u;
constexpr std::uint64_t kTagMark = 0xC2u;
constexpr int kMaxBumpsPerCell = 64;

int poisson_inverse(double lambda, double u) {
  double p = std::exp(-lambda);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < kMaxBumpsPerCell) {
    ++k;
    p *= lambda / k;
    cdf += p;
  }
  return k;
}

}  // namespace

std::string format_point(const Point& p, int dim) {
  std::ostringstream os;
  os << '(';
  for (int k = 0; k < dim; ++k) os << (k ? ", " : "") << p[k];
  os << ')';
  return os.str();
}

double bump(double s) {
  const double a = std::abs(s);
  if (a >= 1.0) return 0.0;
  const double q = 1.0 - a * a;
  return q * q;
}

double bump_lipschitz() { return 8.0 / (3.0 * std::sqrt(3.0)); }

void EnvSpec::validate() const {
  if (dim != 1 && dim != 2) throw ConfigError("environment.dim: must be 1 or 2");
  if (!(range > 0.0) || !std::isfinite(range))
    throw ConfigError("environment.range: must be positive and finite");
  if (!(bump_radius > 0.0)) throw ConfigError("environment.bump_radius: must be positive");
  if (bump_radius > 0.5 * range)
    throw ConfigError("environment.bump_radius: must not exceed range/2 (finite-range certificate)");
  if (!(amp_lo >= 0.0)) throw ConfigError("environment.amplitude: lower bound must be >= 0");
  if (!(amp_lo <= amp_hi) || !std::isfinite(amp_hi))
    throw ConfigError("environment.amplitude: need lo <= hi, both finite");
  if (!(density > 0.0) || density > 16.0)
    throw ConfigError("environment.density: must lie in (0, 16]");
  if (channels_a < 1 || channels_b < 1)
    throw ConfigError("environment.channels: counts must be >= 1");
  if (box.empty(dim)) throw ConfigError("environment.box: empty box");
}

EnvCertificate certify(const EnvSpec& spec) {
  return {spec.amp_hi, spec.amp_hi * bump_lipschitz() / spec.bump_radius};
}

namespace detail {

class BumpField {
 public:
  explicit BumpField(const EnvSpec& spec) : spec_(spec) {}

  const EnvSpec& spec() const { return spec_; }

  double eval(const Point& x, int channel, std::vector<BumpKey>* trace) const {
    const int d = spec_.dim;
    const double rho = spec_.range;
    const double r = spec_.bump_radius;
    std::int64_t zlo[2] = {0, 0};
    std::int64_t zhi[2] = {0, 0};
    for (int k = 0; k < d; ++k) {
      zlo[k] = static_cast<std::int64_t>(std::floor((x[k] - r) / rho));
      zhi[k] = static_cast<std::int64_t>(std::floor((x[k] + r) / rho));
    }
    double value = 0.0;
    for (std::int64_t z0 = zlo[0]; z0 <= zhi[0]; ++z0) {
      for (std::int64_t z1 = zlo[1]; z1 <= zhi[1]; ++z1) {
        const auto u0 = static_cast<std::uint64_t>(z0);
        const auto u1 = static_cast<std::uint64_t>(z1);
        const int count =
            poisson_inverse(spec_.density, to_unit(hash_key({spec_.seed, u0, u1, kTagCount})));
        for (int i = 0; i < count; ++i) {
          const auto ui = static_cast<std::uint64_t>(i);
          double dist2 = 0.0;
          for (int k = 0; k < d; ++k) {
            const double frac = to_unit(hash_key({spec_.seed, u0, u1, ui, kTagPos + 16u * k}));
            const double cell = k == 0 ? static_cast<double>(z0) : static_cast<double>(z1);
            const double c = (cell + frac) * rho;
            dist2 += (x[k] - c) * (x[k] - c);
          }
          if (dist2 >= r * r) continue;
          const double mark =
              spec_.amp_lo +
              (spec_.amp_hi - spec_.amp_lo) *
                  to_unit(hash_key({spec_.seed, u0, u1, ui,
                                    static_cast<std::uint64_t>(channel), kTagMark}));
          value = std::max(value, mark * bump(std::sqrt(dist2) / r));
          if (trace) trace->push_back({z0, z1, i, channel});
        }
      }
    }
    return value;
  }

 private:
  EnvSpec spec_;
};

}  // namespace detail

Environment Environment::sample(const EnvSpec& spec) {
  spec.validate();
  Environment env;
  env.field_ = std::make_shared<const detail::BumpField>(spec);
  env.view_box_ = spec.box;
  return env;
}

const EnvSpec& Environment::spec() const { return field_->spec(); }

Point Environment::map_to_base(const Point& x) const {
  const int d = dim();
  Point y = x;
  for (const Transform& t : transforms_) {
    if (t.kind == Transform::Kind::kShift) {
      y = add(y, t.vec);
    } else {
      const double s = dot(y, t.e, d);
      if (s >= t.lo && s <= t.hi) y = sub(y, t.vec);
    }
  }
  return y;
}

double Environment::cost(const Point& x, int a, int b) const { return cost(x, a, b, nullptr); }

double Environment::cost(const Point& x, int a, int b, std::vector<BumpKey>* trace) const {
  const EnvSpec& s = spec();
  if (a < 0 || b < 0 || (!s.shared_channels && (a >= s.channels_a || b >= s.channels_b)))
    throw DomainError("environment: action pair (" + std::to_string(a) + ", " +
                      std::to_string(b) + ") has no channel");
  const Point y = map_to_base(x);
  if (!s.box.contains(y, s.dim, s.bump_radius))
    throw DomainError("environment: probe " + format_point(x, s.dim) + " (base point " +
                      format_point(y, s.dim) + ") lies outside the materialized box");
  const int channel = s.shared_channels ? 0 : a * s.channels_b + b;
  return field_->eval(y, channel, trace);
}

Environment Environment::shifted(const Point& y) const {
  const int d = dim();
  Environment view = *this;
  view.transforms_.insert(view.transforms_.begin(), Transform{Transform::Kind::kShift, y, {}, 0, 0});
  for (int k = 0; k < d; ++k) {
    view.view_box_.lo[k] = view_box_.lo[k] - y[k];
    view.view_box_.hi[k] = view_box_.hi[k] - y[k];
  }
  if (view.view_box_.empty(d))
    throw DomainError("shift_view: shift " + format_point(y, d) + " leaves no evaluable region");
  return view;
}

Environment Environment::with_strip(double lo, double hi, const Point& e,
                                    const Point& shift) const {
  const int d = dim();
  if (!(lo < hi)) throw ConfigError("replace_on_strip: degenerate strip, need lo < hi");
  const double en = norm(e, d);
  if (std::abs(en - 1.0) > 1e-12)
    throw ConfigError("replace_on_strip: direction e must be a unit vector");
  Environment view = *this;
  view.transforms_.insert(view.transforms_.begin(),
                          Transform{Transform::Kind::kStrip, shift, e, lo, hi});
  return view;
}

Box Environment::evaluable_box() const { return view_box_; }

Environment sample_environment(const EnvSpec& spec) { return Environment::sample(spec); }

Environment shift_view(const Environment& env, const Point& y) { return env.shifted(y); }

Environment replace_on_strip(const Environment& env, double lo, double hi, const Point& e,
                             const Point& shift) {
  return env.with_strip(lo, hi, e, shift);
}

}  // namespace hjlab
