#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "hjlab/env.hpp"
#include "hjlab/rng.hpp"
#include "hjlab/stats.hpp"

using namespace hjlab;

namespace {

EnvSpec unit_spec(std::uint64_t seed = 1) {
  EnvSpec s;
  s.dim = 1;
  s.range = 1.0;
  s.bump_radius = 0.5;
  s.amp_lo = 0.0;
  s.amp_hi = 1.0;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("validation names the violated field") {
  EnvSpec s = unit_spec();
  s.range = -1.0;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("environment.range"), ConfigError);
  s = unit_spec();
  s.bump_radius = 0.6;
  CHECK_THROWS_WITH_AS(sample_environment(s), doctest::Contains("environment.bump_radius"),
                       ConfigError);
  s = unit_spec();
  s.amp_lo = 2.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = unit_spec();
  s.box = Box{{1.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = unit_spec();
  s.bump_radius = 0.5;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("bump profile and its Lipschitz constant") {
  CHECK(bump(0.0) == 1.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(1.5) == 0.0);
  CHECK(bump(-0.5) == doctest::Approx(0.5625));
  // numerical sup of |phi'| on a fine grid
  double slope = 0.0;
  const double h = 1e-6;
  for (double s = 0.0; s < 1.0; s += 1e-4) slope = std::max(slope, std::abs(bump(s + h) - bump(s)) / h);
  CHECK(bump_lipschitz() == doctest::Approx(slope).epsilon(1e-4));
  CHECK(bump_lipschitz() == doctest::Approx(8.0 / (3.0 * std::sqrt(3.0))));
}

TEST_CASE("same EnvSpec gives bit-identical values") {
  const EnvSpec s = unit_spec(42);
  const Environment a = sample_environment(s);
  const Environment b = sample_environment(s);
  SplitMix64 rng(7);
  int differing = 0;
  const Environment c = sample_environment(unit_spec(43));
  for (int i = 0; i < 1000; ++i) {
    const Point x{rng.uniform(-50.0, 50.0), 0.0};
    CHECK(a.cost(x, 0, 0) == b.cost(x, 0, 0));
    if (a.cost(x, 0, 0) != c.cost(x, 0, 0)) ++differing;
  }
  CHECK(differing > 500);
}

TEST_CASE("values stay in [0, amp_hi] and respect the certified Lipschitz constant") {
  for (int dim : {1, 2}) {
    EnvSpec s = unit_spec(3);
    s.dim = dim;
    s.amp_lo = 0.2;
    s.amp_hi = 1.5;
    const Environment env = sample_environment(s);
    const EnvCertificate cert = certify(s);
    CHECK(cert.sup == doctest::Approx(1.5));
    CHECK(cert.sup <= s.amp_hi * kernel_overlap(dim));
    CHECK(cert.lip == doctest::Approx(1.5 * bump_lipschitz() / 0.5));
    SplitMix64 rng(11);
    const double h = 1e-3;
    for (int i = 0; i < 1000; ++i) {
      Point x{rng.uniform(-20.0, 20.0), dim == 2 ? rng.uniform(-20.0, 20.0) : 0.0};
      Point dir{1.0, 0.0};
      if (dim == 2) {
        const double phi = rng.uniform(0.0, 6.283185307179586);
        dir = {std::cos(phi), std::sin(phi)};
      }
      const Point y = add(x, scale(dir, h));
      const double lx = env.cost(x, 0, 0);
      CHECK(lx >= 0.0);
      CHECK(lx <= s.amp_hi);
      CHECK(std::abs(lx - env.cost(y, 0, 0)) <= cert.lip * h * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("constant amplitude scales the field linearly") {
  EnvSpec one = unit_spec(5);
  one.amp_lo = one.amp_hi = 1.0;
  EnvSpec two = one;
  two.amp_lo = two.amp_hi = 2.0;
  const Environment e1 = sample_environment(one);
  const Environment e2 = sample_environment(two);
  for (double x = -10.0; x <= 10.0; x += 0.0371) {
    CHECK(e2.cost({x, 0.0}, 0, 0) == 2.0 * e1.cost({x, 0.0}, 0, 0));
    CHECK(e1.cost({x, 0.0}, 0, 0) <= 1.0);
  }
}

TEST_CASE("channels carry separate marks") {
  EnvSpec s = unit_spec(8);
  s.channels_a = 2;
  s.channels_b = 2;
  const Environment env = sample_environment(s);
  int differing = 0;
  for (double x = 0.0; x < 20.0; x += 0.1)
    if (env.cost({x, 0.0}, 0, 1) != env.cost({x, 0.0}, 1, 0)) ++differing;
  CHECK(differing > 100);
  s.shared_channels = true;
  const Environment shared = sample_environment(s);
  for (double x = 0.0; x < 5.0; x += 0.1) CHECK(shared.cost({x, 0.0}, 1, 1) == shared.cost({x, 0.0}, 0, 0));
}

TEST_CASE("probes outside the box inflated by r raise a domain error") {
  EnvSpec s = unit_spec(1);
  s.box = Box{{0.0, 0.0}, {2.0, 0.0}};
  const Environment env = sample_environment(s);
  CHECK_NOTHROW(env.cost({2.0 + 0.25, 0.0}, 0, 0));
  CHECK_THROWS_AS(env.cost({2.0 + 2.0 * s.bump_radius, 0.0}, 0, 0), DomainError);
  CHECK_THROWS_AS(env.cost({-1.01, 0.0}, 0, 0), DomainError);
  const Environment view = shift_view(env, {1.5, 0.0});
  CHECK_THROWS_AS(view.cost({1.5, 0.0}, 0, 0), DomainError);
  CHECK_NOTHROW(view.cost({0.0, 0.0}, 0, 0));
}

TEST_CASE("shift views") {
  const Environment env = sample_environment(unit_spec(9));
  const Environment zero = shift_view(env, {0.0, 0.0});
  const Environment a = shift_view(env, {0.37, 0.0});
  const Environment ab = shift_view(a, {1.25, 0.0});
  const Environment direct = shift_view(env, {0.37 + 1.25, 0.0});
  SplitMix64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Point x{rng.uniform(-10.0, 10.0), 0.0};
    CHECK(zero.cost(x, 0, 0) == env.cost(x, 0, 0));
    CHECK(a.cost(x, 0, 0) == env.cost(add(x, {0.37, 0.0}), 0, 0));
    CHECK(ab.cost(x, 0, 0) == doctest::Approx(direct.cost(x, 0, 0)).epsilon(1e-12));
  }
}

TEST_CASE("stationarity: shifted law matches by two-sample KS at the 1% level") {
  constexpr int kSeeds = 10000;
  std::vector<double> plain;
  std::vector<double> shifted;
  for (int i = 0; i < kSeeds; ++i) {
    plain.push_back(sample_environment(unit_spec(i)).cost({0.0, 0.0}, 0, 0));
    const Environment env = sample_environment(unit_spec(kSeeds + i));
    shifted.push_back(shift_view(env, {0.37, 0.0}).cost({0.0, 0.0}, 0, 0));
  }
  CHECK(ks_statistic(plain, shifted) < ks_critical(kSeeds, kSeeds, 0.01));
}

TEST_CASE("covariance across the dependence range vanishes") {
  constexpr int kSeeds = 10000;
  std::vector<double> x0;
  std::vector<double> x1;
  for (int i = 0; i < kSeeds; ++i) {
    const Environment env = sample_environment(unit_spec(1000003ULL * i + 17));
    x0.push_back(env.cost({0.0, 0.0}, 0, 0));
    x1.push_back(env.cost({1.5, 0.0}, 0, 0));
  }
  const double m0 = mean_var(x0).mean;
  const double m1 = mean_var(x1).mean;
  std::vector<double> prod;
  for (int i = 0; i < kSeeds; ++i) prod.push_back((x0[i] - m0) * (x1[i] - m1));
  const MeanVar cov = mean_var(prod);
  CHECK(std::abs(cov.mean) < 3.0 * cov.se);

  // the same statistic detects dependence inside the range
  std::vector<double> near;
  for (int i = 0; i < kSeeds; ++i)
    near.push_back(sample_environment(unit_spec(1000003ULL * i + 17)).cost({0.2, 0.0}, 0, 0));
  const double mn = mean_var(near).mean;
  prod.clear();
  for (int i = 0; i < kSeeds; ++i) prod.push_back((x0[i] - m0) * (near[i] - mn));
  const MeanVar cov_near = mean_var(prod);
  CHECK(cov_near.mean > 3.0 * cov_near.se);
}

TEST_CASE("finite range certificate: separated probe sets read disjoint keys") {
  for (int dim : {1, 2}) {
    EnvSpec s = unit_spec(21);
    s.dim = dim;
    s.channels_a = 2;
    const Environment env = sample_environment(s);
    SplitMix64 rng(5);
    int shared_when_close = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const Point c{rng.uniform(-30.0, 30.0), dim == 2 ? rng.uniform(-30.0, 30.0) : 0.0};
      const double gap = s.range * (1.0 + 1e-6) + rng.uniform(0.0, 0.5);
      std::vector<BumpKey> left;
      std::vector<BumpKey> right;
      std::vector<BumpKey> close;
      for (int k = 0; k < 20; ++k) {
        const double u = rng.uniform(0.0, 1.0);
        const double w = dim == 2 ? rng.uniform(0.0, 1.0) : 0.0;
        const int a = k % 2;
        env.cost({c[0] - u, c[1] + w}, a, 0, &left);
        env.cost({c[0] + gap + u, c[1] + w}, a, 0, &right);
        env.cost({c[0] + 0.3 * u, c[1] + w}, a, 0, &close);
      }
      const std::set<BumpKey> lset(left.begin(), left.end());
      for (const BumpKey& k : right) CHECK(lset.count(k) == 0);
      for (const BumpKey& k : close)
        if (lset.count(k)) {
          ++shared_when_close;
          break;
        }
    }
    CHECK(shared_when_close > 20);
  }
}

TEST_CASE("strip replacement") {
  const Environment env = sample_environment(unit_spec(4));
  const Point e{1.0, 0.0};
  const Environment same = replace_on_strip(env, 0.0, 1.0, e, {0.0, 0.0});
  const Environment moved = replace_on_strip(env, 0.0, 1.0, e, {3.0, 0.0});
  for (double x = -3.0; x <= 4.0; x += 0.013) {
    const Point p{x, 0.0};
    CHECK(same.cost(p, 0, 0) == env.cost(p, 0, 0));
    if (x >= 0.0 && x <= 1.0) {
      CHECK(moved.cost(p, 0, 0) == env.cost({x - 3.0, 0.0}, 0, 0));
    } else {
      CHECK(moved.cost(p, 0, 0) == env.cost(p, 0, 0));
    }
  }
  CHECK_THROWS_AS(replace_on_strip(env, 1.0, 1.0, e, {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(replace_on_strip(env, 0.0, 1.0, {2.0, 0.0}, {0.0, 0.0}), ConfigError);
}

TEST_CASE("strip replacement in two dimensions follows the normal direction") {
  EnvSpec s = unit_spec(6);
  s.dim = 2;
  const Environment env = sample_environment(s);
  const Point e{0.6, 0.8};
  const Point shift = scale(e, 1.5);
  const Environment moved = replace_on_strip(env, -0.5, 0.5, e, shift);
  SplitMix64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const Point x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double s_ = dot(x, e, 2);
    const double expected = s_ >= -0.5 && s_ <= 0.5 ? env.cost(sub(x, shift), 0, 0) : env.cost(x, 0, 0);
    CHECK(moved.cost(x, 0, 0) == expected);
  }
}
