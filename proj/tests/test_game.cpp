#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hjlab/game.hpp"
#include "hjlab/rng.hpp"

using namespace hjlab;

namespace {

EnvSpec small_env(int dim, std::uint64_t seed = 1) {
  EnvSpec s;
  s.dim = dim;
  s.range = 1.0;
  s.bump_radius = 0.5;
  s.channels_a = 3;
  s.channels_b = 3;
  s.seed = seed;
  return s;
}

/// Random oriented |A| x |B| game on a per-pair environment.
GameHamiltonian random_game(int dim, int n_a, int n_b, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Point> f;
  std::vector<double> c;
  for (int i = 0; i < n_a * n_b; ++i) {
    f.push_back({rng.uniform(0.5, 1.5), dim == 2 ? rng.uniform(-0.5, 0.5) : 0.0});
    c.push_back(rng.uniform(0.0, 0.5));
  }
  return make_saddle_game(dim, n_a, n_b, f, c, 1.0);
}

}  // namespace

TEST_CASE("eval_H on singleton actions") {
  GameHamiltonian gh(1, {Point{0, 0}}, {Point{0, 0}}, {Point{1.0, 0.0}});
  gh.set_constant({0.3});
  CHECK(eval_H(gh, {0.0, 0.0}, {2.0, 0.0}, nullptr) == doctest::Approx(-2.3).epsilon(1e-15));
}

TEST_CASE("eval_H enumerates max over b of min over a") {
  // l(a, b) = a b with A = B = {-1, +1}, f = 1, p = 0.7
  GameHamiltonian gh(1, {Point{-1, 0}, Point{1, 0}}, {Point{-1, 0}, Point{1, 0}},
                     std::vector<Point>(4, Point{1.0, 0.0}));
  gh.set_analytic({[](const Point&, int a, int b) { return (2 * a - 1) * (2 * b - 1) * 1.0; }, 1.0, 0.0});
  const double p = 0.7;
  double best = -1e300;
  for (int b : {-1, 1}) {
    double inner = 1e300;
    for (int a : {-1, 1}) inner = std::min(inner, -a * b - p);
    best = std::max(best, inner);
  }
  CHECK(best == doctest::Approx(-1.7));
  CHECK(eval_H(gh, {0.0, 0.0}, {p, 0.0}, nullptr) == doctest::Approx(-1.7).epsilon(1e-15));
}

TEST_CASE("non-coercivity along the orientation direction") {
  const EnvSpec spec = small_env(1);
  const Environment env = sample_environment(spec);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GameHamiltonian gh = random_game(1, 2, 3, seed);
    const HamiltonianConstants c = certify_constants(gh, spec);
    REQUIRE(c.oriented());
    SplitMix64 rng(seed);
    for (int i = 0; i < 50; ++i) {
      const Point x{rng.uniform(-5.0, 5.0), 0.0};
      for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
        CHECK(eval_H(gh, x, scale(c.e, lambda), &env) <= c.l_inf - lambda * c.delta + 1e-12);
        CHECK(eval_H(gh, x, scale(c.e, -lambda), &env) >= -c.l_inf + lambda * c.delta - 1e-12);
      }
    }
  }
}

TEST_CASE("certified constants") {
  SUBCASE("constant velocity") {
    GameHamiltonian gh(2, {Point{0, 0}}, {Point{0, 0}}, {Point{1.0, 0.0}});
    gh.set_e_hint({1.0, 0.0});
    const auto c = certify_constants(gh, std::nullopt);
    CHECK(c.delta == 1.0);
  }
  SUBCASE("two velocities") {
    GameHamiltonian gh(2, {Point{0, 0}, Point{1, 0}}, {Point{0, 0}},
                       {Point{1.0, 0.5}, Point{1.0, -0.5}});
    gh.set_e_hint({1.0, 0.0});
    const auto c = certify_constants(gh, std::nullopt);
    CHECK(c.delta == 1.0);
    CHECK(c.f_inf == doctest::Approx(std::sqrt(1.25)));
    // auto-selection finds the same direction
    const auto c2 = certify_constants(
        GameHamiltonian(2, {Point{0, 0}, Point{1, 0}}, {Point{0, 0}}, {Point{1.0, 0.5}, Point{1.0, -0.5}}),
        std::nullopt);
    CHECK(c2.delta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c2.e[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("singleton constant cost") {
    for (double cval : {0.4, 2.5}) {
      GameHamiltonian gh(1, {Point{0, 0}}, {Point{0, 0}}, {Point{1.3, 0.0}});
      gh.set_constant({cval});
      const auto c = certify_constants(gh, std::nullopt);
      CHECK(c.beta == doctest::Approx(std::max(cval, 1.3)));
    }
  }
  SUBCASE("delta equals the minimum margin exactly") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const GameHamiltonian gh = random_game(2, 3, 2, seed);
      const auto c = certify_constants(gh, small_env(2));
      double m = 1e300;
      for (const Point& v : gh.f_table()) m = std::min(m, dot(v, c.e, 2));
      CHECK(c.delta == m);
      CHECK(c.delta > 0.0);
      CHECK(norm(c.e, 2) == doctest::Approx(1.0));
    }
  }
  SUBCASE("not oriented") {
    GameHamiltonian gh(1, {Point{0, 0}, Point{1, 0}}, {Point{0, 0}}, {Point{1.0, 0.0}, Point{-1.0, 0.0}});
    const auto c = certify_constants(gh, std::nullopt);
    CHECK_FALSE(c.oriented());
    CHECK_THROWS_WITH_AS(require_oriented(c), doctest::Contains("not oriented"), ConfigError);
  }
}

TEST_CASE("H1-H3 hold with the certified beta") {
  for (int dim : {1, 2}) {
    const EnvSpec spec = small_env(dim, 3);
    const Environment env = sample_environment(spec);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const GameHamiltonian gh = random_game(dim, 2, 2, seed).shifted({0.3, -0.2});
      const auto c = certify_constants(gh, spec);
      CHECK(c.beta >= std::max({c.f_inf, c.lip_l, c.l_inf}));
      const BoundsProbeReport r = probe_bounds(gh, &env, c, Box::cube(dim, 5.0), 4.0, 10000, seed);
      CHECK(r.ok());
      CHECK(r.probes == 10000);
    }
  }
}

TEST_CASE("momentum shift") {
  const EnvSpec spec = small_env(2, 4);
  const Environment env = sample_environment(spec);
  const GameHamiltonian gh = random_game(2, 2, 3, 9);
  SplitMix64 rng(1);
  const GameHamiltonian zero = shift_momentum(gh, {0.0, 0.0});
  for (int i = 0; i < 100; ++i) {
    const Point x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    CHECK(eval_H(zero, x, p, &env) == eval_H(gh, x, p, &env));
  }
  for (int i = 0; i < 1000; ++i) {
    const Point x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Point th{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double lhs = eval_H(shift_momentum(gh, th), x, p, &env);
    const double rhs = eval_H(gh, x, add(th, p), &env);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(rhs)));
  }
  // singleton actions: shifted cost is l + <f, theta> pointwise
  GameHamiltonian single(2, {Point{0, 0}}, {Point{0, 0}}, {Point{0.7, 0.2}});
  single.set_constant({0.1});
  single.set_env_term(1.0, false);
  const Point th{0.5, -1.5};
  const GameHamiltonian s2 = shift_momentum(single, th);
  for (int i = 0; i < 50; ++i) {
    const Point x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    CHECK(s2.cost(x, 0, 0, &env) ==
          doctest::Approx(single.cost(x, 0, 0, &env) + dot(Point{0.7, 0.2}, th, 2)).epsilon(1e-15));
  }
  // sup bound grows at most by f_inf |theta|
  const auto c0 = certify_constants(gh, spec);
  const auto c1 = certify_constants(shift_momentum(gh, th), spec);
  CHECK(c1.l_inf <= c0.l_inf + c0.f_inf * norm(th, 2) + 1e-12);
}

TEST_CASE("localized constant G in one dimension is c + p") {
  const double c = 0.6;
  LipschitzHamiltonian g;
  g.fn = [c](const Point&, const Point&, const Environment*) { return c; };
  g.sup_on_ball = c;
  const GameHamiltonian gh = localize(g, 1.0, 2.0, {1.0, 0.0}, {{0.0}}, 1, 9, 9);
  for (double p = -2.0; p <= 2.0; p += 0.125) {
    // dense-grid oracle: max_b min_a {c - a b + a (0 p) } + p
    double best = -1e300;
    for (int ib = 0; ib <= 400; ++ib) {
      const double b = -2.0 + ib * 0.01;
      double inner = 1e300;
      for (int ia = 0; ia <= 200; ++ia) {
        const double a = -1.0 + ia * 0.01;
        inner = std::min(inner, c - a * b);
      }
      best = std::max(best, inner);
    }
    CHECK(best + p == doctest::Approx(c + p));
    CHECK(eval_H(gh, {0.0, 0.0}, {p, 0.0}, nullptr) == doctest::Approx(c + p).epsilon(1e-14));
  }
}

TEST_CASE("localized |q| at p = 1.5") {
  // dense-grid scalar oracle: max_{|b|<=2} min_{|a|<=1} {|b| - a b + a p}
  double best = -1e300;
  for (int ib = 0; ib <= 4000; ++ib) {
    const double b = -2.0 + ib * 0.001;
    const double inner = std::abs(b) - std::abs(b - 1.5);  // min over a in [-1, 1]
    best = std::max(best, inner);
  }
  CHECK(best == doctest::Approx(1.5));

  LipschitzHamiltonian g;
  g.fn = [](const Point&, const Point& q, const Environment*) { return std::abs(q[0]); };
  g.sup_on_ball = 2.0;
  g.lip_q = 1.0;
  const GameHamiltonian gh = localize(g, 1.0, 2.0, {0.0, 1.0}, {{1.0, 0.0}}, 2, 9, 9);
  CHECK(eval_H(gh, {0.0, 0.0}, {1.5, 0.0}, nullptr) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("localized orientation certificate") {
  LipschitzHamiltonian g;
  g.fn = [](const Point&, const Point& q, const Environment*) { return 0.5 * std::sin(q[0]); };
  g.sup_on_ball = 0.5;
  g.lip_q = 0.5;
  const GameHamiltonian gh = localize(g, 1.0, 1.0, {0.8, 0.0}, {{0.0, 1.0}}, 2, 8, 8);
  const auto c = certify_constants(gh, std::nullopt);
  CHECK(c.delta == 0.8);
  CHECK(c.e[0] == -1.0);
  CHECK_THROWS_WITH_AS(localize(g, 1.0, 1.0, {0.8, 0.1}, {{0.0, 1.0}}, 2, 8, 8),
                       doctest::Contains("pi(v)"), ConfigError);
  CHECK_THROWS_AS(localize(g, 1.0, 1.0, {0.0, 0.0}, {{0.0, 1.0}}, 2, 8, 8), ConfigError);
  CHECK_THROWS_AS(localize(g, 0.4, 1.0, {0.8, 0.0}, {{0.0, 1.0}}, 2, 8, 8), ConfigError);
}

TEST_CASE("affine G with slope beta is represented exactly") {
  LipschitzHamiltonian g;
  g.fn = [](const Point&, const Point& q, const Environment*) { return 0.3 + q[0]; };
  g.sup_on_ball = 1.3;
  g.lip_q = 1.0;
  const GameHamiltonian gh = localize(g, 1.0, 1.0, {0.8, 0.0}, {{0.0, 1.0}}, 2, 64, 64);
  const LocalizationReport r = verify_localization(gh, nullptr, Box::cube(2, 1.0), 500, 3);
  CHECK(r.max_error <= 1e-3);
}

TEST_CASE("closed ball: probes with |p| = R are represented") {
  LipschitzHamiltonian g;
  g.fn = [](const Point&, const Point& q, const Environment*) { return 0.9 * std::abs(q[0]); };
  g.sup_on_ball = 0.9;
  g.lip_q = 0.9;
  const GameHamiltonian gh = localize(g, 1.0, 1.0, {0.0, 0.5}, {{1.0, 0.0}}, 2, 17, 17);
  for (double phi = 0.0; phi < 6.28; phi += 0.1) {
    const Point p{std::cos(phi), std::sin(phi)};
    const double target = 0.9 * std::abs(p[0]) + 0.5 * p[1];
    // b-grid spacing 2/16; each unit of distance to the grid costs beta - 0.9
    CHECK(std::abs(eval_H(gh, {0.0, 0.0}, p, nullptr) - target) <= 0.1 * 2.0 / 16.0 + 1e-12);
  }
}

TEST_CASE("localization error halves under grid doubling") {
  EnvSpec spec;
  spec.dim = 2;
  spec.range = 2.0;
  spec.bump_radius = 1.0;
  spec.amp_hi = 0.5;
  spec.seed = 12;
  const Environment env = sample_environment(spec);
  const LipschitzHamiltonian g =
      profile_hamiltonian("abs", 1, 0.98, {0.25, 0.0}, 1.0, 1.0, certify(spec));
  double prev = -1.0;
  for (int n : {8, 16, 32, 64}) {
    const GameHamiltonian gh = localize(g, 1.0, 1.0, {0.8, 0.0}, {{0.0, 1.0}}, 2, n, n);
    const double err = verify_localization(gh, &env, Box::cube(2, 3.0), 2000, 77).max_error;
    if (prev > 0.0) {
      CHECK(err / prev >= 1.0 / 3.0);
      CHECK(err / prev <= 1.0);
    }
    prev = err;
    if (n == 64) CHECK(err <= 1e-3);
  }
}

TEST_CASE("ball grids") {
  CHECK(ball_grid(1, 5, 2.0).size() == 5);
  for (const Point& q : ball_grid(2, 9, 1.0)) CHECK(norm(q, 2) <= 1.0 + 1e-12);
}

TEST_CASE("environment channel requirements") {
  const GameHamiltonian gh = random_game(1, 2, 2, 1);
  EnvSpec spec = small_env(1);
  spec.channels_a = 1;
  spec.channels_b = 1;
  CHECK_THROWS_AS(certify_constants(gh, spec), ConfigError);
  spec.shared_channels = true;
  CHECK_NOTHROW(certify_constants(gh, spec));
  CHECK_THROWS_AS(certify_constants(gh, std::nullopt), ConfigError);
}
