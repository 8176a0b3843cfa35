#include <doctest.h>

#include <random>

#include "lz/bloch.hpp"
#include "lz/errors.hpp"
#include "oracles.hpp"

using namespace lz;

namespace {
Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> N;
  return Vec3(N(g), N(g), N(g)).normalized();
}
}  // namespace

TEST_CASE("rotation axis and rate") {
  auto [a0, w0] = rotation_axis(0.0);
  CHECK((a0 - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK(w0 == doctest::Approx(2.0));
  auto [a1, w1] = rotation_axis(1.0);
  CHECK((a1 - Vec3(1, 0, 1) / std::sqrt(2.0)).norm() < 1e-15);
  CHECK(w1 == doctest::Approx(2 * std::sqrt(2.0)));
  auto [aq, wq] = rotation_axis(0.25);
  CHECK(std::acos(aq.x()) == doctest::Approx(std::atan(0.25)).epsilon(1e-14));
  (void)wq;
}

TEST_CASE("half turn about x") {
  const Vec3 r = propagate_segment(Vec3(0, 0, 1), {0.0, kPi / 2});
  CHECK((r - Vec3(0, 0, -1)).norm() < 1e-15);
}

TEST_CASE("sense of rotation matches dr/dt = 2 h x r") {
  std::mt19937_64 g(3);
  for (int i = 0; i < 50; ++i) {
    const Vec3 r = random_unit(g);
    const double u = std::uniform_real_distribution<double>(-5, 5)(g);
    const double dt = std::uniform_real_distribution<double>(0, 10)(g);
    CHECK((propagate_segment(r, {u, dt}) - oracle::rk4(r, u, dt, 20000)).norm() < 1e-8);
  }
}

TEST_CASE("a bang arc of one loop time is the identity") {
  std::mt19937_64 g(4);
  for (double um : {0.25, 1.0, 8.0})
    for (int i = 0; i < 20; ++i) {
      const Vec3 r = random_unit(g);
      for (double s : {1.0, -1.0}) CHECK((propagate_segment(r, {s * um, loop_time(um)}) - r).norm() < 1e-12);
    }
  CHECK(loop_time(0.25) == doctest::Approx(kPi * std::cos(std::atan(0.25))));
}

TEST_CASE("norm, composition and x invariance") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> U(-10, 10), D(0, 10);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 r = random_unit(g);
    worst = std::max(worst, std::abs(propagate_segment(r, {U(g), D(g)}).norm() - 1.0));
  }
  CHECK(worst < 1e-12);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r = random_unit(g);
    const double u = U(g), a = D(g), b = D(g);
    CHECK((propagate_segment(r, {u, a + b}) - propagate_segment(propagate_segment(r, {u, a}), {u, b})).norm() < 1e-12);
    CHECK(propagate_segment(r, {0.0, a}).x() == doctest::Approx(r.x()).epsilon(1e-15));
  }
}

TEST_CASE("free evolution timing against a sampled root search") {
  const Vec3 r(0, 2 / std::sqrt(5.0), -1 / std::sqrt(5.0));
  const Vec3 target(0, 2 / std::sqrt(5.0), 1 / std::sqrt(5.0));
  const double dt = arc_time(r, target, 0.0);
  auto ref = oracle::first_root([&](double t) { return oracle::rk4(r, 0.0, t, 2000).z() - 1 / std::sqrt(5.0); }, kPi);
  REQUIRE(ref);
  CHECK(dt == doctest::Approx(*ref).epsilon(1e-9));
  CHECK((propagate_segment(r, {0.0, dt}) - target).norm() < 1e-12);
}

TEST_CASE("policy propagation") {
  SUBCASE("empty policy gives a single sample") {
    const auto s = propagate_policy(Vec3(0, 0, 1), Policy{});
    REQUIRE(s.size() == 1);
    CHECK(s[0].tau == 0.0);
    CHECK(!s[0].u.has_value());
    CHECK((s[0].r - Vec3(0, 0, 1)).norm() == 0.0);
  }
  SUBCASE("single segment equals propagate_segment") {
    const Vec3 r = Vec3(1, 2, 3).normalized();
    const Policy p{{{0.7, 1.3}}};
    const auto s = propagate_policy(r, p, 17);
    CHECK(s.front().tau == 0.0);
    CHECK((s.front().r - r).norm() == 0.0);
    CHECK((s.back().r - propagate_segment(r, {0.7, 1.3})).norm() < 1e-15);
    CHECK(s.back().tau == doctest::Approx(1.3));
  }
  SUBCASE("a policy followed by its reverse returns to the start") {
    std::mt19937_64 g(6);
    for (int i = 0; i < 20; ++i) {
      Policy p;
      for (int k = 0; k < 6; ++k) p.segments.push_back({std::uniform_real_distribution<double>(-2, 2)(g), 0.4 * k + 0.1});
      const Vec3 r = random_unit(g);
      const Vec3 e = propagate(r, p);
      Vec3 back = e;
      for (auto it = p.segments.rbegin(); it != p.segments.rend(); ++it) back = propagate_segment(back, {it->u, -it->dt});
      CHECK((back - r).norm() < 1e-12);
      const Policy rp = reversed(p);
      CHECK(rp.segments.front().u == p.segments.back().u);
      CHECK(rp.total_time() == doctest::Approx(p.total_time()));
    }
  }
  SUBCASE("published optimal durations for the u_max = 8 example land near o") {
    const Vec3 r0 = Vec3(0.5, 0.5, 8).normalized(), o = Vec3(1, 0, 8).normalized();
    const Policy p{{{-8.0, 0.0327}, {8.0, 0.262}, {-8.0, 0.017}}};
    CHECK((propagate(r0, p) - o).norm() < 1e-2);
  }
}

TEST_CASE("performance index") {
  const Vec3 o = Vec3(1, -1, 0).normalized();
  CHECK(performance_index(o, o) == doctest::Approx(1.0));
  CHECK(performance_index(-o, o) == doctest::Approx(-1.0));
  const Vec3 r0 = Vec3(1, 1, 0).normalized();
  const Vec3 oo = Vec3(-1, 1, 0).normalized();
  const double J = performance_index(propagate(r0, Policy{{{0.25, 0.23}}}), oo);
  CHECK(J < 1.0);
  CHECK(J == doctest::Approx(oracle::turn(r0, 0.25, 0.23).dot(oo)).epsilon(1e-12));
}

TEST_CASE("canonical form") {
  const Policy p{{{1.0, 0.5}, {1.0, 0.25}, {0.0, 0.0}, {-1.0, 0.3}, {-1.0, 0.0}}};
  const Policy c = canonical(p);
  REQUIRE(c.size() == 2);
  CHECK(c.segments[0].dt == doctest::Approx(0.75));
  CHECK(c.segments[1].u == -1.0);
  CHECK(c.total_time() == doctest::Approx(p.total_time()).epsilon(1e-15));
}

TEST_CASE("problem construction") {
  const Problem p = make_problem(Vec3(2, 0, 0), Vec3(0, 0, 3), 0.25);
  CHECK(p.r0.norm() == doctest::Approx(1.0));
  CHECK(p.alpha() == doctest::Approx(std::atan(0.25)));
  CHECK_THROWS_AS(make_problem(Vec3::Zero(), Vec3(0, 0, 1), 1.0), InputError);
  CHECK_THROWS_AS(make_problem(Vec3(1, 0, 0), Vec3(0, 0, 1), -1.0), InputError);
}
