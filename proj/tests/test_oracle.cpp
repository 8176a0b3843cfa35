#include <doctest.h>

#include "lz/oracle.hpp"
#include "lz/report.hpp"
#include "lz/synthesis.hpp"

using namespace lz;

namespace {

double synthesized_min_T(const Problem& pr) {
  double best = 1e300;
  for (const auto& c : enumerate_candidates(pr))
    if (c.kinematic) best = std::min(best, c.T);
  return best;
}

}  // namespace

TEST_CASE("coincident endpoints") {
  const Problem pr = make_problem(Vec3(0.2, 0.5, 0.1), Vec3(0.2, 0.5, 0.1), 1.0);
  const auto r = oracle_min_time(pr);
  CHECK(r.reached);
  CHECK(r.best_T == 0.0);
  CHECK(r.best_policy.empty());
}

TEST_CASE("structures") {
  OracleConfig cfg;
  cfg.max_len = 3;
  cfg.n_max = 4;
  const auto s = oracle_structures(1.0, cfg);
  auto has = [&](std::vector<double> v) { return std::find(s.begin(), s.end(), v) != s.end(); };
  CHECK(has({1.0}));
  CHECK(has({-1.0, 0.0, 1.0}));
  CHECK(has({1.0, -1.0, 1.0, -1.0, 1.0, -1.0}));
  CHECK(!has({1.0, 1.0}));
  cfg.paranoid = true;
  cfg.paranoid_len = 2;
  CHECK(oracle_structures(1.0, cfg).size() > s.size());
}

TEST_CASE("u_max = 0.25 minimum time") {
  const Problem pr = demo_config("fig9").problem;
  const auto r = oracle_min_time(pr);
  REQUIRE(r.reached);
  // five published durations rounded to two decimals sum to 6.00
  CHECK(std::abs(r.best_T - 6.00) <= 0.025);
  CHECK(std::abs(r.best_T - synthesized_min_T(pr)) < 2 * r.grid_resolution);
  CHECK(performance_index(propagate(pr.r0, r.best_policy), pr.o) > 1 - 1e-9);
}

TEST_CASE("u_max = 8 minimum time") {
  const Problem pr = demo_config("fig10").problem;
  const auto r = oracle_min_time(pr);
  REQUIRE(r.reached);
  CHECK(std::abs(r.best_T - synthesized_min_T(pr)) < 2 * r.grid_resolution);
}

TEST_CASE("halving the resolution does not make the answer worse") {
  const Problem pr = make_problem(Vec3(1, 0.3, -0.2), Vec3(-0.2, 0.8, 0.5), 1.0);
  OracleConfig cfg;
  cfg.restarts = 24;
  cfg.resolution = 2e-3;
  const auto coarse = oracle_min_time(pr, cfg);
  cfg.resolution = 1e-3;
  const auto fine = oracle_min_time(pr, cfg);
  REQUIRE(coarse.reached);
  REQUIRE(fine.reached);
  CHECK(fine.best_T <= coarse.best_T + 2e-3);
}

TEST_CASE("fixed duration") {
  const Problem base = make_problem(Vec3(1, 0.3, -0.2), Vec3(-0.2, 0.8, 0.5), 1.0);
  OracleConfig cfg;
  cfg.restarts = 24;
  const double Tmin = oracle_min_time(base, cfg).best_T;

  SUBCASE("zero duration") {
    const auto r = oracle_max_J_fixed_T(make_problem(base.r0, base.o, 1.0, Mode::FixedT, 0.0), cfg);
    CHECK(r.best_J == doctest::Approx(base.r0.dot(base.o)));
  }
  SUBCASE("reachable") {
    for (double T : {Tmin, Tmin + 0.3, 2 * Tmin}) {
      const auto r = oracle_max_J_fixed_T(make_problem(base.r0, base.o, 1.0, Mode::FixedT, T), cfg);
      CHECK(r.best_J > 1 - 1e-6);
      CHECK(r.best_policy.total_time() == doctest::Approx(T).epsilon(1e-9));
    }
  }
  SUBCASE("below the minimum time") {
    double prev = 1.0;
    for (double T : {Tmin - 0.05, Tmin - 0.2, Tmin - 0.5}) {
      const auto r = oracle_max_J_fixed_T(make_problem(base.r0, base.o, 1.0, Mode::FixedT, T), cfg);
      CHECK(r.best_J < 1 - 1e-6);
      CHECK(r.best_J < prev);
      prev = r.best_J;
    }
  }
}
