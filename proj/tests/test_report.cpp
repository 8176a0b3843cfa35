#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lz/errors.hpp"
#include "lz/report.hpp"

using namespace lz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  static const fs::path d = [] {
    fs::path p = fs::temp_directory_path() / ("qoc_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args, const std::string& out = "") {
  std::string cmd = std::string(QOC_BIN) + " " + args;
  cmd += out.empty() ? " > /dev/null" : " > " + (scratch_dir() / out).string();
  cmd += " 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(f, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("policy files round trip") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> U(-3, 3), D(0, 2);
  Policy p;
  for (int k = 0; k < 9; ++k) p.segments.push_back({U(g), D(g)});
  const Policy q = policy_from_json(json::parse(to_json(p).dump()));
  REQUIRE(q.size() == p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(std::abs(q.segments[k].u - p.segments[k].u) < 1e-12);
    CHECK(std::abs(q.segments[k].dt - p.segments[k].dt) < 1e-12);
  }
  CHECK(to_json(p)["format_version"] == kFormatVersion);
  CHECK(policy_from_json(json::parse(R"([{"u": 1, "dt": 0.5}])")).size() == 1);
  CHECK_THROWS_AS(policy_from_json(json::parse(R"({"segments": [{"u": 1}]})")), InputError);
  CHECK_THROWS_AS(policy_from_json(json::parse(R"([{"u": 1, "dt": -0.5}])")), InputError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(load_config(json::parse(R"({"r0": [0,0,0], "o": [1,0,0], "u_max": 1})")), InputError);
  CHECK_THROWS_AS(load_config(json::parse(R"({"r0": [1,0,0], "u_max": 1})")), InputError);
  CHECK_THROWS_AS(load_config(json::parse(R"({"r0": [1,0,0], "o": [0,0,1], "u_max": 1, "mode": "fixed-T"})")), InputError);
  CHECK_THROWS_AS(load_config(json::parse(R"({"r0": [1,0,0], "o": [0,0,1], "u_max": 1, "mode": "sideways"})")), InputError);
  CHECK_THROWS_AS(load_config(json::parse(R"({"r0": [1,0], "o": [0,0,1], "u_max": 1})")), InputError);
  CHECK_THROWS_AS(load_config_file((scratch_dir() / "missing.json").string()), InputError);
  const Config c = load_config(json::parse(
      R"({"r0": [2,0,0], "o": [0,0,3], "u_max": 0.5, "mode": "fixed-T", "T": 1.5, "oracle": {"resolution": 0.002}})"));
  CHECK(c.problem.mode == Mode::FixedT);
  CHECK(c.problem.T == 1.5);
  CHECK(c.problem.r0.norm() == doctest::Approx(1.0));
  CHECK(c.classify.oracle_T_tol == doctest::Approx(0.004));
  for (const auto& n : demo_names()) CHECK_NOTHROW(demo_config(n));
  CHECK_THROWS_AS(demo_config("nope"), InputError);
}

TEST_CASE("trajectory CSV") {
  const Problem pr = demo_config("fig10").problem;
  SUBCASE("columns and endpoint") {
    const Policy p{{{-8.0, 0.0327}, {8.0, 0.262}, {-8.0, 0.017}}};
    std::ostringstream os;
    write_trajectory_csv(os, pr, p, 16);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "tau,u,rx,ry,rz,K,switching");
    std::vector<std::string> lines;
    for (std::string l; std::getline(is, l);) lines.push_back(l);
    CHECK(lines.size() == 1 + 3 * 16);
    std::stringstream last(lines.back());
    std::vector<double> v;
    for (std::string c; std::getline(last, c, ',');) v.push_back(std::stod(c));
    REQUIRE(v.size() == 7);
    CHECK((Vec3(v[2], v[3], v[4]) - pr.o).norm() < 1e-2);
    CHECK(v[0] == doctest::Approx(p.total_time()));
  }
  SUBCASE("empty policy") {
    std::ostringstream os;
    write_trajectory_csv(os, pr, Policy{});
    std::istringstream is(os.str());
    int n = 0;
    for (std::string l; std::getline(is, l);) ++n;
    CHECK(n == 2);
  }
}

TEST_CASE("solve on coincident endpoints") {
  const Config c = load_config(json::parse(R"({"r0": [0.1,0.2,0.9], "o": [0.1,0.2,0.9], "u_max": 1})"));
  const auto r = solve(c);
  const json j = to_json(r);
  REQUIRE(j["optimum"].is_number());
  const auto& best = j["candidates"][j["optimum"].get<std::size_t>()];
  CHECK(best["T"].get<double>() == 0.0);
  CHECK(best["category"] == "globally-optimal");
  int optimal = 0;
  for (const auto& cand : j["candidates"]) optimal += cand["category"] == "globally-optimal";
  CHECK(optimal == 1);
}

TEST_CASE("command line") {
  const auto policy = write("fig10_policy.json", R"({"format_version": 1, "segments": [
      {"u": -8, "dt": 0.0327}, {"u": 8, "dt": 0.262}, {"u": -8, "dt": 0.017}]})");
  SUBCASE("propagate") {
    REQUIRE(run("propagate --demo fig10 -p " + policy.string(), "traj.csv") == 0);
    const auto rows = read_csv(scratch_dir() / "traj.csv");
    REQUIRE(rows.size() > 2);
    CHECK(rows[0].size() == 7);
    const auto& e = rows.back();
    const Vec3 end(std::stod(e[2]), std::stod(e[3]), std::stod(e[4]));
    CHECK((end - demo_config("fig10").problem.o).norm() < 1e-2);

    const auto empty = write("empty.json", R"({"segments": []})");
    REQUIRE(run("propagate --demo fig10 -p " + empty.string(), "empty.csv") == 0);
    CHECK(read_csv(scratch_dir() / "empty.csv").size() == 2);
  }
  SUBCASE("inserted loop keeps the endpoint") {
    const double L = loop_time(1.0);
    const auto base = write("base.json", R"([{"u": 1, "dt": 0.3}, {"u": 0, "dt": 0.5}, {"u": -1, "dt": 0.2}])");
    const auto fam = write("fam.json", "[{\"u\": 1, \"dt\": 0.3}, {\"u\": 0, \"dt\": 0.2}, {\"u\": 1, \"dt\": " +
                                           std::to_string(L) + "}, {\"u\": 0, \"dt\": 0.3}, {\"u\": -1, \"dt\": 0.2}]");
    REQUIRE(run("propagate --demo fig11 -p " + base.string(), "base.csv") == 0);
    REQUIRE(run("propagate --demo fig11 -p " + fam.string(), "fam.csv") == 0);
    const auto a = read_csv(scratch_dir() / "base.csv").back(), b = read_csv(scratch_dir() / "fam.csv").back();
    for (int k = 2; k <= 4; ++k) CHECK(std::stod(a[k]) == doctest::Approx(std::stod(b[k])).epsilon(1e-5));
  }
  SUBCASE("input errors exit with 2") {
    const auto zero = write("zero.json", R"({"r0": [0,0,0], "o": [1,0,0], "u_max": 1})");
    CHECK(run("solve -c " + zero.string()) == 2);
    const auto broken = write("broken.json", "{ not json");
    CHECK(run("solve -c " + broken.string()) == 2);
    CHECK(run("solve --demo fig9 -c " + zero.string()) == 2);
    CHECK(run("propagate --demo fig10 -p " + (scratch_dir() / "nothing.json").string()) == 2);
    CHECK(run("bogus") == 2);
  }
  SUBCASE("an oracle that beats every candidate exits with 3") {
    const auto cut = write("cut.json", R"({"u_max": 0.25, "r0": [1,1,0], "o": [-1,1,0],
                                          "synthesis": {"n_max": 1}, "oracle": {"restarts": 8}})");
    CHECK(run("solve -c " + cut.string()) == 3);
  }
  SUBCASE("scan with a fixed seed is reproducible") {
    const auto cfg = write("scan.json", R"({"u_max": 1, "r0": [0,0,1], "o": [1,0,0], "seed": 5,
                                           "scan": {"num_starts": 2, "bins": 64, "T": 3.0}})");
    REQUIRE(run("scan -c " + cfg.string(), "s1.json") == 0);
    REQUIRE(run("scan -c " + cfg.string(), "s2.json") == 0);
    std::ifstream a(scratch_dir() / "s1.json"), b(scratch_dir() / "s2.json");
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(!sa.empty());
    CHECK(sa == sb);
    const json j = json::parse(sa);
    CHECK(j["outcomes"].size() == 2);
  }
  SUBCASE("scan at zero duration") {
    const auto cfg = write("scan0.json", R"({"u_max": 1, "r0": [0,0,1], "o": [0.6,0,0.8], "scan": {"num_starts": 3, "T": 0}})");
    REQUIRE(run("scan -c " + cfg.string(), "s0.json") == 0);
    std::ifstream f(scratch_dir() / "s0.json");
    const json j = json::parse(f);
    for (const auto& o : j["outcomes"]) CHECK(o["J_final"].get<double>() == doctest::Approx(0.8));
  }
}
