// Command-line front end: propagate, solve, scan.
#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

#include "lz/errors.hpp"
#include "lz/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInput = 2;
constexpr int kVerification = 3;

struct Common {
  std::string config;
  std::string demo;
  std::string out;
  int threads = -1;
};

lz::Config load(const Common& c) {
  if (c.config.empty() == c.demo.empty()) throw lz::InputError("give exactly one of --config or --demo");
  lz::Config cfg = c.demo.empty() ? lz::load_config_file(c.config) : lz::demo_config(c.demo);
  if (c.threads >= 0) lz::set_threads(cfg, c.threads);
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw lz::InputError("cannot write " + path);
  f << text;
}

void add_common(CLI::App* app, Common& c, bool demo) {
  app->add_option("-c,--config", c.config, "problem config (JSON)");
  if (demo) app->add_option("--demo", c.demo, "built-in problem")->check(CLI::IsMember(lz::demo_names()));
  app->add_option("-o,--out", c.out, "output file (default stdout)");
  app->add_option("--threads", c.threads, "cap on worker threads (0 = library default)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  lz::init_logging();
  CLI::App app{"Bang-singular extremal synthesis and trap analysis for a driven two-level system"};
  app.require_subcommand(1);

  Common pc;
  std::string policy_path;
  int per_segment = 64;
  auto* prop = app.add_subcommand("propagate", "trajectory CSV for a policy");
  add_common(prop, pc, true);
  prop->add_option("-p,--policy", policy_path, "policy file (JSON)")->required();
  prop->add_option("--per-segment", per_segment, "samples per segment")->check(CLI::PositiveNumber);

  Common sc;
  int restarts = -1;
  double resolution = -1;
  bool paranoid = false;
  auto* solve = app.add_subcommand("solve", "synthesize, certify and classify extremals");
  add_common(solve, sc, true);
  solve->add_option("--restarts", restarts, "oracle restarts per structure")->check(CLI::PositiveNumber);
  solve->add_option("--resolution", resolution, "oracle grid resolution")->check(CLI::PositiveNumber);
  solve->add_flag("--paranoid", paranoid, "add the 11-level oracle search");

  Common nc;
  int starts = -1;
  long long seed = -1;
  double T = -1;
  bool policies = false;
  auto* scan = app.add_subcommand("scan", "fixed-time multi-start landscape scan");
  add_common(scan, nc, true);
  scan->add_option("--starts", starts, "starts per problem")->check(CLI::PositiveNumber);
  scan->add_option("--seed", seed, "seed for every random draw")->check(CLI::NonNegativeNumber);
  scan->add_option("--T", T, "control time (default 4 pi^2 / alpha)")->check(CLI::NonNegativeNumber);
  scan->add_flag("--policies", policies, "include converged controls");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*prop) {
      const lz::Config cfg = load(pc);
      const lz::Policy p = lz::load_policy_file(policy_path);
      std::ostringstream os;
      lz::write_trajectory_csv(os, cfg.problem, p, per_segment);
      emit(pc.out, os.str());
    } else if (*solve) {
      lz::Config cfg = load(sc);
      if (restarts > 0) cfg.oracle.restarts = restarts;
      if (resolution > 0) {
        cfg.oracle.resolution = resolution;
        cfg.classify.oracle_T_tol = 2 * resolution;
      }
      cfg.oracle.paranoid = cfg.oracle.paranoid || paranoid;
      emit(sc.out, lz::to_json(lz::solve(cfg)).dump(2) + "\n");
    } else if (*scan) {
      lz::Config cfg = load(nc);
      if (starts > 0) cfg.scan.num_starts = starts;
      if (seed >= 0) cfg.scan.seed = std::uint64_t(seed);
      if (T >= 0) cfg.scan.T = T;
      emit(nc.out, lz::to_json(lz::run_scan(cfg), policies).dump(2) + "\n");
    }
  } catch (const lz::OracleDisagreement& e) {
    spdlog::error("{}", e.what());
    std::cerr << "verification failure: " << e.what() << "\n";
    return kVerification;
  } catch (const lz::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const lz::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}
