#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lz/bloch.hpp"
#include "lz/classify.hpp"

namespace lz {

// Piecewise-constant control on a uniform grid over [0, T].
struct GridPolicy {
  double T = 0.0;
  std::vector<double> u;

  double bin() const { return u.empty() ? 0.0 : T / double(u.size()); }
};

Policy to_policy(const GridPolicy& g);
// Bin-averaged control; durations beyond T are cut, a short policy is padded with u = 0.
GridPolicy discretize(const Policy& p, int bins, double T);

double grid_J(const Problem& pr, const GridPolicy& g);
std::vector<double> grid_gradient(const Problem& pr, const GridPolicy& g);

struct AscentOptions {
  int max_iter = 20000;
  double grad_tol = 1e-8;
};

struct AscentResult {
  GridPolicy policy;
  double J = 0.0;
  int iterations = 0;
  bool cap_reached = false;  // iteration cap hit before the gradient test
  bool monotone = true;
};

AscentResult gradient_local_search(const Problem& pr, const GridPolicy& start, const AscentOptions& opt = {});

enum class Escape {
  SignInversion,  // flip the sign over one loop time, endpoint unchanged
  Removal,        // cut one loop time out of the arc
  Replace         // swap one loop time for u = 0 (removal padded back to the same T)
};

// Acts on the first bang arc holding a complete loop. Throws NoLoopFound.
// slack tolerates arcs up to that much shorter than a loop.
Policy escape_perfect_loop(const Policy& p, double u_max, Escape how = Escape::SignInversion, double slack = 0.0);

// Thresholds the grid control into bang and singular arcs.
struct Fingerprint {
  std::string structure;  // one of '+', '-', '0', '~' per arc
  Policy arcs;
  bool clean = true;      // no '~' arcs
};
Fingerprint fingerprint(const GridPolicy& g, double u_max, double thr = 1e-3);

struct ScanConfig {
  std::optional<double> T;  // default 4 pi^2 / alpha
  int num_starts = 10;
  int bins = 512;
  AscentOptions ascent;
  int max_escapes = 1;
  Escape escape = Escape::Replace;
  double global_tol = 1e-6;
  std::uint64_t seed = 20240611;
  int threads = 0;
};

double default_scan_time(double u_max);

struct ScanOutcome {
  std::size_t problem = 0;
  std::size_t start = 0;
  double T = 0.0;
  double J_start = 0.0;
  double J_final = 0.0;
  int iterations = 0;
  bool cap_reached = false;
  bool perfect_loop = false;   // flagged at some convergence point
  int escapes = 0;
  bool global = false;
  Category category = Category::GloballyOptimal;
  std::string structure;
  std::size_t self_crossings = 0;
  GridPolicy converged;
};

struct ScanReport {
  std::vector<ScanOutcome> outcomes;
  std::map<std::string, int> counts;  // by category name
  int non_simple_traps = 0;           // traps other than perfect loops
  double trap_rate = 0.0;
};

ScanReport scan(const std::vector<Problem>& problems, const ScanConfig& cfg);

// Uniform random endpoints on the sphere.
std::vector<Problem> random_problems(int n, double u_max, std::uint64_t seed, Mode mode = Mode::TimeOptimal,
                                     double T = 0.0);

}  // namespace lz
