#pragma once
#include <cstdint>
#include <vector>

#include "lz/bloch.hpp"

namespace lz {

struct OracleConfig {
  int restarts = 64;
  int max_len = 6;          // full {-,0,+} enumeration up to this many arcs
  int alt_extra = 1;        // alternating bang chains up to n_max + alt_extra arcs
  int n_max = -1;           // < 0: floor(pi/alpha)
  double resolution = 1e-3; // seed durations are drawn on this grid
  double feasibility = 1e-10;
  std::uint64_t seed = 20240611;
  bool paranoid = false;    // add an 11-level control alphabet
  int paranoid_len = 3;     // longest sequence over that alphabet
  int threads = 0;
};

struct OracleResult {
  Policy best_policy;
  double best_J = -2.0;
  double best_T = 0.0;
  double grid_resolution = 0.0;
  int restarts = 0;
  long long iterations = 0;
  int structures = 0;
  bool reached = false;
};

OracleResult oracle_min_time(const Problem& pr, const OracleConfig& cfg = {});
OracleResult oracle_max_J_fixed_T(const Problem& pr, const OracleConfig& cfg = {});

// Structures searched by the oracle, as control sequences.
std::vector<std::vector<double>> oracle_structures(double u_max, const OracleConfig& cfg);

}  // namespace lz
