#pragma once
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lz/classify.hpp"
#include "lz/oracle.hpp"
#include "lz/scan.hpp"
#include "lz/synthesis.hpp"

namespace lz {

inline constexpr int kFormatVersion = 1;

struct FamilyRequest {
  int k1 = 0;  // loops at +u_max
  int k2 = 0;  // loops at -u_max
};

struct Config {
  Problem problem;
  SynthesisOptions synthesis;
  OracleConfig oracle;
  ClassifyOptions classify;
  ScanConfig scan;
  int scan_problems = 0;  // > 0: random problems drawn from the seed instead of `problem`
  std::optional<FamilyRequest> family;
  std::string name;
};

// Throws InputError on anything malformed.
Config load_config(const nlohmann::json& j);
Config load_config_file(const std::string& path);
Config demo_config(const std::string& name);
std::vector<std::string> demo_names();

// Every thread knob in one place.
void set_threads(Config& c, int threads);

nlohmann::json to_json(const Policy& p);
Policy policy_from_json(const nlohmann::json& j);
Policy load_policy_file(const std::string& path);

struct SolveResult {
  Problem problem;
  std::vector<Candidate> candidates;
  OracleResult oracle;
  Classification classification;
};

// Synthesis, oracle and classification. Throws OracleDisagreement.
SolveResult solve(const Config& c);

nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const ScanReport& r, bool with_policies = false);

ScanReport run_scan(const Config& c);

void write_trajectory_csv(std::ostream& os, const Problem& pr, const Policy& p, int per_segment = 64);

// Reads QOC_LOG (trace, debug, info, warn, error, off).
void init_logging();

}  // namespace lz
