#pragma once
#include <climits>
#include <string>
#include <vector>

#include "lz/oracle.hpp"
#include "lz/pmp.hpp"
#include "lz/synthesis.hpp"

namespace lz {

struct QSpectrum {
  std::vector<double> q;
  std::vector<double> gamma;
  std::vector<double> zeta;
  double eta = 0.0;
};

double q_value(double gamma, double eta);
QSpectrum q_spectrum(const TypeIExtremal& e);

struct QCriterion {
  bool pass = true;            // at most one negative and it has the smallest modulus
  int negatives = 0;
  int negative_index = -1;
  bool negative_at_end = true; // the negative entry (if any) is first or last
  bool window_evaluated = false;
  bool window_lower = true;
  bool window_upper = true;
};
QCriterion q_criterion(const TypeIExtremal& e);
QCriterion q_criterion(const std::vector<double>& q, const std::vector<double>& gamma, double eta);

enum class TypeHint { ForceI, ForceII, Either };

struct SwitchingBounds {
  int n_min_x = 0;
  int n_min_z = 0;
  int n_max_coarse = 0;   // floor(pi/alpha)
  int n_max_ends = 0;     // negative q only at an end
  int n_max_large_u = INT_MAX;
  int n_max_refined = INT_MAX;
  double phi_x = 0.0;
  double phi_z = 0.0;
  TypeHint type_hint = TypeHint::Either;
};
SwitchingBounds switching_bounds(const Problem& pr);

struct CornerChecks {
  std::vector<bool> needle;  // u_i^- r_x r_y >= 0
  std::vector<bool> box;     // corner x strictly inside the endpoint box
  bool needle_ok = true;
  bool box_ok = true;
};
CornerChecks corner_inequality_checks(const Problem& pr, const Candidate& c);

enum class Equatorial { TimeOptimal, Saddle };
Equatorial equatorial_classification(const Vec3& r_minus, const Vec3& r_plus);

bool interior_bang_filter(const Policy& p, double u_max);

struct LoopFlag {
  bool flagged = false;
  int loops = 0;
  std::vector<std::size_t> segments;
};
LoopFlag perfect_loop_detect(const Policy& p, double u_max);

struct Crossing {
  double tau_a = 0.0;
  double tau_b = 0.0;
  Vec3 point = Vec3::Zero();
};
std::vector<Crossing> self_intersection(const std::vector<Sample>& traj);
std::vector<Crossing> self_intersection(const Problem& pr, const Policy& p, int per_arc = 512);

struct LocalOptimality {
  bool ok = false;
  std::string reason;
  std::vector<double> hessian_eigs;
  double kkt_residual = 0.0;
};
LocalOptimality local_optimality(const Problem& pr, const Candidate& c);

enum class Category {
  GloballyOptimal,
  DeadlockTrap,
  LoopTrap,
  TopologicalTrap,
  PerfectLoop,
  SaddlePoint,
  NotExtremal
};
const char* to_string(Category c);
const char* to_string(TypeHint h);

struct ClassificationReport {
  std::size_t index = 0;  // position in the candidate list
  Category category = Category::NotExtremal;
  double J = 0.0;
  double T = 0.0;
  PontryaginDiagnostics pmp;
  LocalOptimality local;
  std::optional<QSpectrum> spectrum;
  std::optional<QCriterion> qcrit;
  std::optional<CornerChecks> corners;
  LoopFlag loops;
  std::size_t self_crossings = 0;
  std::vector<std::string> notes;
};

struct Classification {
  std::vector<ClassificationReport> reports;  // same order as the candidates
  std::size_t optimum = SIZE_MAX;
  SwitchingBounds bounds;
};

struct ClassifyOptions {
  double J_tol = 1e-6;
  double T_tol = 1e-6;
  double oracle_T_tol = 2e-3;  // 2x the oracle grid resolution
  bool intersections = true;
};

// Throws OracleDisagreement when the oracle beats every candidate.
Classification classify(const Problem& pr, const std::vector<Candidate>& cands,
                        const OracleResult& oracle, const ClassifyOptions& opt = {});

}  // namespace lz
