#pragma once
#include <string>
#include <vector>

#include "lz/bloch.hpp"
#include "lz/pmp.hpp"

namespace lz {

struct TypeIExtremal {
  int sign_first = 1;  // sign of u on the opening arc
  int n = 0;           // number of switchings
  double dt_first = 0.0;
  double dt_interior = 0.0;
  double dt_last = 0.0;
  double theta = 0.0;  // interior rotation angle 2*dt_interior*sec(alpha)
  double gamma1 = 0.0;
  double xi = 0.0;
  double eta = 0.0;
};

struct TypeIIAnsatz {
  int sign_open = 1;
  int sign_close = 1;
  double dt_open = 0.0;
  double dt_sing = 0.0;
  double dt_close = 0.0;
};

enum class Kind { TypeI, TypeII, Numeric };

// One synthesized extremal. kinematic candidates reach o and carry the
// terminal value of their time-optimal adjoint in aT; stationary ones extremize
// J itself and carry aT = o.
struct Candidate {
  Kind kind = Kind::TypeI;
  TypeIExtremal one;
  TypeIIAnsatz two;
  Policy policy;
  Costate aT = Vec3::Zero();
  bool kinematic = false;
  double J = 0.0;
  double T = 0.0;
  int twins = 0;  // symmetry images merged into this one
  double endpoint_residual = 0.0;
};

struct Angles {
  double xi = 0.0;
  double eta = 0.0;
  bool degenerate = false;
};

Angles geometry_angles(double theta, double u_max);

Vec3 corner_locus(double gamma, double xi, int sign_u_plus);

// Corner latitude of a point on the locus circle; sign follows the locus map.
double corner_gamma(const Vec3& r, double xi, int sign_u_plus);

Policy to_policy(const TypeIExtremal& e, double u_max);
Policy to_policy(const TypeIIAnsatz& e, double u_max);

struct SynthesisOptions {
  int seeds = 64;     // per axis of the (theta, gamma1) seed grid
  int n_max = -1;     // < 0: Prop-8 style floor(pi/alpha)
  int fixed_n_cap = 16;
  int shoot_grid = 4000;
  int threads = 0;
  bool merge_twins = true;
};

// Time-optimal mode: kinematic extremals with n switchings, by Newton on the
// corner-locus residual. FixedT mode: stationary points of J at the given T.
std::vector<Candidate> synthesize_type1(const Problem& pr, int n, int sign_first,
                                        const SynthesisOptions& opt = {});

// Stationary points of J with free T (K = 0). These are the deadlock
// candidates of the time-optimal problem.
std::vector<Candidate> synthesize_stationary(const Problem& pr, int n, int sign_first,
                                             const SynthesisOptions& opt = {});

std::vector<Candidate> synthesize_type2(const Problem& pr, int sign_open, int sign_close);

// Inserts k1 loops at +u_max and then k2 at -u_max at the given times.
// Each time must be a corner of base or lie strictly inside a singular arc.
Policy expand_family(const Policy& base, double u_max, int k1, int k2,
                     const std::vector<double>& positions);

int coarse_n_max(double u_max);

std::vector<Candidate> enumerate_candidates(const Problem& pr, const SynthesisOptions& opt = {});

bool same_policy(const Policy& a, const Policy& b, double tol = 1e-6);

// Orthogonal maps that carry the problem into itself, possibly with time
// reversal. Used to merge mirror twins.
struct Symmetry {
  std::string name;
  Mat3 g;
  bool reversal = false;
  bool flip_u = false;
};
std::vector<Symmetry> problem_symmetries(const Problem& pr, double tol = 1e-10);
Policy apply_symmetry(const Symmetry& s, const Policy& p);

std::string describe(const Candidate& c);

}  // namespace lz
