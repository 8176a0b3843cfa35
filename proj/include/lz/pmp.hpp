#pragma once
#include <optional>
#include <utility>
#include <vector>

#include "lz/bloch.hpp"

namespace lz {

// Bloch form of the traceless part of the back-propagated observable.
using Costate = Vec3;

// With rho = (1 + r.sigma)/2 and O = a.sigma one has -i[rho,O] = (r x a).sigma,
// so K = 2 h.(r x a) and dK/du = 2 (r x a)_z. K is also dJ/dT.
double pontryagin_K(const Vec3& r, const Costate& a, double u);
double switching_function(const Vec3& r, const Costate& a);

// a(tau_k) at every segment boundary, k = 0..size, with a(T) = aT.
std::vector<Costate> costate_propagate(const Costate& aT, const Policy& p);

struct CornerCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
};

CornerCoefficients corner_coefficients(const Vec3& r, const Costate& a, double rel_tol = 1e-8);

struct ArcDuration {
  double value = 0.0;
  bool limiting = false;  // c1 == 0, value is the arctan limit
};

// Interior bang-arc duration implied by the commutator at a corner.
// Throws SingularCase for c1 == 0 unless allow_limit is set.
ArcDuration interior_arc_duration(const CornerCoefficients& c, double u_max,
                                  bool allow_limit = false);

struct PontryaginDiagnostics {
  std::vector<std::pair<double, double>> K_samples;
  std::vector<std::pair<double, double>> switching_samples;
  double K_mean = 0.0;
  double K_spread = 0.0;
  double kappa = 0.0;  // K on singular arcs (0 when there are none)
  double commutator_norm = 0.0;
  bool degenerate = false;  // r parallel to a everywhere
  bool K_constant = true;
  bool K_nonnegative = true;
  bool sign_consistent = true;
  bool singular_consistent = true;
  bool corners_ok = true;
  bool admissible = true;

  bool extremal() const {
    return admissible && K_constant && K_nonnegative && sign_consistent && singular_consistent &&
           corners_ok;
  }
};

// aT defaults to the observable itself. Time-optimal candidates pass the
// terminal value of their own adjoint instead.
PontryaginDiagnostics extremal_check(const Problem& pr, const Policy& p,
                                     const std::optional<Costate>& aT = std::nullopt,
                                     int per_arc = 64);

}  // namespace lz
