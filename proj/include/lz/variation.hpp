#pragma once
#include <Eigen/Dense>
#include <vector>

#include "lz/bloch.hpp"
#include "lz/synthesis.hpp"

namespace lz {

struct NeedleTimings {
  double dtau_plus = 0.0;
  double dtau_zero = 0.0;
  double defect = 0.0;  // dtau_zero - dtau_plus - dtau_minus, second order
};

// Second-order McShane variation around a corner r_i entered with u_minus.
NeedleTimings needle_variation_timings(const Vec3& r_i, double u_minus, double dtau_minus);

struct SlidingExpansion {
  double linear = 0.0;
  double quadratic = 0.0;
  double cubic = 0.0;
  double q = 0.0;
  double gamma = 0.0;  // signed corner latitude

  double dgamma(double dtau) const { return ((cubic * dtau + quadratic) * dtau + linear) * dtau; }
};

// Corner index is 0-based. Uses gamma_i = gamma1 + i*eta.
SlidingExpansion sliding_expansion(const TypeIExtremal& e, int i, double u_max);

struct QForm {
  Eigen::MatrixXd Q;
  Eigen::VectorXd eigenvalues;
  bool nonnegative = true;
};

QForm q_form(const std::vector<double>& q, double tol = 1e-12);
QForm q_form(const TypeIExtremal& e);

// Closed forms for the equatorial comparisons. gap_a is returned exactly as
// printed; it measures rotation angle, i.e. twice the time difference.
double equatorial_gap_a(double r_minus_z, double r_plus_z, double u_max);
double equatorial_gap_b(double r_plus_z, double u_max);
double equatorial_gap_b_derivative(double r_plus_z, double u_max);
double antiequatorial_gap(double r_minus_x, double r_prime_z, double u_max);

}  // namespace lz
