#include "lz/variation.hpp"

#include <cmath>

#include "lz/classify.hpp"
#include "lz/errors.hpp"

namespace lz {

namespace {

double checked_asin(double v) {
  if (!(std::abs(v) <= 1.0 + 1e-14)) throw OutOfDomain("arcsin argument outside [-1, 1]");
  return std::asin(std::clamp(v, -1.0, 1.0));
}

double checked_acos(double v) {
  if (!(std::abs(v) <= 1.0 + 1e-14)) throw OutOfDomain("arccos argument outside [-1, 1]");
  return std::acos(std::clamp(v, -1.0, 1.0));
}

}  // namespace

NeedleTimings needle_variation_timings(const Vec3& r, double um, double d) {
  if (std::abs(r.y()) < 1e-9) throw DegenerateY("corner with r_y = 0");
  NeedleTimings t;
  t.dtau_plus = d * (r.y() + 2.0 * d * r.z()) / r.y();
  t.dtau_zero = 2.0 * d * (d * (um * r.x() + r.z()) + r.y()) / r.y();
  t.defect = 2.0 * um * d * d * r.x() / r.y();
  return t;
}

SlidingExpansion sliding_expansion(const TypeIExtremal& e, int i, double um) {
  SlidingExpansion s;
  const double xi = e.xi, eta = e.eta;
  s.gamma = e.gamma1 + i * eta;
  s.q = q_value(s.gamma, eta);
  const double t = std::tan(0.5 * eta);
  s.linear = 2.0 * std::cos(0.5 * xi);
  s.quadratic = -std::abs(std::pow(std::sin(0.5 * xi), 3) / um) * s.q;
  s.cubic = um * um * std::cos(0.5 * xi) / 3.0 *
            (2.0 / std::pow(std::cos(0.5 * eta), 2) - 3.0 * s.q * s.q * std::pow(t, 4) -
             6.0 / std::tan(s.gamma) * (t + (s.q + 1.0) * std::pow(t, 3)));
  return s;
}

QForm q_form(const std::vector<double>& q, double tol) {
  QForm f;
  const int m = int(q.size()) - 1;
  if (m < 1) {
    f.Q.resize(0, 0);
    return f;
  }
  f.Q = Eigen::MatrixXd::Constant(m, m, q.back());
  for (int k = 0; k < m; ++k) f.Q(k, k) += q[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.Q);
  f.eigenvalues = es.eigenvalues();
  double scale = 1.0;
  for (double v : q) scale = std::max(scale, std::abs(v));
  f.nonnegative = f.eigenvalues.minCoeff() >= -tol * scale;
  return f;
}

QForm q_form(const TypeIExtremal& e) { return q_form(q_spectrum(e).q); }

double equatorial_gap_a(double rm, double rp, double um) {
  const double a = std::atan(um), ca = std::cos(a), sa = std::sin(a);
  const double dz = rp - rm;
  auto S = [&](double z) { return std::sqrt(1.0 - sa * sa * z * z); };
  return ca * (checked_asin((0.5 * dz / ca - ca * rp) / S(rp)) + checked_asin(ca * rp / S(rp)) -
               checked_asin(ca * rm / S(rm)) + checked_asin((0.5 * dz / ca + ca * rm) / S(rm))) -
         checked_asin(rp) + checked_asin(rm);
}

double equatorial_gap_b(double z, double um) {
  if (!(std::abs(z) <= 1.0)) throw OutOfDomain("|r+_z| > 1");
  const double a = std::atan(um), ca = std::cos(a), sa = std::sin(a);
  return checked_acos(z) - ca * checked_acos(z * ca / std::sqrt(1.0 - z * z * sa * sa));
}

double equatorial_gap_b_derivative(double z, double um) {
  const double a = std::atan(um), sa = std::sin(a);
  return -2.0 * std::sqrt(1.0 - z * z) * sa * sa / (z * z * std::cos(2 * a) - z * z + 2.0);
}

double antiequatorial_gap(double x, double z, double um) {
  if (!(std::abs(x) < 1.0) || !(std::abs(z) <= 1.0)) throw OutOfDomain("endpoint outside the sphere");
  const double a = std::atan(um), ca = std::cos(a), sa = std::sin(a);
  double s = 0.0;
  for (double sg : {1.0, -1.0}) {
    s += checked_asin((sg * z - x / std::tan(a)) / std::sqrt(1.0 - x * x));
    s += checked_asin((x / sa - sg * z * ca) / std::sqrt(1.0 - z * z * sa * sa)) /
         std::sqrt(std::tan(a) * std::tan(a) + 1.0);
  }
  return 0.5 * s;
}

}  // namespace lz
