#include "lz/pmp.hpp"

#include <algorithm>
#include <cmath>

#include "lz/errors.hpp"

namespace lz {

double pontryagin_K(const Vec3& r, const Costate& a, double u) {
  return 2.0 * Vec3(1.0, 0.0, u).dot(r.cross(a));
}

double switching_function(const Vec3& r, const Costate& a) { return 2.0 * r.cross(a).z(); }

std::vector<Costate> costate_propagate(const Costate& aT, const Policy& p) {
  std::vector<Costate> a(p.size() + 1);
  a.back() = aT;
  for (std::size_t k = p.size(); k-- > 0;) {
    const Segment& s = p.segments[k];
    a[k] = propagate_segment(a[k + 1], {s.u, -s.dt});
  }
  return a;
}

CornerCoefficients corner_coefficients(const Vec3& r, const Costate& a, double rel_tol) {
  const Vec3 c = r.cross(a);
  if (std::abs(c.z()) > rel_tol * std::max(c.norm(), 1e-300) && c.norm() > 1e-300)
    throw NotACorner("switching function does not vanish");
  return {c.x(), c.y()};
}

ArcDuration interior_arc_duration(const CornerCoefficients& c, double u_max, bool allow_limit) {
  const double al = std::atan(u_max);
  if (c.c1 == 0.0) {
    if (!allow_limit) throw SingularCase("c1 = 0");
    return {0.5 * kPi * std::cos(al), true};
  }
  const double d = std::atan(std::abs(c.c2 / (c.c1 * u_max)) / std::cos(al)) * std::cos(al);
  return {c.c1 < 0 ? d : kPi * std::cos(al) - d, false};
}

PontryaginDiagnostics extremal_check(const Problem& pr, const Policy& p,
                                     const std::optional<Costate>& aT, int per_arc) {
  PontryaginDiagnostics d;
  const Costate a_end = aT.value_or(pr.o);
  const auto a = costate_propagate(a_end, p);
  per_arc = std::max(per_arc, 2);

  d.commutator_norm = pr.r0.cross(a.front()).norm();
  const double S = d.commutator_norm;
  if (S < 1e-12) {
    d.degenerate = true;
    return d;
  }
  const double zero_tol = 1e-8 * S;
  const double umax = pr.u_max;
  const double ueps = 1e-12 * std::max(1.0, umax);

  Vec3 r = pr.r0;
  double tau = 0.0;
  double kmin = 1e300, kmax = -1e300, ksum = 0.0, kscale = 0.0;
  std::size_t kcount = 0;
  bool have_singular = false;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Segment& s = p.segments[k];
    if (std::abs(s.u) > umax + ueps) d.admissible = false;
    const bool bang = std::abs(std::abs(s.u) - umax) <= ueps;
    const double sg = s.u > 0 ? 1.0 : -1.0;
    for (int j = 0; j <= per_arc; ++j) {
      const double t = s.dt * j / per_arc;
      const Vec3 rj = propagate_segment(r, {s.u, t});
      const Costate aj = propagate_segment(a[k], {s.u, t});
      const double K = pontryagin_K(rj, aj, s.u);
      const double sw = switching_function(rj, aj);
      d.K_samples.emplace_back(tau + t, K);
      d.switching_samples.emplace_back(tau + t, sw);
      kmin = std::min(kmin, K);
      kmax = std::max(kmax, K);
      kscale = std::max(kscale, std::abs(K));
      ksum += K;
      ++kcount;
      if (bang) {
        if (sg * sw < -zero_tol) d.sign_consistent = false;
      } else {
        have_singular = true;
        d.kappa = K;
        if (std::abs(sw) > zero_tol) d.singular_consistent = false;
      }
    }
    // junctions: the switching function must vanish where the control jumps
    if (k + 1 < p.size() && p.segments[k + 1].u != s.u) {
      const Vec3 rk = propagate_segment(r, s);
      if (std::abs(switching_function(rk, a[k + 1])) > zero_tol) d.corners_ok = false;
    }
    r = propagate_segment(r, s);
    tau += s.dt;
  }
  if (kcount > 0) {
    d.K_mean = ksum / kcount;
    d.K_spread = kmax - kmin;
  }
  if (!have_singular) d.kappa = 0.0;
  const double ktol = 1e-9 * std::max(1.0, kscale);
  d.K_constant = d.K_spread <= ktol;
  d.K_nonnegative = d.K_mean >= -ktol;
  return d;
}

}  // namespace lz
