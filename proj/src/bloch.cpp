#include "lz/bloch.hpp"

#include <algorithm>
#include <cmath>

#include "lz/errors.hpp"

namespace lz {

Vec3 unit(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 1e-300) || !std::isfinite(n)) throw InputError("zero or non-finite Bloch vector");
  return v / n;
}

double Policy::total_time() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.dt;
  return t;
}

double Problem::alpha() const { return std::atan(u_max); }

Problem make_problem(const Vec3& r0, const Vec3& o, double u_max, Mode mode, double T) {
  if (!(u_max > 0.0) || !std::isfinite(u_max)) throw InputError("u_max must be positive");
  if (mode == Mode::FixedT && !(T >= 0.0)) throw InputError("fixed-T problem needs T >= 0");
  Problem p;
  p.r0 = unit(r0);
  p.o = unit(o);
  p.u_max = u_max;
  p.mode = mode;
  p.T = mode == Mode::FixedT ? T : 0.0;
  return p;
}

std::pair<Vec3, double> rotation_axis(double u) {
  const double h = std::sqrt(1.0 + u * u);
  return {Vec3(1.0 / h, 0.0, u / h), 2.0 * h};
}

Vec3 rotate(const Vec3& n, double angle, const Vec3& v) {
  const double c = std::cos(angle), s = std::sin(angle);
  return v * c + n.cross(v) * s + n * (n.dot(v) * (1.0 - c));
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Vec3 propagate_segment(const Vec3& r, const Segment& s) {
  auto [n, rate] = rotation_axis(s.u);
  return rotate(n, rate * s.dt, r);
}

Mat3 segment_matrix(const Segment& s) {
  auto [n, rate] = rotation_axis(s.u);
  return rotation_matrix(n, rate * s.dt);
}

Vec3 propagate(const Vec3& r0, const Policy& p) {
  Vec3 r = r0;
  for (const auto& s : p.segments) r = propagate_segment(r, s);
  return r;
}

std::vector<Sample> propagate_policy(const Vec3& r0, const Policy& p, int per_segment) {
  std::vector<Sample> out;
  if (p.empty()) {
    out.push_back({0.0, std::nullopt, r0});
    return out;
  }
  per_segment = std::max(per_segment, 1);
  out.push_back({0.0, p.segments.front().u, r0});
  Vec3 r = r0;
  double tau = 0.0;
  for (const auto& s : p.segments) {
    for (int k = 1; k <= per_segment; ++k) {
      const double f = double(k) / per_segment;
      out.push_back({tau + f * s.dt, s.u, propagate_segment(r, {s.u, f * s.dt})});
    }
    // restart from the exact segment end to avoid accumulated drift
    r = propagate_segment(r, s);
    out.back().r = r;
    tau += s.dt;
  }
  return out;
}

double performance_index(const Vec3& rT, const Vec3& o) { return rT.dot(o); }

double loop_time(double u_max) { return kPi / std::sqrt(1.0 + u_max * u_max); }

double arc_time(const Vec3& a, const Vec3& b, double u) {
  auto [n, rate] = rotation_axis(u);
  const Vec3 pa = a - n * n.dot(a);
  const Vec3 pb = b - n * n.dot(b);
  double ang = std::atan2(pa.cross(pb).dot(n), pa.dot(pb));
  if (ang < 0) ang += 2 * kPi;
  if (ang >= 2 * kPi) ang -= 2 * kPi;
  return ang / rate;
}

Policy canonical(const Policy& p, double tol) {
  Policy out;
  for (const auto& s : p.segments) {
    if (s.dt <= tol) continue;
    if (!out.segments.empty() && out.segments.back().u == s.u)
      out.segments.back().dt += s.dt;
    else
      out.segments.push_back(s);
  }
  return out;
}

Policy reversed(const Policy& p) {
  Policy out;
  out.segments.assign(p.segments.rbegin(), p.segments.rend());
  return out;
}

}  // namespace lz

namespace lz {

std::vector<double> orbit_crossings(const Vec3& v, double u, const Vec3& normal, double level,
                                    bool backward) {
  auto [n, rate] = rotation_axis(u);
  const double sgn = backward ? -1.0 : 1.0;
  // v(phi) = par + perp cos(phi) + b sin(phi) with phi = sgn * rate * t
  const Vec3 par = n * n.dot(v);
  const Vec3 perp = v - par;
  const Vec3 b = n.cross(perp);
  const double A = normal.dot(perp), B = sgn * normal.dot(b), C = normal.dot(par) - level;
  const double R = std::hypot(A, B);
  std::vector<double> out;
  if (R < 1e-14) return out;
  const double x = -C / R;
  if (std::abs(x) > 1.0) return out;
  const double ph0 = std::atan2(B, A);
  const double da = std::acos(std::clamp(x, -1.0, 1.0));
  for (double ph : {ph0 + da, ph0 - da}) {
    ph = std::fmod(ph, 2 * kPi);
    if (ph < 0) ph += 2 * kPi;
    if (ph >= 2 * kPi - 1e-15) ph = 0.0;
    out.push_back(ph / rate);
  }
  std::sort(out.begin(), out.end());
  if (out.size() == 2 && std::abs(out[1] - out[0]) < 1e-15) out.pop_back();
  return out;
}

}  // namespace lz
