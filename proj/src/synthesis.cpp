#include "lz/synthesis.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <set>

#include "lz/errors.hpp"
#include "lz/parallel.hpp"

namespace lz {

namespace {

double sgn(double v) { return v < 0 ? -1.0 : 1.0; }

double wrap_pi(double a) {
  a = std::fmod(a + kPi, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  return a - kPi;
}

// first tau > 0 where the z component of w rotating under u vanishes
double next_zero(const Vec3& w, double u) {
  const auto ts = orbit_crossings(w, u, Vec3::UnitZ());
  for (double t : ts)
    if (t > 1e-13) return t;
  // w_z is zero at 0 and touches nowhere else inside the period
  return ts.empty() ? INFINITY : loop_time(u);
}

Candidate finish(const Problem& pr, Candidate c) {
  c.policy = canonical(c.policy);
  const Vec3 rT = propagate(pr.r0, c.policy);
  c.J = performance_index(rT, pr.o);
  c.T = c.policy.total_time();
  c.endpoint_residual = (rT - pr.o).norm();
  return c;
}

// Adjoint chain of a type I extremal seeded at corner 1 with w1.
struct Chain {
  std::vector<Vec3> corners;
  Vec3 w_end;
  Vec3 r_end;
  double last_u = 0.0;
  double dt_interior = 0.0;
};

// Walks n-1 interior arcs from corner r1 with adjoint w1, interior duration
// given by the next zero of w_z.
Chain walk(const Vec3& r1, const Vec3& w1, double u_plus, int n) {
  Chain ch;
  ch.corners.push_back(r1);
  ch.dt_interior = next_zero(w1, u_plus);
  Vec3 r = r1, w = w1;
  double u = u_plus;
  for (int i = 1; i < n; ++i) {
    r = propagate_segment(r, {u, ch.dt_interior});
    w = propagate_segment(w, {u, ch.dt_interior});
    ch.corners.push_back(r);
    u = -u;
  }
  ch.r_end = r;
  ch.w_end = w;
  ch.last_u = u;
  return ch;
}

template <class F>
std::vector<double> bracket_roots(F&& g, double a, double b, int N) {
  std::vector<double> roots;
  if (!(b > a)) return roots;
  double x0 = a, g0 = g(a);
  for (int k = 1; k <= N; ++k) {
    const double x1 = a + (b - a) * k / N;
    const double g1 = g(x1);
    if (std::isfinite(g0) && std::isfinite(g1)) {
      if (g0 == 0.0) {
        // isolated exact hits only; a flat zero means a degenerate family
        const double h = (b - a) / N;
        const double gl = g(std::max(a, x0 - h)), gr = g(x1);
        if (x0 > a && gl * gr < 0) roots.push_back(x0);
      } else if (g0 * g1 < 0) {
        boost::uintmax_t it = 200;
        auto r = boost::math::tools::toms748_solve(
            g, x0, x1, g0, g1, boost::math::tools::eps_tolerance<double>(52), it);
        roots.push_back(0.5 * (r.first + r.second));
      }
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

bool near_dup(const std::vector<double>& v, double x, double tol) {
  for (double y : v)
    if (std::abs(x - y) < tol) return true;
  return false;
}

}  // namespace

Angles geometry_angles(double theta, double u_max) {
  if (!(theta >= 0.0 && theta <= 2 * kPi)) throw DegenerateTheta("theta outside [0, 2pi]");
  const double al = std::atan(u_max);
  Angles a;
  if (theta == 0.0 || theta == 2 * kPi) {
    a.degenerate = true;
    return a;
  }
  const double h = 0.5 * theta;
  if (std::abs(std::cos(h)) < 1e-15)
    a.xi = kPi;
  else
    a.xi = -2.0 * std::atan(u_max * std::tan(h) * std::cos(al));
  a.eta = -2.0 * std::atan(std::sin(h) / std::sqrt(u_max * u_max + std::cos(h) * std::cos(h)));
  return a;
}

Vec3 corner_locus(double gamma, double xi, int s) {
  const double sg = std::sin(gamma);
  return {s * sg * std::sin(0.5 * xi), -sg * std::cos(0.5 * xi), std::cos(gamma)};
}

double corner_gamma(const Vec3& r, double xi, int s) {
  const Vec3 e(s * std::sin(0.5 * xi), -std::cos(0.5 * xi), 0.0);
  return std::atan2(r.dot(e), r.z());
}

Policy to_policy(const TypeIExtremal& e, double u_max) {
  Policy p;
  double u = e.sign_first * u_max;
  p.segments.push_back({u, e.dt_first});
  for (int i = 1; i < e.n; ++i) {
    u = -u;
    p.segments.push_back({u, e.dt_interior});
  }
  if (e.n >= 1) p.segments.push_back({-u, e.dt_last});
  return p;
}

Policy to_policy(const TypeIIAnsatz& e, double u_max) {
  Policy p;
  p.segments.push_back({e.sign_open * u_max, e.dt_open});
  p.segments.push_back({0.0, e.dt_sing});
  p.segments.push_back({e.sign_close * u_max, e.dt_close});
  return p;
}

int coarse_n_max(double u_max) { return int(std::floor(kPi / std::atan(u_max))); }

// ---------------------------------------------------------------- type I

namespace {

struct Residual {
  const Problem& pr;
  int n, s;
  Eigen::Vector2d operator()(double theta, double gamma) const {
    const double um = pr.u_max;
    const Angles a = geometry_angles(theta, um);
    const int up1 = -s;
    const int upn = (n % 2 == 0) ? s : -s;
    const Vec3 r1 = corner_locus(gamma, a.xi, up1);
    const Vec3 rn = corner_locus(gamma + (n - 1) * a.eta, a.xi, upn);
    const Vec3 n1 = rotation_axis(s * um).first;
    const Vec3 nn = rotation_axis(upn * um).first;
    return {n1.dot(pr.r0 - r1), nn.dot(pr.o - rn)};
  }
};

std::optional<Eigen::Vector2d> newton(const Residual& F, Eigen::Vector2d x) {
  Eigen::Vector2d f = F(x[0], x[1]);
  for (int it = 0; it < 60; ++it) {
    if (f.norm() < 1e-14) return x;
    Eigen::Matrix2d J;
    const double h = 1e-7;
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      if (j == 0) {
        xp[0] = std::min(xp[0], 2 * kPi);
        xm[0] = std::max(xm[0], 0.0);
      }
      J.col(j) = (F(xp[0], xp[1]) - F(xm[0], xm[1])) / (xp[j] - xm[j]);
    }
    const Eigen::Vector2d step = J.fullPivLu().solve(-f);
    if (!step.allFinite()) return std::nullopt;
    double lam = 1.0;
    bool moved = false;
    for (int b = 0; b < 40; ++b, lam *= 0.5) {
      Eigen::Vector2d xn = x + lam * step;
      if (xn[0] < kPi || xn[0] > 2 * kPi) continue;
      xn[1] = wrap_pi(xn[1]);
      const Eigen::Vector2d fn = F(xn[0], xn[1]);
      if (fn.norm() < f.norm()) {
        x = xn;
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (f.norm() < 1e-11) return x;
  return std::nullopt;
}

// Picks the adjoint orientation that makes the bang arcs consistent.
std::optional<Candidate> adjoint_check(const Problem& pr, Candidate c, const Vec3& w1_dir,
                                       int corner_index) {
  // propagate w from corner 1 to T along the policy tail
  for (double k : {1.0, -1.0}) {
    Vec3 w = k * w1_dir;
    double tau = 0.0;
    for (std::size_t i = 0; i < c.policy.size(); ++i) {
      const Segment& s = c.policy.segments[i];
      if (int(i) >= corner_index) w = propagate_segment(w, s);
      tau += s.dt;
    }
    c.aT = w.cross(pr.o);
    const auto d = extremal_check(pr, c.policy, c.aT);
    if (d.extremal() && !d.degenerate) return c;
  }
  return std::nullopt;
}

std::vector<Candidate> kinematic_type1(const Problem& pr, int n, int s, const SynthesisOptions& opt) {
  std::vector<Candidate> out;
  const double um = pr.u_max, al = pr.alpha(), loop = loop_time(um);
  if (n == 0) {
    const Vec3 nu = rotation_axis(s * um).first;
    if (std::abs(nu.dot(pr.r0 - pr.o)) > 1e-10) return out;
    Candidate c;
    c.kind = Kind::TypeI;
    c.kinematic = true;
    c.one.sign_first = s;
    c.one.dt_first = arc_time(pr.r0, pr.o, s * um);
    c.policy.segments.push_back({s * um, c.one.dt_first});
    c = finish(pr, c);
    // any adjoint orthogonal to r0 whose z part keeps the sign of u works
    const Vec3 base = (Vec3::UnitZ() - pr.r0 * pr.r0.z());
    if (base.norm() < 1e-12) return out;
    for (int k = 0; k < 16; ++k) {
      const Vec3 w0 = rotate(pr.r0, kPi * k / 8.0, base.normalized());
      const Vec3 wT = propagate(w0, c.policy);
      c.aT = wT.cross(pr.o);
      if (extremal_check(pr, c.policy, c.aT).extremal()) {
        out.push_back(c);
        break;
      }
    }
    return out;
  }

  const Residual F{pr, n, s};
  std::vector<Eigen::Vector2d> roots;
  const int N = std::max(opt.seeds, 2);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double th = kPi + kPi * (i + 0.5) / N;
      const double ga = -kPi + 2 * kPi * j / N;
      auto r = newton(F, {th, ga});
      if (!r) continue;
      bool dup = false;
      for (const auto& q : roots)
        if (std::abs(q[0] - (*r)[0]) < 1e-8 && std::abs(wrap_pi(q[1] - (*r)[1])) < 1e-8) dup = true;
      if (!dup) roots.push_back(*r);
    }
  }
  for (const auto& x : roots) {
    const double theta = x[0], gamma = x[1];
    const Angles a = geometry_angles(theta, um);
    TypeIExtremal e;
    e.sign_first = s;
    e.n = n;
    e.theta = theta;
    e.gamma1 = gamma;
    e.xi = a.xi;
    e.eta = a.eta;
    e.dt_interior = 0.5 * theta * std::cos(al);
    const int upn = (n % 2 == 0) ? s : -s;
    const Vec3 r1 = corner_locus(gamma, a.xi, -s);
    const Vec3 rn = corner_locus(gamma + (n - 1) * a.eta, a.xi, upn);
    e.dt_first = arc_time(pr.r0, r1, s * um);
    e.dt_last = arc_time(rn, pr.o, upn * um);
    // arcs of a full period or more carry removable loops
    if (e.dt_first >= loop - 1e-12 || e.dt_last >= loop - 1e-12) continue;
    if (n >= 2 && (e.dt_first > e.dt_interior + 1e-9 || e.dt_last > e.dt_interior + 1e-9)) continue;
    Candidate c;
    c.kind = Kind::TypeI;
    c.kinematic = true;
    c.one = e;
    c.policy = to_policy(e, um);
    c = finish(pr, c);
    if (c.endpoint_residual > 1e-9) continue;
    Vec3 w1(-r1.y(), r1.x(), 0.0);
    if (w1.norm() < 1e-14) continue;
    auto ok = adjoint_check(pr, c, w1.normalized(), 1);
    if (ok) out.push_back(*ok);
  }
  return out;
}

// FixedT: stationary points of J at the prescribed T by shooting in dt_first.
std::vector<Candidate> fixed_type1(const Problem& pr, int n, int s, const SynthesisOptions& opt) {
  std::vector<Candidate> out;
  const double um = pr.u_max, T = pr.T, loop = loop_time(um), al = pr.alpha();
  auto accept = [&](Candidate c) {
    c.aT = pr.o;
    c = finish(pr, c);
    const auto d = extremal_check(pr, c.policy, c.aT);
    if (d.extremal() && !d.degenerate) out.push_back(c);
  };
  if (n == 0) {
    Candidate c;
    c.one.sign_first = s;
    c.one.dt_first = T;
    c.policy.segments.push_back({s * um, T});
    accept(c);
    return out;
  }
  struct Shot {
    Chain ch;
    double dl;
    Vec3 wT, rT;
  };
  auto shoot = [&](double dt1) -> std::optional<Shot> {
    const Vec3 r1 = propagate_segment(pr.r0, {s * um, dt1});
    Vec3 w1(-r1.y(), r1.x(), 0.0);
    if (w1.norm() < 1e-14) return std::nullopt;
    w1.normalize();
    if (sgn(w1.y()) != -s) w1 = -w1;
    Shot sh{walk(r1, w1, -s * um, n), 0.0, {}, {}};
    sh.dl = T - dt1 - (n - 1) * sh.ch.dt_interior;
    if (sh.dl < 0 || !std::isfinite(sh.dl)) return std::nullopt;
    sh.rT = propagate_segment(sh.ch.r_end, {sh.ch.last_u, sh.dl});
    sh.wT = propagate_segment(sh.ch.w_end, {sh.ch.last_u, sh.dl});
    return sh;
  };
  auto g = [&](double dt1) {
    auto sh = shoot(dt1);
    return sh ? pr.o.dot(sh->wT) : NAN;
  };
  const double hi = std::min(loop, T);
  for (double dt1 : bracket_roots(g, 0.0, hi, opt.shoot_grid)) {
    auto sh = shoot(dt1);
    if (!sh) continue;
    Candidate c;
    c.one.sign_first = s;
    c.one.n = n;
    c.one.dt_first = dt1;
    c.one.dt_interior = sh->ch.dt_interior;
    c.one.dt_last = sh->dl;
    c.one.theta = 2.0 * sh->ch.dt_interior / std::cos(al);
    if (c.one.theta > 0 && c.one.theta < 2 * kPi) {
      const Angles a = geometry_angles(c.one.theta, um);
      c.one.xi = a.xi;
      c.one.eta = a.eta;
      c.one.gamma1 = corner_gamma(sh->ch.corners.front(), a.xi, -s);
    }
    c.policy = to_policy(c.one, um);
    accept(c);
  }
  return out;
}

}  // namespace

std::vector<Candidate> synthesize_type1(const Problem& pr, int n, int s, const SynthesisOptions& opt) {
  if (n < 0 || (s != 1 && s != -1)) throw InputError("bad type I request");
  return pr.mode == Mode::FixedT ? fixed_type1(pr, n, s, opt) : kinematic_type1(pr, n, s, opt);
}

std::vector<Candidate> synthesize_stationary(const Problem& pr, int n, int s, const SynthesisOptions& opt) {
  std::vector<Candidate> out;
  const double um = pr.u_max, loop = loop_time(um), al = pr.alpha();
  const double half = 0.5 * kPi * std::cos(al);
  auto accept = [&](Candidate c) {
    c.aT = pr.o;
    c = finish(pr, c);
    if (c.J > 1.0 - 1e-9) return;
    const auto d = extremal_check(pr, c.policy, c.aT);
    if (!d.extremal() || d.degenerate) return;
    if (std::abs(d.K_mean) > 1e-8 * std::max(1.0, d.commutator_norm)) return;
    for (const auto& q : out)
      if (same_policy(q.policy, c.policy)) return;
    out.push_back(c);
  };
  if (n == 0) {
    auto g = [&](double t) {
      const Vec3 r = propagate_segment(pr.r0, {s * um, t});
      return pontryagin_K(r, pr.o, s * um);
    };
    for (double t : bracket_roots(g, 1e-12, loop, opt.shoot_grid)) {
      Candidate c;
      c.one.sign_first = s;
      c.one.dt_first = t;
      c.policy.segments.push_back({s * um, t});
      accept(c);
    }
    return out;
  }
  // K = 0 forces c1 = 0: the first corner sits where r_y = 0 and every
  // interior arc is a quarter period.
  for (double t1 : orbit_crossings(pr.r0, s * um, Vec3::UnitY())) {
    if (t1 < 1e-12 || t1 > half + 1e-12) continue;
    const Vec3 r1 = propagate_segment(pr.r0, {s * um, t1});
    Vec3 w1 = r1.cross(Vec3::UnitY()).cross(r1);
    if (w1.norm() < 1e-14) continue;
    w1.normalize();
    if (sgn(w1.y()) != -s) w1 = -w1;
    const Chain ch = walk(r1, w1, -s * um, n);
    auto g = [&](double dl) {
      return pr.o.dot(propagate_segment(ch.w_end, {ch.last_u, dl}));
    };
    for (double dl : bracket_roots(g, 0.0, half, opt.shoot_grid / 4)) {
      // endpoint arcs at either end of the window are degenerate limits
      if (dl < 1e-9 || dl > half - 1e-9) continue;
      Candidate c;
      c.one.sign_first = s;
      c.one.n = n;
      c.one.dt_first = t1;
      c.one.dt_interior = half;
      c.one.dt_last = dl;
      c.one.theta = kPi;
      const Angles a = geometry_angles(kPi, um);
      c.one.xi = a.xi;
      c.one.eta = a.eta;
      c.one.gamma1 = corner_gamma(r1, a.xi, -s);
      c.policy = to_policy(c.one, um);
      accept(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------- type II

std::vector<Candidate> synthesize_type2(const Problem& pr, int so, int sc) {
  if ((so != 1 && so != -1) || (sc != 1 && sc != -1)) throw InputError("bad type II signs");
  std::vector<Candidate> out;
  const double um = pr.u_max;
  const Vec3 ex = Vec3::UnitX();
  std::vector<double> t_open = orbit_crossings(pr.r0, so * um, ex);
  std::vector<double> t_close = orbit_crossings(pr.o, sc * um, ex, 0.0, true);
  if (std::abs(pr.r0.x()) < 1e-12 && !near_dup(t_open, 0.0, 1e-12)) t_open.insert(t_open.begin(), 0.0);
  if (std::abs(pr.o.x()) < 1e-12 && !near_dup(t_close, 0.0, 1e-12)) t_close.insert(t_close.begin(), 0.0);
  for (double t1 : t_open) {
    Vec3 r1 = propagate_segment(pr.r0, {so * um, t1});
    r1.x() = 0.0;
    r1.normalize();
    for (double t2 : t_close) {
      Vec3 r2 = propagate_segment(pr.o, {sc * um, -t2});
      r2.x() = 0.0;
      r2.normalize();
      double ang = std::atan2(r1.y() * r2.z() - r1.z() * r2.y(), r1.y() * r2.y() + r1.z() * r2.z());
      if (ang < 0) ang += 2 * kPi;
      Candidate c;
      c.kind = Kind::TypeII;
      c.kinematic = true;
      c.two = {so, sc, t1, 0.5 * ang, t2};
      c.policy = to_policy(c.two, um);
      c = finish(pr, c);
      if (c.endpoint_residual > 1e-9) continue;
      // singular adjoint is kappa * e_x with kappa > 0
      const Vec3 wT = propagate_segment(ex, {sc * um, t2});
      c.aT = wT.cross(pr.o);
      const auto d = extremal_check(pr, c.policy, c.aT);
      if (!d.extremal() || d.degenerate) continue;
      out.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------- families

Policy expand_family(const Policy& base, double u_max, int k1, int k2,
                     const std::vector<double>& positions) {
  if (k1 < 0 || k2 < 0 || int(positions.size()) != k1 + k2)
    throw InvalidInsertionPoint("need one position per inserted loop");
  const double loop = loop_time(u_max);
  const double T = base.total_time();
  struct Ins {
    double tau;
    int sign;
  };
  std::vector<Ins> ins;
  for (int i = 0; i < k1 + k2; ++i) ins.push_back({positions[i], i < k1 ? 1 : -1});
  std::stable_sort(ins.begin(), ins.end(), [](const Ins& a, const Ins& b) { return a.tau < b.tau; });

  const double tol = 1e-12 * std::max(1.0, T);
  Policy out;
  std::size_t next = 0;
  double tau = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const Segment& s = base.segments[k];
    double start = tau;
    double left = s.dt;
    while (next < ins.size() && ins[next].tau <= tau + s.dt + tol) {
      const double t = ins[next].tau;
      const bool at_start = std::abs(t - tau) <= tol;
      const bool at_end = std::abs(t - (tau + s.dt)) <= tol;
      const bool corner_ok = (at_start && k > 0) || (at_end && k + 1 < base.size());
      const bool singular_inside = s.u == 0.0 && t > tau && t < tau + s.dt;
      if (!corner_ok && !singular_inside) throw InvalidInsertionPoint("not a corner or singular interior");
      if (at_end && !singular_inside && k + 1 < base.size()) break;  // handled at next segment start
      const double part = std::clamp(t - start, 0.0, left);
      if (part > 0) out.segments.push_back({s.u, part});
      out.segments.push_back({ins[next].sign * u_max, loop});
      start += part;
      left -= part;
      ++next;
    }
    if (left > 0) out.segments.push_back({s.u, left});
    tau += s.dt;
  }
  if (next != ins.size()) throw InvalidInsertionPoint("position outside the policy");
  return out;
}

// ---------------------------------------------------------------- enumeration

bool same_policy(const Policy& a, const Policy& b, double tol) {
  const Policy ca = canonical(a, 1e-12), cb = canonical(b, 1e-12);
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (std::abs(ca.segments[i].u - cb.segments[i].u) > 1e-12 * std::max(1.0, std::abs(ca.segments[i].u)))
      return false;
    if (std::abs(ca.segments[i].dt - cb.segments[i].dt) > tol) return false;
  }
  return true;
}

std::vector<Symmetry> problem_symmetries(const Problem& pr, double tol) {
  const std::vector<Symmetry> all = {
      {"Rx(pi)", Vec3(1, -1, -1).asDiagonal(), false, true},
      {"Ry(pi)", Vec3(-1, 1, -1).asDiagonal(), true, false},
      {"Rz(pi)", Vec3(-1, -1, 1).asDiagonal(), true, true},
      {"Mx", Vec3(-1, 1, 1).asDiagonal(), false, true},
      {"My", Vec3(1, -1, 1).asDiagonal(), true, false},
      {"Mz", Vec3(1, 1, -1).asDiagonal(), true, true},
  };
  std::vector<Symmetry> out;
  for (const auto& s : all) {
    const Vec3 a = s.g * pr.r0, b = s.g * pr.o;
    const bool ok = s.reversal ? ((a - pr.o).norm() < tol && (b - pr.r0).norm() < tol)
                               : ((a - pr.r0).norm() < tol && (b - pr.o).norm() < tol);
    if (ok) out.push_back(s);
  }
  return out;
}

Policy apply_symmetry(const Symmetry& s, const Policy& p) {
  Policy q = s.reversal ? reversed(p) : p;
  if (s.flip_u)
    for (auto& seg : q.segments) seg.u = -seg.u;
  return q;
}

namespace {

// representative preference inside a twin group
double rep_score(const Candidate& c) {
  if (c.kind == Kind::TypeI) return (c.one.dt_first - c.one.dt_last) * 10.0 + (c.one.sign_first > 0 ? 1e-3 : 0.0);
  if (c.kind == Kind::TypeII) return (c.two.dt_open - c.two.dt_close) * 10.0 + (c.two.sign_open > 0 ? 1e-3 : 0.0);
  return 0.0;
}

}  // namespace

std::vector<Candidate> enumerate_candidates(const Problem& pr, const SynthesisOptions& opt) {
  std::vector<Candidate> all;
  if ((pr.r0 - pr.o).norm() < 1e-12 && pr.mode == Mode::TimeOptimal) {
    Candidate c;
    c.kind = Kind::TypeI;
    c.kinematic = true;
    c.J = 1.0;
    c.aT = pr.o;
    all.push_back(c);
    return all;
  }
  const int nmax = pr.mode == Mode::FixedT ? opt.fixed_n_cap : (opt.n_max >= 0 ? opt.n_max : coarse_n_max(pr.u_max));
  struct Job {
    int what, n, s, s2;
  };
  std::vector<Job> jobs;
  for (int s : {1, -1})
    for (int n = 0; n <= nmax; ++n) jobs.push_back({0, n, s, 0});
  if (pr.mode == Mode::TimeOptimal) {
    for (int s : {1, -1})
      for (int n = 0; n <= nmax; ++n) jobs.push_back({1, n, s, 0});
    for (int s : {1, -1})
      for (int s2 : {1, -1}) jobs.push_back({2, 0, s, s2});
  }
  auto parts = parallel_map<std::vector<Candidate>>(jobs.size(), opt.threads, [&](std::size_t i) {
    const Job& j = jobs[i];
    if (j.what == 0) return synthesize_type1(pr, j.n, j.s, opt);
    if (j.what == 1) return synthesize_stationary(pr, j.n, j.s, opt);
    return synthesize_type2(pr, j.s, j.s2);
  });
  for (auto& v : parts)
    for (auto& c : v) {
      bool dup = false;
      for (const auto& q : all)
        if (same_policy(q.policy, c.policy)) dup = true;
      if (!dup) all.push_back(std::move(c));
    }

  if (opt.merge_twins) {
    const auto syms = problem_symmetries(pr);
    std::vector<bool> gone(all.size(), false);
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (gone[i]) continue;
      std::vector<std::size_t> group{i};
      for (const auto& s : syms) {
        const Policy img = apply_symmetry(s, all[i].policy);
        for (std::size_t j = i + 1; j < all.size(); ++j)
          if (!gone[j] && std::find(group.begin(), group.end(), j) == group.end() &&
              same_policy(img, all[j].policy))
            group.push_back(j);
      }
      if (group.size() == 1) continue;
      std::size_t best = group[0];
      for (auto g : group)
        if (rep_score(all[g]) > rep_score(all[best]) + 1e-12) best = g;
      for (auto g : group) gone[g] = g != best;
      all[best].twins = int(group.size()) - 1;
    }
    std::vector<Candidate> kept;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (!gone[i]) kept.push_back(std::move(all[i]));
    all = std::move(kept);
  }
  std::stable_sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (std::abs(a.J - b.J) > 1e-9) return a.J > b.J;
    return a.T < b.T;
  });
  return all;
}

std::string describe(const Candidate& c) {
  char buf[256];
  if (c.kind == Kind::TypeI) {
    const auto& e = c.one;
    if (e.n == 0)
      std::snprintf(buf, sizeof buf, "I(%c,0,%.4f) J=%.6f T=%.4f", e.sign_first > 0 ? '+' : '-', e.dt_first,
                    c.J, c.T);
    else
      std::snprintf(buf, sizeof buf, "I(%c,%d,%.4f,%.4f,%.4f) J=%.6f T=%.4f", e.sign_first > 0 ? '+' : '-', e.n,
                    e.dt_first, e.dt_interior, e.dt_last, c.J, c.T);
  } else if (c.kind == Kind::TypeII) {
    const auto& e = c.two;
    std::snprintf(buf, sizeof buf, "II(%c,%c,%.4f,%.4f,%.4f) J=%.6f T=%.4f", e.sign_open > 0 ? '+' : '-',
                  e.sign_close > 0 ? '+' : '-', e.dt_open, e.dt_sing, e.dt_close, c.J, c.T);
  } else {
    std::snprintf(buf, sizeof buf, "numeric(%zu segments) J=%.6f T=%.4f", c.policy.size(), c.J, c.T);
  }
  return buf;
}

}  // namespace lz
