#include "lz/scan.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lz/errors.hpp"
#include "lz/parallel.hpp"

namespace lz {

Policy to_policy(const GridPolicy& g) {
  Policy p;
  const double dt = g.bin();
  for (double u : g.u) p.segments.push_back({u, dt});
  return canonical(p);
}

GridPolicy discretize(const Policy& p, int bins, double T) {
  GridPolicy g{T, std::vector<double>(bins, 0.0)};
  if (bins <= 0 || T <= 0) return g;
  const double dt = T / bins;
  double t0 = 0.0;
  for (const auto& s : p.segments) {
    const double a = t0, b = std::min(t0 + s.dt, T);
    t0 += s.dt;
    if (b <= a) continue;
    int k = std::clamp(int(a / dt), 0, bins - 1);
    for (; k < bins && k * dt < b; ++k) {
      const double lo = std::max(a, k * dt), hi = std::min(b, (k + 1) * dt);
      if (hi > lo) g.u[k] += s.u * (hi - lo) / dt;
    }
  }
  return g;
}

namespace {

// Derivative of R(u, dt) v with respect to u.
Vec3 rotation_du(double u, double dt, const Vec3& v) {
  const double s = std::sqrt(1.0 + u * u);
  const Vec3 n = Vec3(1.0, 0.0, u) / s;
  const Vec3 dn = (Vec3::UnitZ() - n * (u / s)) / s;
  const double th = 2.0 * s * dt, dth = 2.0 * dt * u / s;
  const double c = std::cos(th), sn = std::sin(th);
  const double nv = n.dot(v);
  return -v * sn * dth + dn.cross(v) * sn + n.cross(v) * c * dth + dn * nv * (1 - c) + n * dn.dot(v) * (1 - c) +
         n * nv * sn * dth;
}

}  // namespace

double grid_J(const Problem& pr, const GridPolicy& g) {
  Vec3 r = pr.r0;
  const double dt = g.bin();
  for (double u : g.u) r = propagate_segment(r, {u, dt});
  return r.dot(pr.o);
}

std::vector<double> grid_gradient(const Problem& pr, const GridPolicy& g) {
  const std::size_t N = g.u.size();
  const double dt = g.bin();
  std::vector<Vec3> rs(N + 1);
  rs[0] = pr.r0;
  for (std::size_t k = 0; k < N; ++k) rs[k + 1] = propagate_segment(rs[k], {g.u[k], dt});
  std::vector<double> grad(N);
  Vec3 a = pr.o;
  for (std::size_t k = N; k-- > 0;) {
    grad[k] = a.dot(rotation_du(g.u[k], dt, rs[k]));
    a = propagate_segment(a, {g.u[k], -dt});
  }
  return grad;
}

AscentResult gradient_local_search(const Problem& pr, const GridPolicy& start, const AscentOptions& opt) {
  AscentResult res;
  GridPolicy g = start;
  const double um = pr.u_max;
  for (auto& u : g.u) u = std::clamp(u, -um, um);
  double J = grid_J(pr, g);
  double step = 1.0;
  int it = 0, stall = 0;
  for (; it < opt.max_iter; ++it) {
    const auto grad = grid_gradient(pr, g);
    // projected gradient: drop components pushing through an active bound
    double pg = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const bool blocked = (g.u[k] >= um && grad[k] > 0) || (g.u[k] <= -um && grad[k] < 0);
      if (!blocked) pg += grad[k] * grad[k];
    }
    if (std::sqrt(pg) < opt.grad_tol) break;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      GridPolicy x = g;
      for (std::size_t k = 0; k < grad.size(); ++k) x.u[k] = std::clamp(g.u[k] + step * grad[k], -um, um);
      const double Jx = grid_J(pr, x);
      double dec = 0.0;
      for (std::size_t k = 0; k < grad.size(); ++k) dec += grad[k] * (x.u[k] - g.u[k]);
      if (Jx >= J + 1e-4 * dec && Jx >= J) {
        moved = Jx > J || dec > 0;
        stall = Jx - J < 1e-15 ? stall + 1 : 0;
        g = std::move(x);
        J = Jx;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved || stall >= 50) break;
  }
  res.cap_reached = it >= opt.max_iter;
  res.iterations = it;
  res.policy = std::move(g);
  res.J = J;
  return res;
}

Policy escape_perfect_loop(const Policy& p, double um, Escape how, double slack) {
  const double loop = loop_time(um);
  const Policy c = canonical(p);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto& s = c.segments[k];
    if (std::abs(std::abs(s.u) - um) > 1e-12 * std::max(1.0, um) || s.dt < loop - slack - 1e-12) continue;
    Policy out;
    out.segments.assign(c.segments.begin(), c.segments.begin() + k);
    const double flip = std::min(loop, s.dt);
    if (how == Escape::SignInversion) out.segments.push_back({-s.u, flip});
    if (how == Escape::Replace) out.segments.push_back({0.0, flip});
    if (s.dt > flip) out.segments.push_back({s.u, s.dt - flip});
    out.segments.insert(out.segments.end(), c.segments.begin() + k + 1, c.segments.end());
    return out;
  }
  throw NoLoopFound("no bang arc holds a complete loop");
}

Fingerprint fingerprint(const GridPolicy& g, double um, double thr) {
  Fingerprint f;
  const double dt = g.bin();
  for (double u : g.u) {
    double v = u;
    char ch = '~';
    if (std::abs(u - um) <= thr * um) ch = '+', v = um;
    else if (std::abs(u + um) <= thr * um) ch = '-', v = -um;
    else if (std::abs(u) <= thr * um) ch = '0', v = 0.0;
    if (ch == '~') f.clean = false;
    if (!f.structure.empty() && f.structure.back() == ch && (ch != '~' || f.arcs.segments.back().u == u))
      f.arcs.segments.back().dt += dt;
    else {
      f.structure.push_back(ch);
      f.arcs.segments.push_back({v, dt});
    }
  }
  return f;
}

double default_scan_time(double um) { return 4.0 * kPi * kPi / std::atan(um); }

namespace {

ScanOutcome run_start(const Problem& base, std::size_t pi, std::size_t si, const ScanConfig& cfg) {
  ScanOutcome o;
  o.problem = pi;
  o.start = si;
  Problem pr = base;
  pr.mode = Mode::FixedT;
  pr.T = cfg.T ? *cfg.T : default_scan_time(pr.u_max);
  o.T = pr.T;
  std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ull * (pi + 1) + 0xBF58476D1CE4E5B9ull * (si + 1));
  std::uniform_real_distribution<double> U(-pr.u_max, pr.u_max);
  GridPolicy g{pr.T, std::vector<double>(cfg.bins)};
  for (auto& u : g.u) u = U(rng);
  o.J_start = grid_J(pr, g);
  const double loop = loop_time(pr.u_max);
  const double slack = 2.0 * g.bin();
  for (;;) {
    const AscentResult a = gradient_local_search(pr, g, cfg.ascent);
    o.iterations += a.iterations;
    o.cap_reached = o.cap_reached || a.cap_reached;
    g = a.policy;
    o.J_final = a.J;
    if (a.J >= 1.0 - cfg.global_tol) {
      o.global = true;
      break;
    }
    const Fingerprint fp = fingerprint(g, pr.u_max);
    bool looped = false;
    for (const auto& s : fp.arcs.segments)
      if (std::abs(s.u) == pr.u_max && s.dt >= loop - slack) looped = true;
    if (!looped || o.escapes >= cfg.max_escapes) {
      o.perfect_loop = o.perfect_loop || looped;
      break;
    }
    o.perfect_loop = true;
    ++o.escapes;
    g = discretize(escape_perfect_loop(fp.arcs, pr.u_max, cfg.escape, slack), cfg.bins, pr.T);
  }
  o.converged = g;
  const Fingerprint fp = fingerprint(g, pr.u_max);
  o.structure = fp.structure;
  if (o.global) {
    o.category = Category::GloballyOptimal;
  } else {
    o.self_crossings = self_intersection(pr, to_policy(g), 8).size();
    if (o.perfect_loop)
      o.category = Category::PerfectLoop;
    else if (o.self_crossings > 0)
      o.category = Category::LoopTrap;
    else if (fp.structure.find('0') != std::string::npos)
      o.category = Category::TopologicalTrap;
    else
      o.category = Category::DeadlockTrap;
  }
  return o;
}

}  // namespace

ScanReport scan(const std::vector<Problem>& problems, const ScanConfig& cfg) {
  if (cfg.num_starts < 1) throw InputError("num_starts must be at least 1");
  if (cfg.T && *cfg.T < 0) throw InputError("scan time must be non-negative");
  const std::size_t S = cfg.num_starts;
  ScanReport rep;
  rep.outcomes = parallel_map<ScanOutcome>(problems.size() * S, cfg.threads, [&](std::size_t j) {
    return run_start(problems[j / S], j / S, j % S, cfg);
  });
  for (const auto& o : rep.outcomes) {
    ++rep.counts[to_string(o.category)];
    if (!o.global && o.category != Category::PerfectLoop) ++rep.non_simple_traps;
  }
  if (!rep.outcomes.empty()) rep.trap_rate = double(rep.non_simple_traps) / double(rep.outcomes.size());
  return rep;
}

std::vector<Problem> random_problems(int n, double um, std::uint64_t seed, Mode mode, double T) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  auto draw = [&] {
    Vec3 v;
    do v = Vec3(N(rng), N(rng), N(rng));
    while (v.norm() < 1e-6);
    return v;
  };
  std::vector<Problem> out;
  for (int i = 0; i < n; ++i) {
    const Vec3 a = draw(), b = draw();
    out.push_back(make_problem(a, b, um, mode, T));
  }
  return out;
}

}  // namespace lz
