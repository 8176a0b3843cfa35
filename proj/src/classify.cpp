#include "lz/classify.hpp"

#include <algorithm>
#include <cmath>

#include "lz/errors.hpp"

namespace lz {

double q_value(double gamma, double eta) {
  const double s = std::sin(gamma), c = std::cos(gamma);
  const double t = std::tan(0.5 * eta);
  return c * c / (s * s) - 1.0 / (t * t);
}

QSpectrum q_spectrum(const TypeIExtremal& e) {
  QSpectrum s;
  s.eta = e.eta;
  const double up1 = -e.sign_first;
  const double zeta1 = e.gamma1 + 0.5 * kPi * (1.0 - up1);
  for (int i = 0; i < e.n; ++i) {
    const double g = e.gamma1 + i * e.eta;
    s.gamma.push_back(g);
    s.q.push_back(q_value(g, e.eta));
    s.zeta.push_back(zeta1 + i * (kPi + e.eta));
  }
  return s;
}

QCriterion q_criterion(const std::vector<double>& q, const std::vector<double>& gamma, double eta) {
  QCriterion r;
  double min_abs = INFINITY;
  for (std::size_t i = 0; i < q.size(); ++i) {
    min_abs = std::min(min_abs, std::abs(q[i]));
    if (q[i] < 0) {
      ++r.negatives;
      r.negative_index = int(i);
    }
  }
  if (r.negatives > 1) r.pass = false;
  if (r.negatives == 1) {
    const int i = r.negative_index;
    r.pass = std::abs(q[i]) <= min_abs * (1 + 1e-12);
    r.negative_at_end = i == 0 || i + 1 == int(q.size());
    const double s = std::sin(0.5 * eta);
    const double arg = std::sqrt(s * s * (std::cos(eta) + 2.0));
    if (arg <= 1.0 && i < int(gamma.size())) {
      double g = std::fmod(gamma[i], kPi);
      if (g < 0) g += kPi;
      const double dg = g - 0.5 * kPi;
      r.window_evaluated = true;
      r.window_lower = dg > -0.5 * eta - std::acos(arg);
      r.window_upper = dg < 0.5 * eta + std::acos(arg);
    }
  }
  return r;
}

QCriterion q_criterion(const TypeIExtremal& e) {
  const QSpectrum s = q_spectrum(e);
  return q_criterion(s.q, s.gamma, s.eta);
}

SwitchingBounds switching_bounds(const Problem& pr) {
  SwitchingBounds b;
  const double al = pr.alpha(), um = pr.u_max;
  const Vec3 &r0 = pr.r0, &o = pr.o;
  b.phi_x = std::abs(std::asin(std::clamp(r0.x(), -1.0, 1.0)) - std::asin(std::clamp(o.x(), -1.0, 1.0)));
  b.phi_z = std::abs(std::asin(std::clamp(r0.z(), -1.0, 1.0)) - std::asin(std::clamp(o.z(), -1.0, 1.0)));
  b.n_min_x = std::max(0, int(std::ceil(b.phi_x / (2.0 * al) - 1.0 - 1e-12)));
  b.n_min_z = std::max(0, int(std::ceil(b.phi_z / (2.0 * std::atan(1.0 / um)) - 1.0 - 1e-12)));
  b.n_max_coarse = int(std::floor(kPi / al));
  b.n_max_ends = int(std::floor(kPi / (2.0 * al) + 1.0));
  if (um > std::sqrt(1.0 + std::sqrt(2.0))) b.n_max_large_u = 2;

  // refined bound: r+ is the endpoint with the larger |x|
  double rp = r0.x(), rm = o.x();
  if (std::abs(rm) > std::abs(rp)) std::swap(rp, rm);
  if (std::abs(rp) > 1e-12) {
    const double a_p = std::abs(2.0 * std::atan(um / rp));
    const double ac = std::acos(std::clamp(rm / rp, -1.0, 1.0));
    double bound;
    if (rm * rp <= 0.0) {
      const double a_m = std::abs(2.0 * std::atan(um / rm));  // rm = 0 gives pi
      bound = std::max(ac / a_p, kPi / a_m) + 1.0;
    } else {
      bound = std::min(ac / a_p + 3.0, kPi / (2.0 * a_p)) + 1.0;
    }
    b.n_max_refined = int(std::floor(bound + 1e-12));
  }
  if (b.phi_x > 4.0 * al)
    b.type_hint = TypeHint::ForceI;
  else if (b.phi_z > (kPi / (2.0 * al) + 2.0) * (kPi - 2.0 * al))
    b.type_hint = TypeHint::ForceII;
  return b;
}

namespace {

struct CornerPoint {
  Vec3 r;
  double u_minus;
};

std::vector<CornerPoint> bang_corners(const Problem& pr, const Policy& p) {
  std::vector<CornerPoint> out;
  Vec3 r = pr.r0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    r = propagate_segment(r, p.segments[k]);
    const double a = p.segments[k].u, b = p.segments[k + 1].u;
    if (a != 0.0 && b != 0.0 && a != b) out.push_back({r, a});
  }
  return out;
}

}  // namespace

CornerChecks corner_inequality_checks(const Problem& pr, const Candidate& c) {
  CornerChecks ch;
  const double lo = std::min({0.0, pr.r0.x(), pr.o.x()});
  const double hi = std::max({0.0, pr.r0.x(), pr.o.x()});
  for (const auto& cp : bang_corners(pr, canonical(c.policy))) {
    const bool nd = cp.u_minus * cp.r.x() * cp.r.y() >= -1e-12;
    const bool bx = cp.r.x() > lo && cp.r.x() < hi;
    ch.needle.push_back(nd);
    ch.box.push_back(bx);
    ch.needle_ok = ch.needle_ok && nd;
    ch.box_ok = ch.box_ok && bx;
  }
  return ch;
}

Equatorial equatorial_classification(const Vec3& rm, const Vec3& rp) {
  if (std::abs(rm.x()) > 1e-12 || std::abs(rp.x()) > 1e-12) throw NotEquatorial("endpoint off the x = 0 plane");
  if ((rm - rp).norm() < 1e-12) return Equatorial::TimeOptimal;
  return rm.y() * rp.y() > 0 && (rp.z() - rm.z()) * rm.y() > 0 ? Equatorial::TimeOptimal : Equatorial::Saddle;
}

bool interior_bang_filter(const Policy& p, double um) {
  const Policy c = canonical(p);
  const double loop = loop_time(um);
  for (std::size_t k = 1; k + 1 < c.size(); ++k)
    if (c.segments[k].u != 0.0 && c.segments[k].dt > loop * (1 + 1e-12)) return false;
  return true;
}

LoopFlag perfect_loop_detect(const Policy& p, double um) {
  LoopFlag f;
  const Policy c = canonical(p);
  const double loop = loop_time(um);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto& s = c.segments[k];
    if (std::abs(std::abs(s.u) - um) > 1e-12 * std::max(1.0, um)) continue;
    const int m = int(std::floor(s.dt / loop + 1e-9));
    if (m >= 1) {
      f.flagged = true;
      f.loops += m;
      f.segments.push_back(k);
    }
  }
  return f;
}

std::vector<Crossing> self_intersection(const std::vector<Sample>& tr) {
  std::vector<Crossing> out;
  const std::size_t N = tr.size();
  if (N < 4) return out;
  struct Chord {
    Vec3 a, b, n, mid;
    double half;
  };
  std::vector<Chord> ch(N - 1);
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const Vec3 &a = tr[k].r, &b = tr[k + 1].r;
    ch[k] = {a, b, a.cross(b), 0.5 * (a + b), 0.5 * (a - b).norm()};
  }
  auto inside = [](const Vec3& a, const Vec3& b, const Vec3& n, const Vec3& x) {
    return a.cross(x).dot(n) > 1e-15 && x.cross(b).dot(n) > 1e-15;
  };
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (ch[i].n.norm() < 1e-15) continue;
    for (std::size_t j = i + 2; j < ch.size(); ++j) {
      if (ch[j].n.norm() < 1e-15) continue;
      if ((ch[i].mid - ch[j].mid).norm() > ch[i].half + ch[j].half + 1e-12) continue;
      Vec3 L = ch[i].n.cross(ch[j].n);
      if (L.norm() < 1e-18) continue;
      L.normalize();
      for (double sg : {1.0, -1.0}) {
        const Vec3 x = sg * L;
        if (inside(ch[i].a, ch[i].b, ch[i].n, x) && inside(ch[j].a, ch[j].b, ch[j].n, x)) {
          // linear position along each chord for the reported times
          const double fa = (x - ch[i].a).norm() / std::max((ch[i].b - ch[i].a).norm(), 1e-300);
          const double fb = (x - ch[j].a).norm() / std::max((ch[j].b - ch[j].a).norm(), 1e-300);
          Crossing c;
          c.tau_a = tr[i].tau + fa * (tr[i + 1].tau - tr[i].tau);
          c.tau_b = tr[j].tau + fb * (tr[j + 1].tau - tr[j].tau);
          c.point = x;
          bool dup = false;
          for (const auto& q : out)
            if ((q.point - x).norm() < 1e-6) dup = true;
          if (!dup) out.push_back(c);
        }
      }
    }
  }
  return out;
}

std::vector<Crossing> self_intersection(const Problem& pr, const Policy& p, int per_arc) {
  return self_intersection(propagate_policy(pr.r0, canonical(p), per_arc));
}

// ------------------------------------------------------------ local tests

namespace {

// Gradient of v.r(T) with respect to every segment duration.
Eigen::VectorXd endpoint_gradient(const Vec3& r0, const Policy& p, const Vec3& v) {
  const std::size_t L = p.size();
  std::vector<Vec3> rend(L);
  Vec3 r = r0;
  for (std::size_t k = 0; k < L; ++k) rend[k] = r = propagate_segment(r, p.segments[k]);
  Eigen::VectorXd g(L);
  Vec3 a = v;
  for (std::size_t k = L; k-- > 0;) {
    g[k] = pontryagin_K(rend[k], a, p.segments[k].u);
    a = propagate_segment(a, {p.segments[k].u, -p.segments[k].dt});
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const Vec3& r0, const Policy& p, const Vec3& v) {
  const std::size_t L = p.size();
  Eigen::MatrixXd H(L, L);
  const double h = 1e-5;
  for (std::size_t j = 0; j < L; ++j) {
    Policy pp = p, pm = p;
    pp.segments[j].dt += h;
    pm.segments[j].dt -= h;
    H.col(j) = (endpoint_gradient(r0, pp, v) - endpoint_gradient(r0, pm, v)) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

// Switching-time problem: minimize the total time while keeping the endpoint.
LocalOptimality induced_min_time(const Problem& pr, const Policy& p) {
  LocalOptimality lo;
  lo.ok = true;
  const std::size_t L = p.size();
  if (L <= 2) return lo;
  Vec3 t1 = pr.o.unitOrthogonal();
  Vec3 t2 = pr.o.cross(t1);
  Eigen::MatrixXd J(2, L);
  J.row(0) = endpoint_gradient(pr.r0, p, t1).transpose();
  J.row(1) = endpoint_gradient(pr.r0, p, t2).transpose();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(L);
  const Eigen::Vector2d lam = J.transpose().colPivHouseholderQr().solve(ones);
  lo.kkt_residual = (J.transpose() * lam - ones).norm();
  const Vec3 v = lam[0] * t1 + lam[1] * t2;
  const Eigen::MatrixXd H = -fd_hessian(pr.r0, p, v);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  const Eigen::MatrixXd Z = svd.matrixV().rightCols(L - 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z.transpose() * H * Z);
  for (int i = 0; i < es.eigenvalues().size(); ++i) lo.hessian_eigs.push_back(es.eigenvalues()[i]);
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-6 * scale) {
    lo.ok = false;
    lo.reason = "switching-time Hessian indefinite";
  }
  return lo;
}

LocalOptimality induced_max_J(const Problem& pr, const Policy& p) {
  LocalOptimality lo;
  lo.ok = true;
  const Eigen::MatrixXd H = fd_hessian(pr.r0, p, pr.o);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  for (int i = 0; i < es.eigenvalues().size(); ++i) lo.hessian_eigs.push_back(es.eigenvalues()[i]);
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (es.eigenvalues().maxCoeff() > 1e-6 * scale) {
    lo.ok = false;
    lo.reason = "duration Hessian of J not negative";
  }
  return lo;
}

}  // namespace

LocalOptimality local_optimality(const Problem& pr, const Candidate& c) {
  const Policy p = canonical(c.policy);
  if (p.empty()) return {true, "", {}, 0.0};
  if (c.kind == Kind::Numeric) return {false, "numeric policy", {}, 0.0};
  if (!c.kinematic) return induced_max_J(pr, p);

  if (c.kind == Kind::TypeI) {
    const auto ch = corner_inequality_checks(pr, c);
    if (!ch.needle_ok) return {false, "needle corner inequality violated", {}, 0.0};
    if (c.one.n >= 1 && c.one.theta > 0 && c.one.theta < 2 * kPi && !q_criterion(c.one).pass)
      return {false, "q-criterion violated", {}, 0.0};
    return induced_min_time(pr, p);
  }
  // type II: locate the singular arc
  Vec3 r = pr.r0;
  for (const auto& s : p.segments) {
    const Vec3 r2 = propagate_segment(r, s);
    if (s.u == 0.0) {
      Vec3 a = r, b = r2;
      a.x() = b.x() = 0.0;  // both lie on x = 0 up to rounding
      if (equatorial_classification(a.normalized(), b.normalized()) != Equatorial::TimeOptimal)
        return {false, "singular arc crosses y = 0 or runs backwards", {}, 0.0};
      if (s.dt > 0.5 * kPi + 1e-12) return {false, "singular arc longer than pi/2", {}, 0.0};
    }
    r = r2;
  }
  if (!interior_bang_filter(p, pr.u_max)) return {false, "interior bang arc longer than a loop", {}, 0.0};
  return induced_min_time(pr, p);
}

const char* to_string(Category c) {
  switch (c) {
    case Category::GloballyOptimal: return "globally-optimal";
    case Category::DeadlockTrap: return "deadlock";
    case Category::LoopTrap: return "loop";
    case Category::TopologicalTrap: return "topological";
    case Category::PerfectLoop: return "perfect-loop";
    case Category::SaddlePoint: return "saddle";
    case Category::NotExtremal: return "not-extremal";
  }
  return "?";
}

const char* to_string(TypeHint h) {
  switch (h) {
    case TypeHint::ForceI: return "I";
    case TypeHint::ForceII: return "II";
    case TypeHint::Either: return "either";
  }
  return "?";
}

Classification classify(const Problem& pr, const std::vector<Candidate>& cands, const OracleResult& oracle,
                        const ClassifyOptions& opt) {
  Classification out;
  out.bounds = switching_bounds(pr);
  out.reports.resize(cands.size());
  std::vector<bool> viable(cands.size(), false);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Candidate& c = cands[i];
    auto& rep = out.reports[i];
    rep.index = i;
    rep.J = c.J;
    rep.T = c.T;
    if (c.kind != Kind::Numeric && !c.policy.empty()) rep.pmp = extremal_check(pr, c.policy, c.aT);
    rep.loops = perfect_loop_detect(c.policy, pr.u_max);
    if (c.kind == Kind::TypeI && c.one.n >= 1 && c.one.theta > 0 && c.one.theta < 2 * kPi) {
      rep.spectrum = q_spectrum(c.one);
      rep.qcrit = q_criterion(c.one);
    }
    if (c.kind == Kind::TypeI) rep.corners = corner_inequality_checks(pr, c);
    if (c.kind != Kind::Numeric && !c.policy.empty() && !rep.pmp.extremal() && !rep.pmp.degenerate) {
      rep.category = Category::NotExtremal;
      continue;
    }
    rep.local = local_optimality(pr, c);
    if (!rep.local.ok && !rep.loops.flagged) {
      rep.category = Category::SaddlePoint;
      rep.notes.push_back(rep.local.reason);
      continue;
    }
    viable[i] = true;
  }

  std::size_t best = SIZE_MAX;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!viable[i] || out.reports[i].loops.flagged) continue;
    if (best == SIZE_MAX || cands[i].J > cands[best].J + opt.J_tol ||
        (std::abs(cands[i].J - cands[best].J) <= opt.J_tol && cands[i].T < cands[best].T - opt.T_tol))
      best = i;
  }
  if (oracle.reached) {
    const bool j_gap = best == SIZE_MAX ? true : oracle.best_J > cands[best].J + opt.J_tol;
    const bool t_gap = best != SIZE_MAX && std::abs(oracle.best_J - cands[best].J) <= opt.J_tol &&
                       oracle.best_T < cands[best].T - opt.oracle_T_tol;
    if (j_gap || t_gap)
      throw OracleDisagreement("oracle improves on every synthesized candidate (J=" + std::to_string(oracle.best_J) +
                               ", T=" + std::to_string(oracle.best_T) + ")");
  }
  out.optimum = best;
  if (best == SIZE_MAX) return out;

  const Candidate& opt_c = cands[best];
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!viable[i]) continue;
    auto& rep = out.reports[i];
    const Candidate& c = cands[i];
    if (opt.intersections && !c.policy.empty()) rep.self_crossings = self_intersection(pr, c.policy).size();
    if (rep.loops.flagged) {
      rep.category = Category::PerfectLoop;
      continue;
    }
    const bool sameJ = std::abs(c.J - opt_c.J) <= opt.J_tol;
    const bool sameT = std::abs(c.T - opt_c.T) <= opt.T_tol;
    if (i == best || (sameJ && sameT)) {
      rep.category = Category::GloballyOptimal;
      continue;
    }
    if (!sameJ && c.J < opt_c.J) {
      rep.category = Category::DeadlockTrap;
      if (c.T > opt_c.T) rep.notes.push_back("longer than the optimum");
      continue;
    }
    if (c.kind != opt_c.kind) {
      rep.category = Category::TopologicalTrap;
      if (rep.self_crossings > 0) rep.notes.push_back("also self-intersecting");
      continue;
    }
    rep.category = Category::LoopTrap;
    if (rep.self_crossings == 0) rep.notes.push_back("no self-intersection found; labelled loop as the pessimistic tie-break");
  }
  return out;
}

}  // namespace lz
