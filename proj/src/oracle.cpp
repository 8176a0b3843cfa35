#include "lz/oracle.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lz/errors.hpp"
#include "lz/parallel.hpp"
#include "lz/pmp.hpp"

namespace lz {

namespace {

using Seq = std::vector<double>;

struct Sweep {
  std::vector<Vec3> rend;  // state at the end of every arc
  Vec3 end;
};

Sweep forward(const Vec3& r0, const Seq& us, const Eigen::VectorXd& d) {
  Sweep s;
  s.rend.resize(us.size());
  Vec3 r = r0;
  for (std::size_t k = 0; k < us.size(); ++k) s.rend[k] = r = propagate_segment(r, {us[k], d[k]});
  s.end = r;
  return s;
}

// d(v . r_end)/d d_k for every k.
Eigen::VectorXd backward(const Sweep& s, const Seq& us, const Eigen::VectorXd& d, Vec3 v) {
  Eigen::VectorXd g(us.size());
  for (std::size_t k = us.size(); k-- > 0;) {
    g[k] = pontryagin_K(s.rend[k], v, us[k]);
    v = propagate_segment(v, {us[k], -d[k]});
  }
  return g;
}

struct AugLag {
  const Seq* us;
  Vec3 r0, o, lambda;
  double mu;
  long long evals = 0;
};

void al_eval(const gsl_vector* z, AugLag* a, double* f, gsl_vector* grad) {
  const std::size_t L = a->us->size();
  Eigen::VectorXd d(L);
  for (std::size_t k = 0; k < L; ++k) d[k] = gsl_vector_get(z, k) * gsl_vector_get(z, k);
  const Sweep s = forward(a->r0, *a->us, d);
  const Vec3 c = s.end - a->o;
  ++a->evals;
  if (f) *f = d.sum() + a->lambda.dot(c) + 0.5 * a->mu * c.squaredNorm();
  if (grad) {
    const Eigen::VectorXd g = backward(s, *a->us, d, a->lambda + a->mu * c);
    for (std::size_t k = 0; k < L; ++k) gsl_vector_set(grad, k, 2.0 * gsl_vector_get(z, k) * (1.0 + g[k]));
  }
}

double al_f(const gsl_vector* z, void* p) {
  double f;
  al_eval(z, static_cast<AugLag*>(p), &f, nullptr);
  return f;
}
void al_df(const gsl_vector* z, void* p, gsl_vector* g) { al_eval(z, static_cast<AugLag*>(p), nullptr, g); }
void al_fdf(const gsl_vector* z, void* p, double* f, gsl_vector* g) { al_eval(z, static_cast<AugLag*>(p), f, g); }

// Minimum-norm Gauss-Newton steps onto the target.
bool polish(const Vec3& r0, const Vec3& o, const Seq& us, Eigen::VectorXd& d, double tol) {
  const std::size_t L = us.size();
  for (int it = 0; it < 30; ++it) {
    const Sweep s = forward(r0, us, d);
    const Vec3 c = s.end - o;
    if (c.norm() < tol) return true;
    Eigen::MatrixXd J(3, L);
    for (int i = 0; i < 3; ++i) J.row(i) = backward(s, us, d, Vec3::Unit(i)).transpose();
    for (std::size_t k = 0; k < L; ++k)
      if (d[k] <= 0.0) J.col(k).setZero();
    const Eigen::VectorXd step = J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-c);
    d += step;
    for (std::size_t k = 0; k < L; ++k) d[k] = std::max(d[k], 0.0);
  }
  return (forward(r0, us, d).end - o).norm() < tol;
}

struct Attempt {
  bool ok = false;
  double value = INFINITY;  // T for min-time, -J for fixed-T
  Policy policy;
  long long evals = 0;
};

Policy make_policy(const Seq& us, const Eigen::VectorXd& d) {
  Policy p;
  for (std::size_t k = 0; k < us.size(); ++k) p.segments.push_back({us[k], d[k]});
  return canonical(p);
}

Eigen::VectorXd seed_durations(const Seq& us, double um, double res, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double loop = loop_time(um);
  Eigen::VectorXd d(us.size());
  for (std::size_t k = 0; k < us.size(); ++k) {
    const double span = us[k] == 0.0 ? 0.5 * kPi : loop;
    d[k] = std::max(res, res * std::round(U(rng) * span / res));
  }
  return d;
}

Attempt min_time_attempt(const Problem& pr, const Seq& us, Eigen::VectorXd d, double feas) {
  const std::size_t L = us.size();
  AugLag a{&us, pr.r0, pr.o, Vec3::Zero(), 10.0};
  gsl_vector* z = gsl_vector_alloc(L);
  for (std::size_t k = 0; k < L; ++k) gsl_vector_set(z, k, std::sqrt(d[k]));
  gsl_multimin_function_fdf fn{al_f, al_df, al_fdf, L, &a};
  gsl_multimin_fdfminimizer* m = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, L);
  double prev = INFINITY;
  for (int outer = 0; outer < 12; ++outer) {
    gsl_multimin_fdfminimizer_set(m, &fn, z, 0.1, 0.1);
    for (int it = 0; it < 200; ++it) {
      if (gsl_multimin_fdfminimizer_iterate(m)) break;
      if (gsl_multimin_test_gradient(m->gradient, 1e-7) == GSL_SUCCESS) break;
    }
    gsl_vector_memcpy(z, m->x);
    for (std::size_t k = 0; k < L; ++k) d[k] = gsl_vector_get(z, k) * gsl_vector_get(z, k);
    const Vec3 c = forward(pr.r0, us, d).end - pr.o;
    a.lambda += a.mu * c;
    if (c.norm() > 0.25 * prev) a.mu *= 10.0;
    prev = c.norm();
    if (prev < 1e-8) break;
  }
  gsl_multimin_fdfminimizer_free(m);
  gsl_vector_free(z);
  Attempt at;
  at.evals = a.evals;
  if (!polish(pr.r0, pr.o, us, d, feas)) return at;
  at.ok = true;
  at.value = d.sum();
  at.policy = make_policy(us, d);
  return at;
}

void project_simplex(Eigen::VectorXd& d, double T) {
  std::vector<double> s(d.data(), d.data() + d.size());
  std::sort(s.rbegin(), s.rend());
  double acc = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += s[i];
    const double t = (acc - T) / double(i + 1);
    if (s[i] - t > 0) theta = t;
  }
  for (int i = 0; i < d.size(); ++i) d[i] = std::max(d[i] - theta, 0.0);
}

Attempt fixed_T_attempt(const Problem& pr, const Seq& us, Eigen::VectorXd d) {
  project_simplex(d, pr.T);
  auto J = [&](const Eigen::VectorXd& x) { return pr.o.dot(forward(pr.r0, us, x).end); };
  double f = J(d), step = 0.1;
  Attempt at;
  for (int it = 0; it < 3000; ++it) {
    const Sweep s = forward(pr.r0, us, d);
    const Eigen::VectorXd g = backward(s, us, d, pr.o);
    ++at.evals;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::VectorXd x = d + step * g;
      project_simplex(x, pr.T);
      const double fx = J(x);
      ++at.evals;
      if (fx >= f + 1e-4 * g.dot(x - d)) {
        moved = (x - d).norm() > 1e-14;
        d = x;
        f = fx;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  at.ok = true;
  at.value = -f;
  at.policy = make_policy(us, d);
  return at;
}

void add_no_repeat(std::vector<Seq>& out, const std::vector<double>& alphabet, int max_len) {
  std::vector<Seq> layer;
  for (double u : alphabet) layer.push_back({u});
  for (int len = 1; len <= max_len; ++len) {
    out.insert(out.end(), layer.begin(), layer.end());
    std::vector<Seq> next;
    for (const auto& s : layer)
      for (double u : alphabet)
        if (u != s.back()) {
          next.push_back(s);
          next.back().push_back(u);
        }
    layer.swap(next);
  }
}

OracleResult run(const Problem& pr, const OracleConfig& cfg, bool fixed) {
  const auto structures = oracle_structures(pr.u_max, cfg);
  const std::size_t R = std::max(1, cfg.restarts);
  const std::size_t jobs = structures.size() * R;
  auto attempts = parallel_map<Attempt>(jobs, cfg.threads, [&](std::size_t j) {
    const std::size_t si = j / R, ri = j % R;
    std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ull * (si + 1) + ri);
    const Seq& us = structures[si];
    const Eigen::VectorXd d = seed_durations(us, pr.u_max, cfg.resolution, rng);
    return fixed ? fixed_T_attempt(pr, us, d) : min_time_attempt(pr, us, d, cfg.feasibility);
  });
  OracleResult res;
  res.grid_resolution = cfg.resolution;
  res.restarts = int(R);
  res.structures = int(structures.size());
  const Attempt* best = nullptr;
  for (const auto& a : attempts) {
    res.iterations += a.evals;
    if (a.ok && (!best || a.value < best->value - 1e-12)) best = &a;
  }
  if (best) {
    res.reached = true;
    res.best_policy = best->policy;
    res.best_T = best->policy.total_time();
    res.best_J = performance_index(propagate(pr.r0, best->policy), pr.o);
  }
  return res;
}

}  // namespace

std::vector<std::vector<double>> oracle_structures(double um, const OracleConfig& cfg) {
  std::vector<Seq> out;
  add_no_repeat(out, {-um, 0.0, um}, cfg.max_len);
  const double al = std::atan(um);
  const int n_max = cfg.n_max >= 0 ? cfg.n_max : int(std::floor(kPi / al));
  for (int len = cfg.max_len + 1; len <= n_max + 1 + cfg.alt_extra; ++len)
    for (double s : {-1.0, 1.0}) {
      Seq q;
      for (int k = 0; k < len; ++k) q.push_back((k % 2 ? -s : s) * um);
      out.push_back(q);
    }
  if (cfg.paranoid) {
    std::vector<double> levels;
    for (int i = -5; i <= 5; ++i) levels.push_back(um * i / 5.0);
    std::vector<Seq> extra;
    add_no_repeat(extra, levels, cfg.paranoid_len);
    for (auto& q : extra) {
      const bool restricted = std::all_of(q.begin(), q.end(), [&](double u) { return u == 0.0 || std::abs(u) == um; });
      if (!restricted || int(q.size()) > cfg.max_len) out.push_back(q);
    }
  }
  return out;
}

OracleResult oracle_min_time(const Problem& pr, const OracleConfig& cfg) {
  if (pr.mode != Mode::TimeOptimal) throw InputError("oracle_min_time needs a time-optimal problem");
  if ((pr.r0 - pr.o).norm() < 1e-12) {
    OracleResult r;
    r.best_J = 1.0;
    r.reached = true;
    r.grid_resolution = cfg.resolution;
    return r;
  }
  OracleResult r = run(pr, cfg, false);
  if (!r.reached) throw TargetUnreached("no searched policy reaches the target");
  return r;
}

OracleResult oracle_max_J_fixed_T(const Problem& pr, const OracleConfig& cfg) {
  if (pr.mode != Mode::FixedT) throw InputError("oracle_max_J_fixed_T needs a fixed-T problem");
  if (pr.T <= 0.0) {
    OracleResult r;
    r.best_J = pr.r0.dot(pr.o);
    r.reached = true;
    r.grid_resolution = cfg.resolution;
    return r;
  }
  return run(pr, cfg, true);
}

}  // namespace lz
