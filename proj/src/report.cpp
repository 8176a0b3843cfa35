#include "lz/report.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "lz/errors.hpp"

namespace lz {

using nlohmann::json;

namespace {

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InputError(std::string(what) + " must be an array of three numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw InputError(std::string(what) + " must be an array of three numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

json vec_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_version(const json& j) {
  if (j.contains("format_version") && j["format_version"].get<int>() > kFormatVersion)
    throw InputError("unsupported format_version " + j["format_version"].dump());
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::TypeI: return "I";
    case Kind::TypeII: return "II";
    case Kind::Numeric: return "numeric";
  }
  return "?";
}

}  // namespace

Config load_config(const json& j) try {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  check_version(j);
  Config c;
  if (!j.contains("r0") || !j.contains("o") || !j.contains("u_max")) throw InputError("config needs r0, o and u_max");
  const Vec3 r0 = vec_from(j["r0"], "r0"), o = vec_from(j["o"], "o");
  const double um = j["u_max"].get<double>();
  Mode mode = Mode::TimeOptimal;
  const std::string m = j.value("mode", std::string("time-optimal"));
  if (m == "fixed-T" || m == "fixed_T" || m == "fixedT")
    mode = Mode::FixedT;
  else if (m != "time-optimal" && m != "time_optimal")
    throw InputError("unknown mode '" + m + "'");
  const double T = j.value("T", 0.0);
  if (mode == Mode::FixedT && !j.contains("T")) throw InputError("fixed-T mode needs T");
  c.problem = make_problem(r0, o, um, mode, T);
  c.name = j.value("name", std::string());

  const std::uint64_t seed = j.value("seed", std::uint64_t(20240611));
  c.oracle.seed = seed;
  c.scan.seed = seed;
  if (j.contains("threads")) set_threads(c, j["threads"].get<int>());
  if (j.contains("oracle")) {
    const json& q = j["oracle"];
    take(q, "restarts", c.oracle.restarts);
    take(q, "max_len", c.oracle.max_len);
    take(q, "n_max", c.oracle.n_max);
    take(q, "resolution", c.oracle.resolution);
    take(q, "feasibility", c.oracle.feasibility);
    take(q, "paranoid", c.oracle.paranoid);
    take(q, "paranoid_len", c.oracle.paranoid_len);
    if (c.oracle.resolution <= 0) throw InputError("oracle.resolution must be positive");
    c.classify.oracle_T_tol = 2.0 * c.oracle.resolution;
  }
  if (j.contains("synthesis")) {
    const json& s = j["synthesis"];
    take(s, "seeds", c.synthesis.seeds);
    take(s, "n_max", c.synthesis.n_max);
    take(s, "shoot_grid", c.synthesis.shoot_grid);
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    take(t, "J", c.classify.J_tol);
    take(t, "T", c.classify.T_tol);
    take(t, "oracle_T", c.classify.oracle_T_tol);
  }
  if (j.contains("scan")) {
    const json& s = j["scan"];
    if (s.contains("T")) c.scan.T = s["T"].get<double>();
    take(s, "num_starts", c.scan.num_starts);
    take(s, "bins", c.scan.bins);
    take(s, "max_iter", c.scan.ascent.max_iter);
    take(s, "grad_tol", c.scan.ascent.grad_tol);
    take(s, "max_escapes", c.scan.max_escapes);
    take(s, "problems", c.scan_problems);
    if (c.scan.num_starts < 1) throw InputError("scan.num_starts must be at least 1");
    if (c.scan.bins < 1) throw InputError("scan.bins must be at least 1");
    if (c.scan.T && *c.scan.T < 0) throw InputError("scan.T must be non-negative");
  }
  if (j.contains("family")) c.family = FamilyRequest{j["family"].value("k1", 0), j["family"].value("k2", 0)};
  return c;
} catch (const json::exception& e) {
  throw InputError(std::string("config: ") + e.what());
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return load_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<std::string> demo_names() { return {"fig9", "fig10", "fig2a", "fig11", "long"}; }

Config demo_config(const std::string& name) {
  json j;
  if (name == "fig9") {
    j = {{"u_max", 0.25}, {"r0", {1, 1, 0}}, {"o", {-1, 1, 0}}};
  } else if (name == "fig10") {
    j = {{"u_max", 8.0}, {"r0", {0.5, 0.5, 8}}, {"o", {1, 0, 8}}};
  } else if (name == "fig2a") {
    j = {{"u_max", 0.5}, {"r0", {0, 1, -0.5}}, {"o", {0, 1, 1}}};
  } else if (name == "fig11") {
    j = {{"u_max", 1.0}, {"r0", {1, 1, -1}}, {"o", {-1, 1, 1}}, {"family", {{"k1", 2}, {"k2", 1}}}};
  } else if (name == "long") {
    j = {{"u_max", 1.0}, {"r0", {0, 0, 1}}, {"o", {1, 0, 0}}, {"scan", {{"problems", 20}, {"num_starts", 10}}}};
  } else {
    throw InputError("unknown demo '" + name + "'");
  }
  j["name"] = name;
  return load_config(j);
}

void set_threads(Config& c, int threads) {
  if (threads < 0) throw InputError("threads must be non-negative");
  c.synthesis.threads = threads;
  c.oracle.threads = threads;
  c.scan.threads = threads;
}

json to_json(const Policy& p) {
  json segs = json::array();
  for (const auto& s : p.segments) segs.push_back({{"u", s.u}, {"dt", s.dt}});
  return {{"format_version", kFormatVersion}, {"segments", segs}};
}

Policy policy_from_json(const json& j) try {
  check_version(j);
  const json& segs = j.is_array() ? j : j.at("segments");
  Policy p;
  for (const auto& s : segs) {
    const double u = s.at("u").get<double>(), dt = s.at("dt").get<double>();
    if (!std::isfinite(u) || !std::isfinite(dt) || dt < 0) throw InputError("segment needs finite u and dt >= 0");
    p.segments.push_back({u, dt});
  }
  return p;
} catch (const json::exception& e) {
  throw InputError(std::string("policy: ") + e.what());
}

Policy load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return policy_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

namespace {

// The member of F[k1,k2] built on the fastest three-segment type II ansatz.
std::optional<Candidate> family_member(const Problem& pr, const FamilyRequest& f) {
  std::optional<Candidate> best;
  for (int a : {1, -1})
    for (int b : {1, -1})
      for (auto& c : synthesize_type2(pr, a, b))
        if (!best || c.T < best->T) best = c;
  if (!best) return std::nullopt;
  Candidate m = *best;
  const double at = best->two.dt_open;
  m.policy = expand_family(to_policy(best->two, pr.u_max), pr.u_max, f.k1, f.k2,
                           std::vector<double>(f.k1 + f.k2, at));
  m.T = m.policy.total_time();
  m.twins = 0;
  return m;
}

}  // namespace

SolveResult solve(const Config& c) {
  SolveResult r;
  r.problem = c.problem;
  spdlog::debug("synthesizing candidates");
  r.candidates = enumerate_candidates(c.problem, c.synthesis);
  if (c.family && c.problem.mode == Mode::TimeOptimal)
    if (auto m = family_member(c.problem, *c.family)) r.candidates.push_back(*m);
  spdlog::debug("{} candidates; running oracle", r.candidates.size());
  r.oracle = c.problem.mode == Mode::TimeOptimal ? oracle_min_time(c.problem, c.oracle)
                                                 : oracle_max_J_fixed_T(c.problem, c.oracle);
  spdlog::debug("oracle best T={} J={}", r.oracle.best_T, r.oracle.best_J);
  r.classification = classify(c.problem, r.candidates, r.oracle, c.classify);
  return r;
}

json to_json(const SolveResult& r) {
  const Problem& pr = r.problem;
  json cands = json::array();
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const Candidate& c = r.candidates[i];
    const ClassificationReport& rep = r.classification.reports[i];
    json d;
    d["descriptor"] = describe(c);
    d["kind"] = kind_name(c.kind);
    if (c.kind == Kind::TypeI) {
      d["sign"] = c.one.sign_first;
      d["n"] = c.one.n;
      d["dt_first"] = c.one.dt_first;
      d["dt_interior"] = c.one.dt_interior;
      d["dt_last"] = c.one.dt_last;
      d["theta"] = c.one.theta;
    } else if (c.kind == Kind::TypeII) {
      d["sign_open"] = c.two.sign_open;
      d["sign_close"] = c.two.sign_close;
      d["dt_open"] = c.two.dt_open;
      d["dt_sing"] = c.two.dt_sing;
      d["dt_close"] = c.two.dt_close;
    }
    d["durations"] = json::array();
    for (const auto& s : c.policy.segments) d["durations"].push_back(s.dt);
    d["policy"] = to_json(c.policy);
    d["J"] = c.J;
    d["T"] = c.T;
    d["kinematic"] = c.kinematic;
    d["twins"] = c.twins;
    d["category"] = to_string(rep.category);
    json diag;
    diag["K_mean"] = rep.pmp.K_mean;
    diag["K_spread"] = rep.pmp.K_spread;
    diag["kappa"] = rep.pmp.kappa;
    diag["extremal"] = rep.pmp.extremal() || rep.pmp.degenerate;
    diag["locally_optimal"] = rep.local.ok;
    if (!rep.local.reason.empty()) diag["reason"] = rep.local.reason;
    diag["hessian_eigenvalues"] = rep.local.hessian_eigs;
    if (rep.spectrum) {
      diag["q"] = rep.spectrum->q;
      diag["gamma"] = rep.spectrum->gamma;
      diag["eta"] = rep.spectrum->eta;
    }
    if (rep.qcrit) {
      diag["q_criterion"] = {{"pass", rep.qcrit->pass},
                             {"negatives", rep.qcrit->negatives},
                             {"negative_at_end", rep.qcrit->negative_at_end}};
      if (rep.qcrit->window_evaluated)
        diag["q_criterion"]["window"] = {rep.qcrit->window_lower, rep.qcrit->window_upper};
    }
    if (rep.corners) diag["corners"] = {{"needle", rep.corners->needle_ok}, {"box", rep.corners->box_ok}};
    diag["perfect_loops"] = rep.loops.loops;
    diag["self_crossings"] = rep.self_crossings;
    diag["notes"] = rep.notes;
    d["diagnostics"] = diag;
    cands.push_back(d);
  }
  const SwitchingBounds& b = r.classification.bounds;
  auto lim = [](int v) { return v == INT_MAX ? json(nullptr) : json(v); };
  json out;
  out["format_version"] = kFormatVersion;
  out["problem"] = {{"u_max", pr.u_max},
                    {"r0", vec_to(pr.r0)},
                    {"o", vec_to(pr.o)},
                    {"mode", pr.mode == Mode::TimeOptimal ? "time-optimal" : "fixed-T"},
                    {"T", pr.T},
                    {"alpha", pr.alpha()}};
  out["candidates"] = cands;
  out["optimum"] = r.classification.optimum == SIZE_MAX ? json(nullptr) : json(r.classification.optimum);
  out["bounds"] = {{"n_min_x", b.n_min_x},         {"n_min_z", b.n_min_z},
                   {"n_max_coarse", b.n_max_coarse}, {"n_max_ends", b.n_max_ends},
                   {"n_max_large_u", lim(b.n_max_large_u)}, {"n_max_refined", lim(b.n_max_refined)},
                   {"phi_x", b.phi_x},             {"phi_z", b.phi_z}};
  out["type_hint"] = to_string(b.type_hint);
  out["oracle"] = {{"best_T", r.oracle.best_T},
                   {"best_J", r.oracle.best_J},
                   {"best_policy", to_json(r.oracle.best_policy)},
                   {"grid_resolution", r.oracle.grid_resolution},
                   {"restarts", r.oracle.restarts},
                   {"structures", r.oracle.structures},
                   {"iterations", r.oracle.iterations},
                   {"reached", r.oracle.reached}};
  return out;
}

ScanReport run_scan(const Config& c) {
  std::vector<Problem> probs;
  if (c.scan_problems > 0)
    probs = random_problems(c.scan_problems, c.problem.u_max, c.scan.seed, Mode::FixedT);
  else
    probs = {c.problem};
  ScanConfig sc = c.scan;
  if (!sc.T && c.problem.mode == Mode::FixedT && c.scan_problems <= 0) sc.T = c.problem.T;
  return scan(probs, sc);
}

json to_json(const ScanReport& r, bool with_policies) {
  json out;
  out["format_version"] = kFormatVersion;
  json rows = json::array();
  for (const auto& o : r.outcomes) {
    json d = {{"problem", o.problem},
              {"start", o.start},
              {"T", o.T},
              {"J_start", o.J_start},
              {"J_final", o.J_final},
              {"iterations", o.iterations},
              {"cap_reached", o.cap_reached},
              {"perfect_loop", o.perfect_loop},
              {"escapes", o.escapes},
              {"global", o.global},
              {"category", to_string(o.category)},
              {"structure", o.structure},
              {"self_crossings", o.self_crossings}};
    if (with_policies) d["policy"] = o.converged.u;
    rows.push_back(d);
  }
  out["outcomes"] = rows;
  out["counts"] = r.counts;
  out["non_simple_traps"] = r.non_simple_traps;
  out["trap_rate"] = r.trap_rate;
  return out;
}

void write_trajectory_csv(std::ostream& os, const Problem& pr, const Policy& p, int per_segment) {
  const auto samples = propagate_policy(pr.r0, p, per_segment);
  // propagator columns at the same sample times give the costate a = U(t) U(T)^T o
  std::vector<std::vector<Sample>> cols;
  for (int i = 0; i < 3; ++i) cols.push_back(propagate_policy(Vec3::Unit(i), p, per_segment));
  auto U = [&](std::size_t k) {
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.col(i) = cols[i][k].r;
    return m;
  };
  const Vec3 aT0 = U(samples.size() - 1).transpose() * pr.o;
  os << "tau,u,rx,ry,rz,K,switching\n" << std::setprecision(17);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    const Vec3 a = U(k) * aT0;
    os << s.tau << ',';
    if (s.u) os << *s.u;
    os << ',' << s.r.x() << ',' << s.r.y() << ',' << s.r.z() << ',' << pontryagin_K(s.r, a, s.u.value_or(0.0)) << ','
       << switching_function(s.r, a) << '\n';
  }
}

void init_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("qoc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* v = std::getenv("QOC_LOG")) spdlog::set_level(spdlog::level::from_str(v));
}

}  // namespace lz
