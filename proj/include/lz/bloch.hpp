#pragma once
#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace lz {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Throws InputError on a (near) zero vector.
Vec3 unit(const Vec3& v);

struct Segment {
  double u = 0.0;
  double dt = 0.0;
};

struct Policy {
  std::vector<Segment> segments;

  double total_time() const;
  bool empty() const { return segments.empty(); }
  std::size_t size() const { return segments.size(); }
};

enum class Mode { TimeOptimal, FixedT };

struct Problem {
  Vec3 r0 = Vec3::UnitZ();
  Vec3 o = Vec3::UnitZ();
  double u_max = 1.0;
  Mode mode = Mode::TimeOptimal;
  double T = 0.0;  // only meaningful in FixedT mode

  double alpha() const;
};

Problem make_problem(const Vec3& r0, const Vec3& o, double u_max,
                     Mode mode = Mode::TimeOptimal, double T = 0.0);

// Unit axis (1,0,u)/|.| and angular rate 2*sqrt(1+u^2).
std::pair<Vec3, double> rotation_axis(double u);

// Right-handed rotation of v about a unit axis.
Vec3 rotate(const Vec3& axis, double angle, const Vec3& v);
Mat3 rotation_matrix(const Vec3& axis, double angle);

// dr/dtau = 2 h x r with h = (1,0,u). Negative dt runs backwards.
Vec3 propagate_segment(const Vec3& r, const Segment& s);
Vec3 propagate(const Vec3& r0, const Policy& p);
Mat3 segment_matrix(const Segment& s);

struct Sample {
  double tau = 0.0;
  std::optional<double> u;  // absent for the lone sample of an empty policy
  Vec3 r;
};

// per_segment >= 1 samples are emitted inside every segment, plus the
// segment end. First sample is (0, first u, r0).
std::vector<Sample> propagate_policy(const Vec3& r0, const Policy& p,
                                     int per_segment = 64);

double performance_index(const Vec3& rT, const Vec3& o);

// Full 2*pi period of a bang arc: pi*cos(alpha).
double loop_time(double u_max);

// Time to rotate a into b about n_u, in [0, period). Assumes a and b share the
// orbit; only the angle between their projections is used.
double arc_time(const Vec3& a, const Vec3& b, double u);

// Drops zero-length segments and merges equal neighbours.
Policy canonical(const Policy& p, double tol = 0.0);

Policy reversed(const Policy& p);

}  // namespace lz

namespace lz {

// Times t in [0, period) at which normal.(orbit point) == level, where the
// orbit starts at v and rotates under constant u (backwards if requested).
std::vector<double> orbit_crossings(const Vec3& v, double u, const Vec3& normal,
                                    double level = 0.0, bool backward = false);

}  // namespace lz
