#pragma once

#include <cmath>
#include <Eigen/Dense>

#include "maxdissim/errors.hpp"

namespace maxdissim {

using Point = Eigen::VectorXd;

/// Axis-aligned compact box T = [lower, upper] in R^d with Lebesgue measure.
class GroundSet {
 public:
  GroundSet() = default;
  GroundSet(Point lower, Point upper);

  /// Unit interval / square helpers.
  static GroundSet interval(double lo, double hi);
  static GroundSet square(double lo, double hi);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  double lower(int i) const { return lower_[i]; }
  double upper(int i) const { return upper_[i]; }
  double side(int i) const { return upper_[i] - lower_[i]; }

  double volume() const;
  /// Euclidean diameter of the box.
  double diameter() const { return (upper_ - lower_).norm(); }
  Point midpoint() const { return 0.5 * (lower_ + upper_); }

  /// Membership with a relative slack so quadrature nodes on the boundary pass.
  bool contains(const Point& t, double slack = 1e-12) const;
  Point clamp(const Point& t) const;
  /// Euclidean distance from an interior point to the box boundary.
  double distance_to_boundary(const Point& t) const;

  bool operator==(const GroundSet& other) const {
    return lower_ == other.lower_ && upper_ == other.upper_;
  }

 private:
  Point lower_;
  Point upper_;
};

template <typename Derived>
typename Derived::Scalar lp_norm(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar p) {
  using std::abs;
  using std::pow;
  if (p == 2) return v.norm();
  if (p == 1) return v.template lpNorm<1>();
  if (std::isinf(p)) return v.template lpNorm<Eigen::Infinity>();
  return pow(v.array().abs().pow(p).sum(), typename Derived::Scalar(1) / p);
}

/// Closed L^p ball B(t, r) = { s : ||s - t||_p <= r }.
struct LpBall {
  Point center;
  double radius = 0.0;
  double p = 2.0;

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Point& s) const { return lp_norm(s - center, p) <= radius; }
};

/// Volume {2 r Gamma(1/p + 1)}^d / Gamma(d/p + 1) of an L^p ball in R^d.
template <typename Scalar>
Scalar ball_volume(Scalar radius, int dim, Scalar p) {
  require(dim >= 1, "ball_volume: dim must be >= 1");
  require(p >= 1, "ball_volume: p must be >= 1");
  require(radius >= 0, "ball_volume: radius must be >= 0");
  if (radius == 0) return Scalar(0);
  using std::exp;
  using std::lgamma;
  using std::log;
  const Scalar d = static_cast<Scalar>(dim);
  return exp(d * log(2 * radius) + d * lgamma(1 / p + 1) - lgamma(d / p + 1));
}

/// Largest radius R_c whose L^p ball has volume c.
template <typename Scalar>
Scalar max_radius(Scalar c, int dim, Scalar p) {
  require(dim >= 1, "max_radius: dim must be >= 1");
  require(p >= 1, "max_radius: p must be >= 1");
  require(c >= 0, "max_radius: volume budget must be >= 0");
  if (c == 0) return Scalar(0);
  using std::exp;
  using std::lgamma;
  using std::log;
  const Scalar d = static_cast<Scalar>(dim);
  return exp((log(c) + lgamma(d / p + 1)) / d - lgamma(1 / p + 1)) / 2;
}

/// B ∩ T, represented by the ball plus the clipped bounding box.
struct ClippedRegion {
  LpBall ball;
  Point box_lower;
  Point box_upper;
  bool clipped = false;  ///< true when the ball pokes out of T

  bool contains(const Point& s) const;
  bool empty_box() const { return ((box_upper - box_lower).array() <= 0).any(); }
  /// |B ∩ T|: exact when unclipped or d = 1, midpoint-rule estimate otherwise.
  double volume(int nodes_per_dim = 201) const;
};

ClippedRegion clip_to_ground(const LpBall& ball, const GroundSet& ground);

/// Hausdorff distance between two balls of the same p (Euclidean point-set
/// distance). Exact for d = 1 and p = 2, boundary sampling otherwise.
double hausdorff(const LpBall& a, const LpBall& b, const GroundSet& ground, int resolution = 720);

/// Two-sided max-min over `resolution` boundary samples per ball (d = 2, or
/// d = 1 where the boundary is two points). Used directly by tests.
double hausdorff_sampled(const LpBall& a, const LpBall& b, int resolution);

}  // namespace maxdissim
