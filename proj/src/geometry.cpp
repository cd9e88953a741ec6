#include "maxdissim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <vector>

namespace maxdissim {

GroundSet::GroundSet(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() >= 1, "GroundSet: dimension must be >= 1");
  require(lower_.size() == upper_.size(), "GroundSet: lower/upper dimension mismatch");
  require((lower_.array() < upper_.array()).all(), "GroundSet: lower must be < upper componentwise");
  require(lower_.allFinite() && upper_.allFinite(), "GroundSet: bounds must be finite");
}

GroundSet GroundSet::interval(double lo, double hi) {
  return GroundSet(Point::Constant(1, lo), Point::Constant(1, hi));
}

GroundSet GroundSet::square(double lo, double hi) {
  return GroundSet(Point::Constant(2, lo), Point::Constant(2, hi));
}

double GroundSet::volume() const { return (upper_ - lower_).prod(); }

bool GroundSet::contains(const Point& t, double slack) const {
  if (t.size() != lower_.size()) return false;
  for (int i = 0; i < dim(); ++i) {
    double tol = slack * std::max(1.0, side(i));
    if (!(t[i] >= lower_[i] - tol && t[i] <= upper_[i] + tol)) return false;
  }
  return true;
}

Point GroundSet::clamp(const Point& t) const { return t.cwiseMax(lower_).cwiseMin(upper_); }

double GroundSet::distance_to_boundary(const Point& t) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) d = std::min({d, t[i] - lower_[i], upper_[i] - t[i]});
  return std::max(0.0, d);
}

bool ClippedRegion::contains(const Point& s) const {
  for (int i = 0; i < s.size(); ++i)
    if (s[i] < box_lower[i] || s[i] > box_upper[i]) return false;
  return ball.contains(s);
}

double ClippedRegion::volume(int nodes_per_dim) const {
  const int d = ball.dim();
  if (ball.radius == 0 || empty_box()) return 0.0;
  if (d == 1) return box_upper[0] - box_lower[0];
  if (!clipped) return ball_volume(ball.radius, d, ball.p);
  // Tensor midpoint rule over the clipped box with the membership indicator.
  const Point h = (box_upper - box_lower) / nodes_per_dim;
  const double cell = h.prod();
  std::vector<int> idx(d, 0);
  Point s(d);
  double inside = 0;
  while (true) {
    for (int k = 0; k < d; ++k) s[k] = box_lower[k] + (idx[k] + 0.5) * h[k];
    if (ball.contains(s)) inside += cell;
    int k = 0;
    while (k < d && ++idx[k] == nodes_per_dim) idx[k++] = 0;
    if (k == d) break;
  }
  return inside;
}

ClippedRegion clip_to_ground(const LpBall& ball, const GroundSet& ground) {
  require(ball.dim() == ground.dim(), "clip_to_ground: dimension mismatch");
  require(ball.radius >= 0, "clip_to_ground: negative radius");
  require(ground.contains(ball.center), "clip_to_ground: ball center lies outside the ground set");
  ClippedRegion region;
  region.ball = ball;
  const Point r = Point::Constant(ball.dim(), ball.radius);
  const Point lo = ball.center - r;
  const Point hi = ball.center + r;
  region.box_lower = lo.cwiseMax(ground.lower());
  region.box_upper = hi.cwiseMin(ground.upper());
  region.clipped = (lo.array() < ground.lower().array()).any() ||
                   (hi.array() > ground.upper().array()).any();
  return region;
}

namespace {

std::vector<Point> boundary_samples(const LpBall& ball, int resolution) {
  const int d = ball.dim();
  std::vector<Point> out;
  if (ball.radius == 0) {
    out.push_back(ball.center);
    return out;
  }
  if (d == 1) {
    out.push_back(ball.center.array() - ball.radius);
    out.push_back(ball.center.array() + ball.radius);
    return out;
  }
  require(d == 2, "hausdorff: boundary sampling implemented for d <= 2 only");
  out.reserve(resolution);
  for (int k = 0; k < resolution; ++k) {
    double phi = 2 * std::numbers::pi * k / resolution;
    Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    u /= lp_norm(u, ball.p);
    out.push_back(ball.center + ball.radius * u);
  }
  return out;
}

// max over sampled boundary of a of the Euclidean distance to b.
double directed(const std::vector<Point>& a_samples, const LpBall& b,
                const std::vector<Point>& b_samples) {
  double worst = 0;
  for (const auto& x : a_samples) {
    if (b.contains(x)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b_samples) best = std::min(best, (x - y).squaredNorm());
    worst = std::max(worst, std::sqrt(best));
  }
  return worst;
}

}  // namespace

double hausdorff_sampled(const LpBall& a, const LpBall& b, int resolution) {
  require(a.p == b.p, "hausdorff: balls must share the same p");
  require(a.dim() == b.dim(), "hausdorff: dimension mismatch");
  require(resolution >= 3, "hausdorff: resolution must be >= 3");
  auto sa = boundary_samples(a, resolution);
  auto sb = boundary_samples(b, resolution);
  return std::max(directed(sa, b, sb), directed(sb, a, sa));
}

double hausdorff(const LpBall& a, const LpBall& b, const GroundSet& ground, int resolution) {
  require(a.p == b.p, "hausdorff: balls must share the same p");
  require(a.dim() == b.dim() && a.dim() == ground.dim(), "hausdorff: dimension mismatch");
  if (a.dim() == 1) {
    double lo = (a.center[0] - a.radius) - (b.center[0] - b.radius);
    double hi = (a.center[0] + a.radius) - (b.center[0] + b.radius);
    return std::max(std::abs(lo), std::abs(hi));
  }
  if (a.p == 2) return (a.center - b.center).norm() + std::abs(a.radius - b.radius);
  return hausdorff_sampled(a, b, resolution);
}

}  // namespace maxdissim
