#include "maxdissim/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maxdissim/optimize.hpp"
#include "maxdissim/parallel.hpp"

namespace maxdissim {

int default_quadrature_nodes(int dim) { return dim == 1 ? 101 : 61; }

DissimilarityObjective::DissimilarityObjective(Parameter theta_x, Parameter theta_y, double p, GroundSet ground,
                                               ObjectiveMode mode, int nodes)
    : theta_x_(std::move(theta_x)),
      theta_y_(std::move(theta_y)),
      p_(p),
      ground_(std::move(ground)),
      mode_(mode),
      nodes_(nodes > 0 ? nodes : default_quadrature_nodes(ground_.dim())) {
  require(p_ >= 1, "DissimilarityObjective: p must be >= 1");
  require(mode_ == ObjectiveMode::Subnorm || p_ == 1, "DissimilarityObjective: averaged mode uses p = 1");
  require(nodes_ >= 1, "DissimilarityObjective: quadrature node count must be >= 1");
}

namespace {

inline double power_abs(double v, double p) {
  v = std::abs(v);
  if (p == 1) return v;
  if (p == 2) return v * v;
  return std::pow(v, p);
}

struct Scratch {
  Eigen::MatrixXd nodes;
  Eigen::VectorXd vx, vy;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

DissimilarityObjective::Sums DissimilarityObjective::integrate(const LpBall& ball) const {
  Sums sums;
  if (ball.radius <= 0) return sums;
  const ClippedRegion region = clip_to_ground(ball, ground_);
  if (region.empty_box()) return sums;
  const int d = ground_.dim();
  const Point h = (region.box_upper - region.box_lower) / nodes_;
  const double cell = h.prod();

  Scratch& s = scratch();
  long total = 1;
  for (int k = 0; k < d; ++k) total *= nodes_;
  s.nodes.resize(d, total);
  long kept = 0;
  std::vector<int> idx(d, 0);
  Point node(d);
  for (long n = 0; n < total; ++n) {
    for (int k = 0; k < d; ++k) node[k] = region.box_lower[k] + (idx[k] + 0.5) * h[k];
    // 1-D balls are intervals, so every node of the clipped box is inside.
    if (d == 1 || ball.contains(node)) s.nodes.col(kept++) = node;
    for (int k = 0; k < d && ++idx[k] == nodes_; ++k) idx[k] = 0;
  }
  if (kept == 0) return sums;
  theta_x_.values(s.nodes.leftCols(kept), s.vx);
  theta_y_.values(s.nodes.leftCols(kept), s.vy);
  double acc = 0;
  for (long j = 0; j < kept; ++j) acc += power_abs(s.vx[j] - s.vy[j], p_);
  sums.power_integral = acc * cell;
  sums.volume = kept * cell;
  return sums;
}

double DissimilarityObjective::pointwise(const Point& t) const { return std::abs(theta_x_(t) - theta_y_(t)); }

double DissimilarityObjective::operator()(const Point& center, double radius) const {
  if (mode_ == ObjectiveMode::Averaged) {
    if (radius <= 0) return pointwise(center);
    Sums s = integrate(ball(center, radius));
    return s.volume > 0 ? s.power_integral / s.volume : pointwise(center);
  }
  if (radius <= 0) return 0.0;
  Sums s = integrate(ball(center, radius));
  if (p_ == 1) return s.power_integral;
  if (p_ == 2) return std::sqrt(s.power_integral);
  return std::pow(s.power_integral, 1.0 / p_);
}

double subnorm(const DissimilarityObjective& obj, const LpBall& ball) {
  require(ball.p == obj.p(), "subnorm: ball p differs from the objective p");
  if (ball.radius <= 0) return 0.0;
  return std::pow(obj.integrate(ball).power_integral, 1.0 / obj.p());
}

double averaged_subnorm(const DissimilarityObjective& obj, const LpBall& ball) {
  require(ball.p == obj.p(), "averaged_subnorm: ball p differs from the objective p");
  if (ball.radius <= 0) return obj.pointwise(ball.center);
  auto s = obj.integrate(ball);
  if (s.volume <= 0) return obj.pointwise(ball.center);
  return std::pow(s.power_integral, 1.0 / obj.p()) / s.volume;
}

double grid_power_integral(const DissimilarityObjective& obj, const std::function<bool(const Point&)>& region,
                           int nodes_per_dim) {
  const GroundSet& g = obj.ground();
  const int d = g.dim();
  const Point h = (g.upper() - g.lower()) / nodes_per_dim;
  const double cell = h.prod();
  std::vector<int> idx(d, 0);
  Point node(d);
  double acc = 0;
  while (true) {
    for (int k = 0; k < d; ++k) node[k] = g.lower(k) + (idx[k] + 0.5) * h[k];
    if (region(node)) acc += power_abs(obj.theta_x()(node) - obj.theta_y()(node), obj.p());
    int k = 0;
    while (k < d && ++idx[k] == nodes_per_dim) idx[k++] = 0;
    if (k == d) break;
  }
  return acc * cell;
}

namespace {

struct Candidate {
  Point center;
  double radius;
  double value;
};

// Cell-centered grid (k per axis) or endpoint-inclusive grid over T.
std::vector<Point> center_grid(const GroundSet& g, int k, bool include_endpoints) {
  const int d = g.dim();
  std::vector<Point> out;
  std::vector<int> idx(d, 0);
  while (true) {
    Point t(d);
    for (int a = 0; a < d; ++a) {
      double frac = include_endpoints ? (k == 1 ? 0.5 : double(idx[a]) / (k - 1)) : (idx[a] + 0.5) / k;
      t[a] = g.lower(a) + frac * g.side(a);
    }
    out.push_back(std::move(t));
    int a = 0;
    while (a < d && ++idx[a] == k) idx[a++] = 0;
    if (a == d) break;
  }
  return out;
}

}  // namespace

BmdSolution solve_ball_problem(const std::function<double(const Point&, double)>& f, const GroundSet& ground,
                               double p, double c, bool monotone, const OptimizerConfig& cfg,
                               const std::vector<Point>& warm_starts) {
  require(c >= 0 && std::isfinite(c), "volume budget c must be finite and >= 0");
  require(cfg.starts_per_dim >= 1, "optimizer: starts_per_dim must be >= 1");
  const int d = ground.dim();
  const double rc = max_radius(c, d, p);
  const double diam = ground.diameter();

  SolverDiagnostics diag;
  int evaluations = 0;
  auto value = [&](const Point& t, double r) {
    ++evaluations;
    return f(t, r);
  };

  const std::vector<Point> grid_starts = center_grid(ground, cfg.starts_per_dim, false);
  bool fixed_radius = rc == 0;
  if (monotone && !fixed_radius)
    fixed_radius = std::all_of(grid_starts.begin(), grid_starts.end(),
                               [&](const Point& t) { return ground.distance_to_boundary(t) > rc; });
  diag.joint_search = !fixed_radius;

  std::vector<Candidate> starts;
  std::vector<double> start_radii;
  if (fixed_radius) start_radii = {rc};
  else start_radii = {0.5 * rc, rc};
  for (const auto& t : grid_starts)
    for (double r : start_radii) starts.push_back({t, r, 0});
  for (const auto& t : warm_starts) starts.push_back({ground.clamp(t), rc, 0});

  // Coarse pre-scan; its best distinct points seed extra starts.
  const int scan_n = cfg.scan_per_dim > 0 ? cfg.scan_per_dim : (d == 1 ? 21 : 9);
  if (cfg.scan_seeds > 0 && scan_n >= 2) {
    std::vector<double> scan_radii;
    if (fixed_radius || monotone) scan_radii = {rc};
    else scan_radii = {0.0, 0.5 * rc, rc};
    std::vector<Candidate> scanned;
    for (const auto& t : center_grid(ground, scan_n, true))
      for (double r : scan_radii) scanned.push_back({t, r, value(t, r)});
    std::stable_sort(scanned.begin(), scanned.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
    const double min_sep = 1.5 * (ground.upper() - ground.lower()).maxCoeff() / (scan_n - 1);
    std::vector<Candidate> chosen;
    for (const auto& s : scanned) {
      if (static_cast<int>(chosen.size()) >= cfg.scan_seeds) break;
      bool distinct = std::all_of(chosen.begin(), chosen.end(), [&](const Candidate& o) {
        return (o.center - s.center).lpNorm<Eigen::Infinity>() > min_sep;
      });
      if (distinct) chosen.push_back(s);
    }
    starts.insert(starts.end(), chosen.begin(), chosen.end());
  }

  NelderMeadOptions nm;
  nm.tolerance = cfg.tolerance * diam;
  nm.max_evaluations = cfg.max_evaluations;
  const int nvar = fixed_radius ? d : d + 1;
  Eigen::VectorXd lower(nvar), upper(nvar), step(nvar);
  lower.head(d) = ground.lower();
  upper.head(d) = ground.upper();
  step.head(d) = 0.1 * (ground.upper() - ground.lower());
  if (!fixed_radius) {
    lower[d] = 0;
    upper[d] = rc;
    step[d] = 0.25 * rc;
  }
  auto objective = [&](const Eigen::VectorXd& x) {
    return fixed_radius ? value(x, rc) : value(x.head(d), x[d]);
  };

  std::vector<Candidate> optima;
  for (const auto& s : starts) {
    Eigen::VectorXd x0(nvar);
    x0.head(d) = s.center;
    if (!fixed_radius) x0[d] = s.radius;
    NelderMeadResult res = nelder_mead_maximize(objective, x0, step, lower, upper, nm);
    Candidate cand{res.x.head(d), fixed_radius ? rc : res.x[d], res.value};
    if (monotone && cand.radius < rc) {
      double snapped = value(cand.center, rc);
      if (snapped >= cand.value - 1e-9 * std::abs(cand.value)) {
        cand.radius = rc;
        cand.value = std::max(cand.value, snapped);
      }
    }
    optima.push_back(std::move(cand));
  }
  diag.starts = static_cast<int>(starts.size());

  std::size_t best = 0;
  for (std::size_t i = 1; i < optima.size(); ++i)
    if (optima[i].value > optima[best].value) best = i;
  const Candidate& top = optima[best];

  const double tie_floor = top.value - cfg.tie_value_rel * std::abs(top.value);
  for (std::size_t i = 0; i < optima.size(); ++i) {
    if (i == best) continue;
    double dist = (optima[i].center - top.center).norm();
    if (optima[i].value >= tie_floor && dist > cfg.tie_center_frac * diam) {
      if (!diag.non_unique || optima[i].value > diag.runner_up_value) {
        diag.runner_up_value = optima[i].value;
        diag.runner_up_distance = dist;
      }
      diag.non_unique = true;
    }
  }
  diag.evaluations = evaluations;

  BmdSolution sol;
  sol.center = top.center;
  sol.radius = top.radius;
  sol.index = top.value;
  sol.budget = c;
  sol.p = p;
  sol.diagnostics = diag;
  return sol;
}

BmdSolution solve_bmd(const DissimilarityObjective& obj, double c, const OptimizerConfig& cfg,
                      const std::vector<Point>& warm_starts) {
  const bool monotone = obj.mode() == ObjectiveMode::Subnorm;
  return solve_ball_problem([&](const Point& t, double r) { return obj(t, r); }, obj.ground(), obj.p(), c,
                            monotone, cfg, warm_starts);
}

BmdSolution solve_hl_bmd(const DissimilarityObjective& obj, double c, const OptimizerConfig& cfg) {
  require(obj.mode() == ObjectiveMode::Averaged, "solve_hl_bmd: objective must be in averaged mode");
  return solve_bmd(obj, c, cfg);
}

BmdSolution brute_force_bmd(const DissimilarityObjective& obj, double c, int t_grid_size, int r_grid_size) {
  require(t_grid_size >= 2 && r_grid_size >= 2, "brute_force_bmd: grid sizes must be >= 2");
  require(c >= 0, "brute_force_bmd: volume budget must be >= 0");
  const GroundSet& g = obj.ground();
  const double rc = max_radius(c, g.dim(), obj.p());
  BmdSolution sol;
  sol.index = -std::numeric_limits<double>::infinity();
  sol.budget = c;
  sol.p = obj.p();
  int evaluations = 0;
  for (const auto& t : center_grid(g, t_grid_size, true)) {
    for (int j = 0; j < r_grid_size; ++j) {
      double r = rc * j / (r_grid_size - 1);
      double v = obj(t, r);
      ++evaluations;
      if (v > sol.index) {
        sol.index = v;
        sol.center = t;
        sol.radius = r;
      }
    }
  }
  sol.diagnostics.evaluations = evaluations;
  return sol;
}

std::vector<BmdSolution> dissimilarity_curve(const DissimilarityObjective& obj, const std::vector<double>& c_grid,
                                             const OptimizerConfig& cfg) {
  require(std::is_sorted(c_grid.begin(), c_grid.end()), "dissimilarity_curve: c grid must be increasing");
  std::vector<BmdSolution> out;
  std::vector<Point> warm;
  for (double c : c_grid) {
    out.push_back(solve_bmd(obj, c, cfg, warm));
    warm = {out.back().center};
  }
  return out;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PosteriorSummary summarize(const std::vector<BmdSolution>& draws) {
  PosteriorSummary s;
  if (draws.empty()) return s;
  const int d = static_cast<int>(draws.front().center.size());
  const double m = static_cast<double>(draws.size());
  s.mean_center = Point::Zero(d);
  s.median_center = Point::Zero(d);
  std::vector<double> radius, index, coord;
  for (const auto& b : draws) {
    s.mean_center += b.center / m;
    s.mean_radius += b.radius / m;
    s.mean_index += b.index / m;
    radius.push_back(b.radius);
    index.push_back(b.index);
    s.non_unique_draws += b.diagnostics.non_unique ? 1 : 0;
  }
  for (int a = 0; a < d; ++a) {
    coord.clear();
    for (const auto& b : draws) coord.push_back(b.center[a]);
    s.median_center[a] = median(coord);
  }
  s.median_radius = median(radius);
  s.median_index = median(index);
  return s;
}

PosteriorBmd solve_bmd_posterior(const CoefficientPosterior& post_x, const CoefficientPosterior& post_y, double c,
                                 int m, std::uint64_t seed, const ObjectiveSpec& spec, const OptimizerConfig& cfg,
                                 int workers) {
  require(m >= 1, "solve_bmd_posterior: m must be >= 1");
  require(c >= 0, "solve_bmd_posterior: volume budget must be >= 0");
  const auto trajectories = posterior_trajectories(post_x, post_y, m, seed);
  PosteriorBmd out;
  out.budget = c;
  out.draws.resize(m);
  parallel_for(
      m,
      [&](std::size_t k) {
        DissimilarityObjective obj(trajectories[k].first, trajectories[k].second, spec.p, post_x.basis.ground(),
                                   spec.mode, spec.nodes);
        out.draws[k] = solve_bmd(obj, c, cfg);
      },
      workers);
  out.summary = summarize(out.draws);
  return out;
}

ScalarizedObjective::ScalarizedObjective(std::vector<DissimilarityObjective> objectives, std::vector<double> weights)
    : objectives_(std::move(objectives)), weights_(std::move(weights)) {
  require(!objectives_.empty(), "ScalarizedObjective: need at least one objective");
  require(objectives_.size() == weights_.size(), "ScalarizedObjective: one weight per objective");
  for (double w : weights_) require(std::isfinite(w) && w > 0, "ScalarizedObjective: weights must be strictly positive");
  for (const auto& o : objectives_) {
    require(o.ground() == objectives_.front().ground(), "ScalarizedObjective: objectives must share the ground set");
    require(o.p() == objectives_.front().p(), "ScalarizedObjective: objectives must share p");
    require(o.mode() == ObjectiveMode::Subnorm, "ScalarizedObjective: objectives must be sub-norms");
  }
}

double ScalarizedObjective::operator()(const Point& center, double radius) const {
  double total = 0;
  for (std::size_t i = 0; i < objectives_.size(); ++i) total += weights_[i] * objectives_[i](center, radius);
  return total;
}

std::vector<double> ScalarizedObjective::components(const Point& center, double radius) const {
  std::vector<double> out;
  for (const auto& o : objectives_) out.push_back(o(center, radius));
  return out;
}

BmdSolution solve_bmmd(const ScalarizedObjective& scal, double c, const OptimizerConfig& cfg) {
  const auto& first = scal.objectives().front();
  return solve_ball_problem([&](const Point& t, double r) { return scal(t, r); }, first.ground(), first.p(), c, true,
                            cfg);
}

bool dominates(const std::vector<double>& a, const std::vector<double>& b, double margin) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - margin) return false;
    if (a[i] > b[i] + margin) strictly = true;
  }
  return strictly;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  require(!sorted_.empty(), "EmpiricalCdf: empty sample");
  for (double v : sorted_) require(std::isfinite(v), "EmpiricalCdf: samples must be finite");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / sorted_.size();
}

YoudenResult youden(const std::function<double(double)>& cdf_x, const std::function<double(double)>& cdf_y, double lo,
                    double hi, int grid_size) {
  require(lo < hi, "youden: empty domain");
  require(grid_size >= 3, "youden: grid_size must be >= 3");
  auto gap = [&](double t) { return std::abs(cdf_x(t) - cdf_y(t)); };
  const double h = (hi - lo) / (grid_size - 1);
  int best = 0;
  double best_val = -1;
  for (int i = 0; i < grid_size; ++i) {
    double v = gap(lo + i * h);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section polish on the bracketing cells.
  double a = lo + std::max(0, best - 1) * h, b = lo + std::min(grid_size - 1, best + 1) * h;
  const double ratio = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = gap(x1), f2 = gap(x2);
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = gap(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = gap(x2);
    }
  }
  double t = 0.5 * (a + b);
  double v = gap(t);
  if (v >= best_val) return {t, v};
  return {lo + best * h, best_val};
}

YoudenResult youden(const EmpiricalCdf& cdf_x, const EmpiricalCdf& cdf_y) {
  YoudenResult best{cdf_x.sorted().front(), -1};
  auto consider = [&](double t) {
    double v = std::abs(cdf_x(t) - cdf_y(t));
    if (v > best.j) best = {t, v};
  };
  for (double t : cdf_x.sorted()) consider(t);
  for (double t : cdf_y.sorted()) consider(t);
  return best;
}

}  // namespace maxdissim
