#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maxdissim/basis.hpp"
#include "maxdissim/geometry.hpp"
#include "maxdissim/inference.hpp"

namespace maxdissim {

enum class ObjectiveMode { Subnorm, Averaged };

/// f(t, r) = || theta_x - theta_y ||_p over B(t, r) ∩ T, or its ball average.
///
/// Integrals use a tensor midpoint rule on the clipped bounding box of the
/// ball with a membership indicator (`nodes` per axis), so values are
/// deterministic for a fixed node count.
class DissimilarityObjective {
 public:
  DissimilarityObjective(Parameter theta_x, Parameter theta_y, double p, GroundSet ground,
                         ObjectiveMode mode = ObjectiveMode::Subnorm, int nodes = 0);

  const Parameter& theta_x() const { return theta_x_; }
  const Parameter& theta_y() const { return theta_y_; }
  double p() const { return p_; }
  const GroundSet& ground() const { return ground_; }
  ObjectiveMode mode() const { return mode_; }
  int nodes() const { return nodes_; }

  /// Integral of |theta_x - theta_y|^p over B ∩ T and the quadrature volume of B ∩ T.
  struct Sums {
    double power_integral = 0;
    double volume = 0;
  };
  Sums integrate(const LpBall& ball) const;

  /// |theta_x(t) - theta_y(t)|.
  double pointwise(const Point& t) const;

  /// Mode-dependent value at (center, radius).
  double operator()(const Point& center, double radius) const;

  LpBall ball(const Point& center, double radius) const { return {center, radius, p_}; }

 private:
  Parameter theta_x_;
  Parameter theta_y_;
  double p_;
  GroundSet ground_;
  ObjectiveMode mode_;
  int nodes_;
};

int default_quadrature_nodes(int dim);

/// (integral over B ∩ T of |theta_x - theta_y|^p)^(1/p).
double subnorm(const DissimilarityObjective& obj, const LpBall& ball);
/// Ball-averaged |theta_x - theta_y|; the pointwise limit at r = 0.
double averaged_subnorm(const DissimilarityObjective& obj, const LpBall& ball);

/// Integral of |theta_x - theta_y|^p over an arbitrary region on the fixed
/// midpoint grid of T (nodes_per_dim per axis).
double grid_power_integral(const DissimilarityObjective& obj,
                           const std::function<bool(const Point&)>& region, int nodes_per_dim);

struct OptimizerConfig {
  int starts_per_dim = 3;       ///< coarse grid of centers per axis
  int scan_per_dim = 0;         ///< pre-scan grid per axis (0: 21 for d=1, 9 for d=2)
  int scan_seeds = 3;           ///< best scan points added as starts
  double tolerance = 1e-6;      ///< simplex diameter, relative to diam(T)
  int max_evaluations = 3000;   ///< per start
  double tie_value_rel = 1e-3;  ///< near-tie threshold on the objective
  double tie_center_frac = 0.05;///< near-tie threshold on center distance, times diam(T)
};

struct SolverDiagnostics {
  int starts = 0;
  int evaluations = 0;
  bool joint_search = false;
  bool non_unique = false;
  double runner_up_value = 0;
  double runner_up_distance = 0;
};

struct BmdSolution {
  Point center;
  double radius = 0;
  double index = 0;
  double budget = 0;
  double p = 2;
  SolverDiagnostics diagnostics;

  LpBall ball() const { return {center, radius, p}; }
};

/// Maximizes an arbitrary f(t, r) over T x [0, R_c]. `monotone_in_radius`
/// enables the fixed-radius search and snaps the radius to R_c.
BmdSolution solve_ball_problem(const std::function<double(const Point&, double)>& f,
                               const GroundSet& ground, double p, double c, bool monotone_in_radius,
                               const OptimizerConfig& cfg = {}, const std::vector<Point>& warm_starts = {});

BmdSolution solve_bmd(const DissimilarityObjective& obj, double c, const OptimizerConfig& cfg = {},
                      const std::vector<Point>& warm_starts = {});

/// Hardy-Littlewood BMD; the objective must be in averaged mode.
BmdSolution solve_hl_bmd(const DissimilarityObjective& obj, double c, const OptimizerConfig& cfg = {});

/// Exhaustive grid: t_grid_size points per axis (endpoints included) times
/// r_grid_size radii in [0, R_c].
BmdSolution brute_force_bmd(const DissimilarityObjective& obj, double c, int t_grid_size, int r_grid_size);

/// Per-budget solutions over an increasing grid; each solve warm-starts from
/// the previous optimum.
std::vector<BmdSolution> dissimilarity_curve(const DissimilarityObjective& obj,
                                             const std::vector<double>& c_grid,
                                             const OptimizerConfig& cfg = {});

/// How posterior trajectories are turned into objectives.
struct ObjectiveSpec {
  double p = 1;
  ObjectiveMode mode = ObjectiveMode::Subnorm;
  int nodes = 0;
};

struct PosteriorSummary {
  Point mean_center;
  Point median_center;
  double mean_radius = 0, median_radius = 0;
  double mean_index = 0, median_index = 0;
  int non_unique_draws = 0;
};

struct PosteriorBmd {
  std::vector<BmdSolution> draws;
  PosteriorSummary summary;
  double budget = 0;
};

PosteriorSummary summarize(const std::vector<BmdSolution>& draws);

PosteriorBmd solve_bmd_posterior(const CoefficientPosterior& post_x, const CoefficientPosterior& post_y,
                                 double c, int m, std::uint64_t seed, const ObjectiveSpec& spec = {},
                                 const OptimizerConfig& cfg = {}, int workers = 1);

/// sum_i w_i F_i over a shared ground set and p.
class ScalarizedObjective {
 public:
  ScalarizedObjective(std::vector<DissimilarityObjective> objectives, std::vector<double> weights);

  const std::vector<DissimilarityObjective>& objectives() const { return objectives_; }
  const std::vector<double>& weights() const { return weights_; }
  double operator()(const Point& center, double radius) const;
  /// Individual F_i at a ball.
  std::vector<double> components(const Point& center, double radius) const;

 private:
  std::vector<DissimilarityObjective> objectives_;
  std::vector<double> weights_;
};

BmdSolution solve_bmmd(const ScalarizedObjective& scal, double c, const OptimizerConfig& cfg = {});

/// Pareto dominance for maximization: a >= b componentwise and a > b somewhere,
/// with `margin` absorbing solver-level noise.
bool dominates(const std::vector<double>& a, const std::vector<double>& b, double margin = 0);

struct YoudenResult {
  double t = 0;
  double j = 0;
};

/// Empirical distribution function of a sample.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  double operator()(double x) const;
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// argmax / max of |F_x - F_y| on [lo, hi]: grid scan plus golden-section polish.
YoudenResult youden(const std::function<double(double)>& cdf_x, const std::function<double(double)>& cdf_y,
                    double lo, double hi, int grid_size = 2001);
/// Exact for step CDFs: the supremum is attained at a pooled sample point.
YoudenResult youden(const EmpiricalCdf& cdf_x, const EmpiricalCdf& cdf_y);

}  // namespace maxdissim
