#include "maxdissim/simulate.hpp"

#include <cmath>
#include <random>

#include "maxdissim/rng.hpp"

namespace maxdissim {

void MaternParams::validate() const {
  require(sigma > 0 && nu > 0 && ell > 0, "MaternParams: sigma, nu and ell must be positive");
}

double matern_cov(double dist, const MaternParams& params) {
  params.validate();
  require(dist >= 0, "matern_cov: distance must be >= 0");
  const double s2 = params.sigma * params.sigma;
  if (dist == 0) return s2;
  const double x = std::sqrt(2 * params.nu) * dist / params.ell;
  // Scaled form avoids overflow of x^nu for large nu.
  double log_val = (1 - params.nu) * std::log(2.0) - std::lgamma(params.nu) + params.nu * std::log(x);
  double k = std::cyl_bessel_k(params.nu, x);
  if (k == 0) return 0;
  return s2 * std::exp(log_val) * k;
}

std::vector<double> scenario1_grid(int j) {
  require(j >= 1, "scenario1_grid: J must be >= 1");
  std::vector<double> g(j);
  for (int i = 0; i < j; ++i) g[i] = double(i) / j;
  return g;
}

GaussianObservations sample_gp(const AnalyticParameter& mean, const MaternParams& params,
                               const std::vector<double>& grid, int n, std::uint64_t seed, double nugget) {
  params.validate();
  require(grid.size() >= 2, "sample_gp: need at least two grid points");
  require(n >= 1, "sample_gp: n must be >= 1");
  require(nugget >= 0, "sample_gp: nugget must be >= 0");
  const int j = static_cast<int>(grid.size());
  Eigen::MatrixXd k(j, j);
  for (int a = 0; a < j; ++a)
    for (int b = 0; b < j; ++b) k(a, b) = matern_cov(std::abs(grid[a] - grid[b]), params);
  k.diagonal().array() += nugget;

  const double scale = k.diagonal().maxCoeff();
  double jitter = 1e-10 * scale;
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (int attempt = 0; attempt <= 3 && !ok; ++attempt, jitter *= 10) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    ok = llt.info() == Eigen::Success;
  }
  if (!ok) throw NumericalError("sample_gp: covariance factorization failed after jitter escalation");
  const Eigen::MatrixXd factor = llt.matrixL();

  GaussianObservations out;
  Eigen::VectorXd mu(j);
  for (int a = 0; a < j; ++a) {
    out.points.push_back(Point::Constant(1, grid[a]));
    mu[a] = mean(out.points.back());
  }
  out.values.resize(n, j);
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(j);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < j; ++a) z[a] = normal(rng);
    out.values.row(i) = (mu + factor * z).transpose();
  }
  return out;
}

std::pair<double, double> scenario1_means(double t) {
  const double b = 0.5 * std::exp(10 * (t - 0.5) * (t - 0.5));
  return {b + 4 * std::cos(10 * t) - 2 * (t - 0.75) * (t - 0.75), b + 3 * std::sin(12 * t)};
}

std::pair<AnalyticParameter, AnalyticParameter> scenario1_parameters() {
  return {AnalyticParameter{[](const Point& t) { return scenario1_means(t[0]).first; }, "scenario1-x"},
          AnalyticParameter{[](const Point& t) { return scenario1_means(t[0]).second; }, "scenario1-y"}};
}

void Scenario2Config::validate() const {
  require(gamma > 0 && delta > 0, "Scenario2Config: gamma and delta must be positive");
}

std::pair<AnalyticParameter, AnalyticParameter> scenario2_intensity(const Scenario2Config& cfg) {
  cfg.validate();
  const double gamma = cfg.gamma, delta = cfg.delta;
  auto lx = [gamma](const Point& t) { return gamma * std::exp(-0.5 * t.squaredNorm()); };
  return {AnalyticParameter{lx, "scenario2-x"},
          AnalyticParameter{[lx, delta](const Point& t) { return delta * lx(t); }, "scenario2-y"}};
}

PointPattern sample_poisson_process(const Parameter& intensity, const GroundSet& ground, std::uint64_t seed,
                                    int scan_per_dim) {
  const int d = ground.dim();
  const int scan = scan_per_dim > 0 ? scan_per_dim : (d == 1 ? 1001 : 101);
  double lambda_max = 0;
  std::vector<int> idx(d, 0);
  Point t(d);
  while (true) {
    for (int a = 0; a < d; ++a) t[a] = ground.lower(a) + ground.side(a) * idx[a] / (scan - 1);
    double v = intensity(t);
    if (!std::isfinite(v)) throw InputError("sample_poisson_process: non-finite intensity on the scan grid");
    require(v >= 0, "sample_poisson_process: intensity must be nonnegative");
    lambda_max = std::max(lambda_max, v);
    int a = 0;
    while (a < d && ++idx[a] == scan) idx[a++] = 0;
    if (a == d) break;
  }
  PointPattern out;
  if (lambda_max == 0) return out;
  lambda_max *= 1.05;

  CounterRng rng(seed);
  std::poisson_distribution<long> count(lambda_max * ground.volume());
  const long n_hom = count(rng);
  for (long i = 0; i < n_hom; ++i) {
    Point s(d);
    for (int a = 0; a < d; ++a) s[a] = ground.lower(a) + ground.side(a) * rng.uniform();
    double keep = intensity(s) / lambda_max;
    if (rng.uniform() < keep) out.points.push_back(std::move(s));
  }
  return out;
}

}  // namespace maxdissim
