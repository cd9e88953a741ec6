#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "maxdissim/inference.hpp"
#include "maxdissim/rng.hpp"
#include "maxdissim/simulate.hpp"
#include "oracles.hpp"

using namespace maxdissim;

namespace {

Point pt(double a) { return Point::Constant(1, a); }

GaussianObservations random_observations(std::uint64_t seed, int n, int j) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  GaussianObservations d;
  for (int k = 0; k < j; ++k) d.points.push_back(pt((k + 0.5) / j));
  d.values.resize(n, j);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < j; ++k) d.values(i, k) = std::sin(6 * d.points[k][0]) + 0.3 * z(gen);
  return d;
}

PointPattern homogeneous_pattern(const GroundSet& g, double rate, std::uint64_t seed) {
  Parameter lam = AnalyticParameter{[rate](const Point&) { return rate; }, "flat"};
  return sample_poisson_process(lam, g, seed);
}

}  // namespace

TEST_CASE("gaussian posterior matches the dense normal equations") {
  GaussianPrior prior;
  for (int trial = 0; trial < 6; ++trial) {
    auto d = random_observations(100 + trial, 3 + trial, 7 + trial);
    auto basis = BasisSet::uniform(GroundSet::interval(0, 1), 3 + trial);
    auto post = fit_gaussian(d, basis, prior);
    auto o = oracle::dense_oracle(d, basis, prior);
    CHECK((post.mean - o.mean).lpNorm<Eigen::Infinity>() < 1e-8);
    Eigen::MatrixXd s = post.covariance_factor * post.covariance_factor.transpose();
    CHECK((s - o.scale).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(post.noise->shape == doctest::Approx(o.shape).epsilon(1e-12));
    CHECK(post.noise->rate == doctest::Approx(o.rate).epsilon(1e-8));
  }
}

TEST_CASE("gaussian fit edge cases") {
  GroundSet t = GroundSet::interval(0, 1);
  GaussianObservations d;
  for (int k = 0; k < 10; ++k) d.points.push_back(pt(k / 10.0));
  d.values = Eigen::MatrixXd::Constant(4, 10, 5.0);
  auto post = fit_gaussian(d, BasisSet::constant(t));
  CHECK(post.mean[0] == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(post.noise->rate < 1e-3);

  auto wiggly = random_observations(3, 5, 12);
  GaussianPrior tight;
  tight.slope_variance = 1e-12;
  auto shrunk = fit_gaussian(wiggly, BasisSet::uniform(t, 6), tight);
  CHECK(shrunk.mean.tail(6).lpNorm<Eigen::Infinity>() < 1e-6);

  GaussianObservations bad = d;
  bad.values(1, 2) = std::nan("");
  CHECK_THROWS_AS(fit_gaussian(bad, BasisSet::constant(t)), InputError);
  GaussianPrior neg;
  neg.noise_rate = 0;
  CHECK_THROWS_AS(fit_gaussian(d, BasisSet::constant(t), neg), InputError);
}

TEST_CASE("scenario-1 posterior mean lies inside the credible bands") {
  auto [mx, my] = scenario1_parameters();
  auto data = sample_gp(mx, MaternParams{}, scenario1_grid(20), 200, 17);
  auto post = fit_gaussian(data, BasisSet::uniform(GroundSet::interval(0, 1), 16));
  int covered = 0;
  for (const auto& t : data.points) {
    auto [lo, hi] = credible_band(post, t);
    covered += (mx(t) >= lo && mx(t) <= hi) ? 1 : 0;
  }
  CHECK(covered >= 18);
}

TEST_CASE("poisson fit on homogeneous patterns") {
  GroundSet t = GroundSet::square(0, 2);
  auto pattern = homogeneous_pattern(t, 30, 4);
  auto post = fit_poisson(pattern, BasisSet::constant(t));
  const double mle = std::log(pattern.count() / t.volume());
  const double sd = std::sqrt(post.covariance()(0, 0));
  CHECK(std::abs(post.mean[0] - mle) < 2 * sd);
  CHECK(post.link == Link::Log);
  CHECK(post.bins_per_dim == 32);

  auto empty = fit_poisson(PointPattern{}, BasisSet::constant(t));
  CHECK(std::isfinite(empty.mean[0]));
  CHECK(empty.mean[0] < std::log(1 / t.volume()));

  auto line = GroundSet::interval(0, 1);
  auto p1 = homogeneous_pattern(line, 200, 9);
  auto f1 = fit_poisson(p1, BasisSet::uniform(line, 5));
  CHECK(f1.bins_per_dim == 128);
  for (double x : {0.1, 0.5, 0.9}) CHECK(f1.mean_parameter()(pt(x)) == doctest::Approx(200).epsilon(0.35));
}

TEST_CASE("laplace mode is stationary") {
  Scenario2Config cfg{50, 2};
  auto [lx, ly] = scenario2_intensity(cfg);
  auto px = sample_poisson_process(lx, cfg.ground(), 21);
  GaussianPrior prior;
  for (int size : {4, 6}) {
    auto basis = BasisSet::uniform(cfg.ground(), size);
    auto post = fit_poisson(px, basis, prior);
    auto g = poisson_log_posterior_gradient(px, basis, prior, post.bins_per_dim, post.mean);
    CHECK(g.lpNorm<Eigen::Infinity>() < 1e-6);
    Eigen::MatrixXd s = post.covariance();
    CHECK((s - s.transpose()).norm() < 1e-12);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(s).info() == Eigen::Success);
  }
}

TEST_CASE("scenario-2 intensity ratio is recovered") {
  Scenario2Config cfg{50, 2};
  auto [lx, ly] = scenario2_intensity(cfg);
  auto basis = BasisSet::uniform(cfg.ground(), 5);
  auto fx = fit_poisson(sample_poisson_process(lx, cfg.ground(), 31), basis).mean_parameter();
  auto fy = fit_poisson(sample_poisson_process(ly, cfg.ground(), 32), basis).mean_parameter();
  // Ratio of integrated intensities on a midpoint grid.
  double sx = 0, sy = 0;
  const int n = 60;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Point s(2);
      s << -3 + 6 * (i + 0.5) / n, -3 + 6 * (j + 0.5) / n;
      sx += fx(s);
      sy += fy(s);
    }
  CHECK(sy / sx >= 1.6);
  CHECK(sy / sx <= 2.4);
}

TEST_CASE("coefficient sampling") {
  auto d = random_observations(8, 6, 15);
  auto post = fit_gaussian(d, BasisSet::uniform(GroundSet::interval(0, 1), 6));
  const int m = 10000;
  auto draws = sample_coefficients(post, m, 99);
  Eigen::MatrixXd cov = post.covariance();
  for (int k = 0; k < post.dimension(); ++k) {
    double mean = draws.beta.col(k).mean();
    CHECK(std::abs(mean - post.mean[k]) < 4 * std::sqrt(cov(k, k) / m));
  }
  CHECK(draws.noise_variance.size() == m);
  CHECK((draws.noise_variance.array() > 0).all());

  auto again = sample_coefficients(post, 50, 99);
  CHECK(again.beta == draws.beta.topRows(50));
  CHECK(sample_coefficients(post, 50, 100).beta != again.beta);

  CoefficientPosterior point = post;
  point.covariance_factor.setZero();
  auto fixed = sample_coefficients(point, 20, 1);
  for (int i = 0; i < 20; ++i) CHECK(fixed.beta.row(i).transpose() == post.mean);
  CHECK_THROWS_AS(sample_coefficients(post, 0, 1), InputError);
}

TEST_CASE("posterior trajectories") {
  GroundSet t = GroundSet::interval(0, 1);
  auto d = random_observations(12, 5, 10);
  auto post = fit_gaussian(d, BasisSet::uniform(t, 5));

  CoefficientPosterior degenerate = post;
  degenerate.covariance_factor.setZero();
  for (const auto& [x, y] : posterior_trajectories(degenerate, degenerate, 5, 3)) {
    CHECK(x.coefficients == post.mean);
    CHECK(y.coefficients == post.mean);
  }

  auto pp = fit_poisson(homogeneous_pattern(t, 80, 2), BasisSet::uniform(t, 4));
  for (const auto& [x, y] : posterior_trajectories(pp, pp, 20, 5))
    for (double s : {0.0, 0.3, 1.0}) {
      CHECK(x(pt(s)) > 0);
      CHECK(y(pt(s)) > 0);
    }

  GaussianObservations shifted = d;
  for (auto& p : shifted.points) p[0] *= 2;
  auto far = fit_gaussian(shifted, BasisSet::uniform(GroundSet::interval(0, 2), 5));
  CHECK_THROWS_AS(posterior_trajectories(post, far, 3, 1), InputError);

  // Independent sub-streams: X and Y draws differ even for equal posteriors.
  auto tr = posterior_trajectories(post, post, 2, 7);
  CHECK(tr[0].first.coefficients != tr[0].second.coefficients);
}

TEST_CASE("trajectory quantiles match the closed-form bands") {
  GroundSet t = GroundSet::interval(0, 1);
  auto d = random_observations(14, 3, 9);
  auto post = fit_gaussian(d, BasisSet::uniform(t, 5));
  auto tr = posterior_trajectories(post, post, 1000, 11);
  for (double s : {0.05, 0.4, 0.77}) {
    std::vector<double> v;
    for (const auto& p : tr) v.push_back(p.first(pt(s)));
    std::sort(v.begin(), v.end());
    auto [lo, hi] = credible_band(post, pt(s));
    const double width = hi - lo;
    CHECK(std::abs(v[24] - lo) < 0.05 * width + 0.05);
    CHECK(std::abs(v[974] - hi) < 0.05 * width + 0.05);
  }
}

TEST_CASE("deviance and DIC") {
  GroundSet t = GroundSet::interval(0, 1);
  auto d = random_observations(20, 4, 10);
  auto post = fit_gaussian(d, BasisSet::uniform(t, 6));

  GaussianObservations twice = d;
  twice.values.resize(8, 10);
  twice.values << d.values, d.values;
  const double s2 = 0.09;
  CHECK(deviance(post, twice, post.mean, s2) == doctest::Approx(2 * deviance(post, d, post.mean, s2)).epsilon(1e-12));

  // Point mass: draws equal the mean, so p_D vanishes.
  CoefficientPosterior point = post;
  point.covariance_factor.setZero();
  point.noise = NoisePosterior{1e12, 0.09 * 1e12};
  const double dm = deviance(point, d, point.mean, 0.09);
  CHECK(dic(point, d, 200, 5) == doctest::Approx(dm).epsilon(1e-6));

  auto pattern = homogeneous_pattern(t, 100, 3);
  auto pp = fit_poisson(pattern, BasisSet::uniform(t, 4));
  CoefficientPosterior ppoint = pp;
  ppoint.covariance_factor.setZero();
  CHECK(dic(ppoint, pattern, 50, 1) == doctest::Approx(deviance(ppoint, pattern, pp.mean)).epsilon(1e-12));
  CHECK(dic(pp, pattern, 400, 1) > deviance(pp, pattern, pp.mean));
}

TEST_CASE("DIC prefers the true complexity over a misfit") {
  auto [mx, my] = scenario1_parameters();
  GroundSet t = GroundSet::interval(0, 1);
  int wins = 0;
  for (int r = 0; r < 100; ++r) {
    auto data = sample_gp(mx, MaternParams{}, scenario1_grid(20), 20, derive_seed(500, r));
    auto good = fit_gaussian(data, BasisSet::uniform(t, 12));
    auto misfit = fit_gaussian(data, BasisSet::uniform(t, 1));
    wins += dic(good, data, 200, r) < dic(misfit, data, 200, r) ? 1 : 0;
  }
  CHECK(wins >= 90);
}

TEST_CASE("DIC basis selection") {
  auto [mx, my] = scenario1_parameters();
  GroundSet t = GroundSet::interval(0, 1);
  auto data = sample_gp(mx, MaternParams{}, scenario1_grid(20), 10, 77);

  auto single = select_basis_by_dic(data, t, {7}, {}, 3, 200, 1);
  CHECK(single.size == 7);
  CHECK(single.candidates.size() == 1);

  int picks = 0;
  for (int r = 0; r < 20; ++r) {
    auto d = sample_gp(mx, MaternParams{}, scenario1_grid(20), 10, derive_seed(900, r));
    picks += select_basis_by_dic(d, t, {1, 15}, {}, 3, 200, r).size == 15 ? 1 : 0;
  }
  CHECK(picks >= 18);

  auto a = select_basis_by_dic(data, t, {15, 15}, {}, 3, 200, 4);
  auto b = select_basis_by_dic(data, t, {15, 15}, {}, 3, 200, 4);
  CHECK(a.size == 15);
  CHECK(a.candidates[0].dic == a.candidates[1].dic);
  CHECK(a.fit.mean == b.fit.mean);

  CHECK_THROWS_AS(select_basis_by_dic(data, t, {}, {}, 3, 200, 4), InputError);
}

TEST_CASE("DIC selection on point patterns") {
  Scenario2Config cfg{25, 2};
  auto [lx, ly] = scenario2_intensity(cfg);
  auto px = sample_poisson_process(lx, cfg.ground(), 8);
  // log lambda is quadratic, so the quadratic tensor spline (size 3) is exact.
  auto sel = select_basis_by_dic(px, cfg.ground(), {1, 3}, {}, 3, 0, 200, 2);
  CHECK(sel.candidates.size() == 2);
  CHECK(sel.size == 3);
  CHECK(sel.fit.likelihood == Likelihood::PoissonLaplace);
}
