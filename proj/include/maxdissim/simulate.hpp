#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "maxdissim/basis.hpp"
#include "maxdissim/geometry.hpp"
#include "maxdissim/inference.hpp"

namespace maxdissim {

struct MaternParams {
  double sigma = 1;
  double nu = 1;
  double ell = 1;

  void validate() const;
};

/// sigma^2 2^(1-nu)/Gamma(nu) (sqrt(2 nu) d/ell)^nu K_nu(sqrt(2 nu) d/ell); sigma^2 at d = 0.
double matern_cov(double dist, const MaternParams& params);

/// Scenario-1 observation grid {0/J, ..., (J-1)/J}.
std::vector<double> scenario1_grid(int j);

/// n replicates of a Gaussian process with the given mean and Matérn
/// covariance on a 1-D grid, plus an optional white-noise nugget variance.
GaussianObservations sample_gp(const AnalyticParameter& mean, const MaternParams& params,
                               const std::vector<double>& grid, int n, std::uint64_t seed,
                               double nugget = 0);

/// (theta_x(t), theta_y(t)) for the oscillating mean pair with baseline
/// b(t) = exp{10 (t - 0.5)^2} / 2.
std::pair<double, double> scenario1_means(double t);
std::pair<AnalyticParameter, AnalyticParameter> scenario1_parameters();

struct Scenario2Config {
  double gamma = 25;
  double delta = 2;

  void validate() const;
  GroundSet ground() const { return GroundSet::square(-3, 3); }
};

/// lambda_x(t) = gamma exp{-(t1^2 + t2^2)/2}, lambda_y = delta lambda_x.
std::pair<AnalyticParameter, AnalyticParameter> scenario2_intensity(const Scenario2Config& cfg);

/// Inhomogeneous Poisson process on T by thinning a homogeneous process
/// whose rate is 1.05 x the maximum of the intensity over a scan grid.
PointPattern sample_poisson_process(const Parameter& intensity, const GroundSet& ground, std::uint64_t seed,
                                    int scan_per_dim = 0);

}  // namespace maxdissim
