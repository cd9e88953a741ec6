#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "maxdissim/basis.hpp"
#include "maxdissim/geometry.hpp"

namespace maxdissim {

/// Replicated curves observed on a common set of points: values(i, j) is
/// replicate i at points[j].
struct GaussianObservations {
  std::vector<Point> points;
  Eigen::MatrixXd values;

  int replicates() const { return static_cast<int>(values.rows()); }
  int total() const { return static_cast<int>(values.size()); }
};

struct PointPattern {
  std::vector<Point> points;
  int count() const { return static_cast<int>(points.size()); }
};

/// Independent Gaussian prior on the coefficients (intercept diffuse) and a
/// Gamma(a, b) prior on the noise precision.
struct GaussianPrior {
  double intercept_variance = 1e6;
  double slope_variance = 1000;
  double noise_shape = 1;
  double noise_rate = 1e-5;

  void validate() const;
  /// Diagonal prior precision of length B + 1.
  Eigen::VectorXd precision(int basis_size) const;
};

enum class Likelihood { GaussianConjugate, PoissonLaplace };

std::string to_string(Likelihood likelihood);
Likelihood likelihood_from_string(const std::string& name);

/// Inverse-Gamma posterior of the noise variance.
struct NoisePosterior {
  double shape;
  double rate;
};

/// Gaussian law over the coefficients.
///
/// Gaussian-conjugate: beta | s2 ~ N(mean, s2 * L L^T), s2 ~ InvGamma(noise),
/// so `covariance_factor` is the factor of the unit-noise scale matrix.
/// Poisson-Laplace: beta ~ N(mean, L L^T) at the posterior mode.
struct CoefficientPosterior {
  Likelihood likelihood = Likelihood::GaussianConjugate;
  BasisSet basis;
  Link link = Link::Identity;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance_factor;  ///< lower triangular
  std::optional<NoisePosterior> noise;
  int bins_per_dim = 0;     ///< Poisson binning used by the fit
  int newton_iterations = 0;

  int dimension() const { return static_cast<int>(mean.size()); }
  /// Marginal covariance of beta (noise integrated out for the conjugate case).
  Eigen::MatrixXd covariance() const;
  FunctionalParameter mean_parameter() const { return {basis, link, mean}; }
};

CoefficientPosterior fit_gaussian(const GaussianObservations& data, const BasisSet& basis,
                                  const GaussianPrior& prior = {});

/// Cell counts of `pattern` on a regular bins_per_dim^d grid over the ground
/// set, row-major with the first axis slowest.
Eigen::VectorXd bin_counts(const PointPattern& pattern, const GroundSet& ground, int bins_per_dim);
std::vector<Point> bin_centers(const GroundSet& ground, int bins_per_dim);

int default_bins(int dim);

CoefficientPosterior fit_poisson(const PointPattern& pattern, const BasisSet& basis,
                                 const GaussianPrior& prior = {}, int bins_per_dim = 0);

/// Gradient of the binned Poisson log posterior at beta.
Eigen::VectorXd poisson_log_posterior_gradient(const PointPattern& pattern, const BasisSet& basis,
                                               const GaussianPrior& prior, int bins_per_dim,
                                               const Eigen::VectorXd& beta);

struct CoefficientDraws {
  Eigen::MatrixXd beta;             ///< m x (B+1)
  Eigen::VectorXd noise_variance;   ///< m entries (Gaussian case), empty otherwise
};

CoefficientDraws sample_coefficients(const CoefficientPosterior& post, int m, std::uint64_t seed);

using TrajectoryPair = std::pair<FunctionalParameter, FunctionalParameter>;

std::vector<TrajectoryPair> posterior_trajectories(const CoefficientPosterior& post_x,
                                                   const CoefficientPosterior& post_y, int m,
                                                   std::uint64_t seed);

/// Pointwise equal-tailed credible interval of theta(t) under the posterior.
/// Exact Student-t for the conjugate fit, Gaussian for the Laplace fit.
std::pair<double, double> credible_band(const CoefficientPosterior& post, const Point& t,
                                        double level = 0.95);

/// -2 log likelihood at (beta, noise variance). The noise variance is ignored
/// for Poisson fits.
double deviance(const CoefficientPosterior& post, const GaussianObservations& data,
                const Eigen::VectorXd& beta, double noise_variance);
double deviance(const CoefficientPosterior& post, const PointPattern& pattern,
                const Eigen::VectorXd& beta);

/// DIC = 2 mean_k D(draw_k) - D(posterior mean).
double dic(const CoefficientPosterior& post, const GaussianObservations& data, int m_draws,
           std::uint64_t seed);
double dic(const CoefficientPosterior& post, const PointPattern& pattern, int m_draws,
           std::uint64_t seed);

struct DicCandidate {
  int size;
  double dic;
  bool ok;
  std::string error;
};

struct DicSelection {
  CoefficientPosterior fit;
  int size = 0;
  std::vector<DicCandidate> candidates;
};

DicSelection select_basis_by_dic(const GaussianObservations& data, const GroundSet& ground,
                                 const std::vector<int>& candidate_sizes,
                                 const GaussianPrior& prior = {}, int degree = 3,
                                 int m_draws = 500, std::uint64_t seed = 0);
DicSelection select_basis_by_dic(const PointPattern& pattern, const GroundSet& ground,
                                 const std::vector<int>& candidate_sizes,
                                 const GaussianPrior& prior = {}, int degree = 3,
                                 int bins_per_dim = 0, int m_draws = 500, std::uint64_t seed = 0);

}  // namespace maxdissim
