#include "maxdissim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "maxdissim/rng.hpp"

namespace maxdissim {

void GaussianPrior::validate() const {
  require(intercept_variance > 0 && slope_variance > 0 && noise_shape > 0 && noise_rate > 0,
          "GaussianPrior: all hyperparameters must be strictly positive");
}

Eigen::VectorXd GaussianPrior::precision(int basis_size) const {
  Eigen::VectorXd q = Eigen::VectorXd::Constant(basis_size + 1, 1.0 / slope_variance);
  q[0] = 1.0 / intercept_variance;
  return q;
}

std::string to_string(Likelihood likelihood) {
  return likelihood == Likelihood::PoissonLaplace ? "poisson-laplace" : "gaussian-conjugate";
}

Likelihood likelihood_from_string(const std::string& name) {
  if (name == "gaussian-conjugate" || name == "gaussian") return Likelihood::GaussianConjugate;
  if (name == "poisson-laplace" || name == "poisson") return Likelihood::PoissonLaplace;
  throw InputError("unknown likelihood '" + name + "'");
}

Eigen::MatrixXd CoefficientPosterior::covariance() const {
  Eigen::MatrixXd s = covariance_factor * covariance_factor.transpose();
  if (likelihood == Likelihood::GaussianConjugate && noise) {
    double scale = noise->shape > 1 ? noise->rate / (noise->shape - 1) : noise->rate / noise->shape;
    s *= scale;
  }
  return s;
}

namespace {

// Lower factor of the inverse of an SPD matrix.
Eigen::MatrixXd inverse_factor(const Eigen::MatrixXd& precision, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + ": posterior precision is not SPD");
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
  cov = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> factor(cov);
  if (factor.info() != Eigen::Success) throw NumericalError(std::string(what) + ": posterior covariance is not SPD");
  return factor.matrixL();
}

}  // namespace

CoefficientPosterior fit_gaussian(const GaussianObservations& data, const BasisSet& basis,
                                  const GaussianPrior& prior) {
  prior.validate();
  require(!data.points.empty() && data.values.rows() >= 1, "fit_gaussian: empty data");
  require(static_cast<std::size_t>(data.values.cols()) == data.points.size(),
          "fit_gaussian: values must have one column per point");
  require(data.values.allFinite(), "fit_gaussian: observations must be finite");

  // Every replicate shares the same points, so the stacked normal equations
  // collapse onto the per-point design.
  const Eigen::MatrixXd x = design_matrix(basis, data.points);
  const double n = data.replicates();
  const Eigen::VectorXd column_sums = data.values.colwise().sum().transpose();
  Eigen::MatrixXd precision = n * (x.transpose() * x);
  precision.diagonal() += prior.precision(basis.size());
  const Eigen::VectorXd xty = x.transpose() * column_sums;

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("fit_gaussian: posterior precision is not SPD");

  CoefficientPosterior post;
  post.likelihood = Likelihood::GaussianConjugate;
  post.basis = basis;
  post.link = Link::Identity;
  post.mean = llt.solve(xty);
  post.covariance_factor = inverse_factor(precision, "fit_gaussian");

  const double yty = data.values.squaredNorm();
  const double quad = post.mean.dot(precision * post.mean);
  const double residual = std::max(0.0, yty - quad);
  post.noise = NoisePosterior{prior.noise_shape + 0.5 * data.total(), prior.noise_rate + 0.5 * residual};
  return post;
}

int default_bins(int dim) { return dim == 1 ? 128 : 32; }

std::vector<Point> bin_centers(const GroundSet& ground, int bins_per_dim) {
  const int d = ground.dim();
  require(d == 1 || d == 2, "binning supports 1-D and 2-D ground sets");
  std::vector<Point> out;
  auto coord = [&](int axis, int i) {
    return ground.lower(axis) + (i + 0.5) * ground.side(axis) / bins_per_dim;
  };
  if (d == 1) {
    for (int i = 0; i < bins_per_dim; ++i) out.push_back(Point::Constant(1, coord(0, i)));
  } else {
    for (int i = 0; i < bins_per_dim; ++i)
      for (int j = 0; j < bins_per_dim; ++j) out.push_back(Eigen::Vector2d(coord(0, i), coord(1, j)));
  }
  return out;
}

Eigen::VectorXd bin_counts(const PointPattern& pattern, const GroundSet& ground, int bins_per_dim) {
  const int d = ground.dim();
  require(d == 1 || d == 2, "binning supports 1-D and 2-D ground sets");
  require(bins_per_dim >= 2, "bins_per_dim must be >= 2");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(d == 1 ? bins_per_dim : bins_per_dim * bins_per_dim);
  auto cell = [&](const Point& s, int axis) {
    int i = static_cast<int>(std::floor((s[axis] - ground.lower(axis)) / ground.side(axis) * bins_per_dim));
    return std::clamp(i, 0, bins_per_dim - 1);
  };
  for (const auto& s : pattern.points) {
    require(s.size() == d && ground.contains(s), "point pattern: point outside the ground set");
    int k = d == 1 ? cell(s, 0) : cell(s, 0) * bins_per_dim + cell(s, 1);
    counts[k] += 1;
  }
  return counts;
}

namespace {

struct BinnedPoisson {
  Eigen::MatrixXd x;
  Eigen::VectorXd counts;
  double log_cell_volume;
  Eigen::VectorXd prior_precision;

  BinnedPoisson(const PointPattern& pattern, const BasisSet& basis, const GaussianPrior& prior, int bins)
      : x(design_matrix(basis, bin_centers(basis.ground(), bins))),
        counts(bin_counts(pattern, basis.ground(), bins)),
        log_cell_volume(std::log(basis.ground().volume()) - basis.ground().dim() * std::log(double(bins))),
        prior_precision(prior.precision(basis.size())) {}

  Eigen::VectorXd eta(const Eigen::VectorXd& beta) const {
    return (x * beta).array() + log_cell_volume;
  }

  double log_posterior(const Eigen::VectorXd& beta) const {
    Eigen::VectorXd e = eta(beta);
    return counts.dot(e) - e.array().exp().sum() -
           0.5 * (prior_precision.array() * beta.array().square()).sum();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const {
    Eigen::VectorXd mu = eta(beta).array().exp();
    return x.transpose() * (counts - mu) - prior_precision.cwiseProduct(beta);
  }

  Eigen::MatrixXd neg_hessian(const Eigen::VectorXd& beta) const {
    Eigen::VectorXd mu = eta(beta).array().exp();
    Eigen::MatrixXd h = x.transpose() * mu.asDiagonal() * x;
    h.diagonal() += prior_precision;
    return h;
  }
};

int resolve_bins(const BasisSet& basis, int bins_per_dim) {
  int bins = bins_per_dim > 0 ? bins_per_dim : default_bins(basis.ground().dim());
  require(bins >= 2, "fit_poisson: bins_per_dim must be >= 2");
  return bins;
}

}  // namespace

Eigen::VectorXd poisson_log_posterior_gradient(const PointPattern& pattern, const BasisSet& basis,
                                               const GaussianPrior& prior, int bins_per_dim,
                                               const Eigen::VectorXd& beta) {
  BinnedPoisson model(pattern, basis, prior, resolve_bins(basis, bins_per_dim));
  return model.gradient(beta);
}

CoefficientPosterior fit_poisson(const PointPattern& pattern, const BasisSet& basis,
                                 const GaussianPrior& prior, int bins_per_dim) {
  prior.validate();
  const int bins = resolve_bins(basis, bins_per_dim);
  BinnedPoisson model(pattern, basis, prior, bins);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(basis.size() + 1);
  beta[0] = std::log(std::max(1, pattern.count()) / basis.ground().volume());

  constexpr int kMaxIterations = 100;
  constexpr int kMaxHalvings = 30;
  constexpr double kTolerance = 1e-8;
  std::ostringstream trace;
  double lp = model.log_posterior(beta);
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIterations; ++iter) {
    Eigen::VectorXd g = model.gradient(beta);
    double gnorm = g.lpNorm<Eigen::Infinity>();
    trace << " [" << iter << "] |grad|=" << gnorm << " logpost=" << lp;
    if (gnorm < kTolerance) {
      converged = true;
      break;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(model.neg_hessian(beta));
    if (llt.info() != Eigen::Success) throw NumericalError("fit_poisson: curvature not SPD;" + trace.str());
    Eigen::VectorXd step = llt.solve(g);
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, scale *= 0.5) {
      Eigen::VectorXd candidate = beta + scale * step;
      double lp_new = model.log_posterior(candidate);
      // Near the mode the true gain falls below double resolution.
      const double slack = 64 * std::numeric_limits<double>::epsilon() * (1 + std::abs(lp));
      if (std::isfinite(lp_new) && lp_new >= lp - slack) {
        beta = std::move(candidate);
        lp = lp_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent direction left: accept if already at numerical stationarity.
      if (gnorm < 1e-6) {
        converged = true;
        break;
      }
      throw NumericalError("fit_poisson: line search failed;" + trace.str());
    }
  }
  if (!converged) throw NumericalError("fit_poisson: Newton did not converge;" + trace.str());

  CoefficientPosterior post;
  post.likelihood = Likelihood::PoissonLaplace;
  post.basis = basis;
  post.link = Link::Log;
  post.mean = beta;
  post.covariance_factor = inverse_factor(model.neg_hessian(beta), "fit_poisson");
  post.bins_per_dim = bins;
  post.newton_iterations = iter;
  return post;
}

CoefficientDraws sample_coefficients(const CoefficientPosterior& post, int m, std::uint64_t seed) {
  require(m >= 1, "sample_coefficients: m must be >= 1");
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  const int k = post.dimension();
  CoefficientDraws draws;
  draws.beta.resize(m, k);
  const bool conjugate = post.likelihood == Likelihood::GaussianConjugate && post.noise.has_value();
  if (conjugate) draws.noise_variance.resize(m);
  Eigen::VectorXd z(k);
  for (int i = 0; i < m; ++i) {
    double scale = 1.0;
    if (conjugate) {
      std::gamma_distribution<double> precision(post.noise->shape, 1.0 / post.noise->rate);
      double s2 = 1.0 / precision(rng);
      draws.noise_variance[i] = s2;
      scale = std::sqrt(s2);
    }
    for (int j = 0; j < k; ++j) z[j] = normal(rng);
    Eigen::VectorXd lz = post.covariance_factor.triangularView<Eigen::Lower>() * z;
    draws.beta.row(i) = (post.mean + scale * lz).transpose();
  }
  return draws;
}

std::vector<TrajectoryPair> posterior_trajectories(const CoefficientPosterior& post_x,
                                                   const CoefficientPosterior& post_y, int m,
                                                   std::uint64_t seed) {
  require(post_x.basis.ground() == post_y.basis.ground(),
          "posterior_trajectories: posteriors must share the ground set");
  CoefficientDraws dx = sample_coefficients(post_x, m, derive_seed(seed, 1));
  CoefficientDraws dy = sample_coefficients(post_y, m, derive_seed(seed, 2));
  std::vector<TrajectoryPair> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k)
    out.emplace_back(FunctionalParameter(post_x.basis, post_x.link, dx.beta.row(k).transpose()),
                     FunctionalParameter(post_y.basis, post_y.link, dy.beta.row(k).transpose()));
  return out;
}

std::pair<double, double> credible_band(const CoefficientPosterior& post, const Point& t, double level) {
  require(level > 0 && level < 1, "credible_band: level must lie in (0, 1)");
  Eigen::VectorXd x(post.dimension());
  x[0] = 1.0;
  x.tail(post.dimension() - 1) = post.basis.values(t);
  const double center = x.dot(post.mean);
  const Eigen::VectorXd lx = post.covariance_factor.transpose() * x;
  double spread = lx.norm();
  double q;
  const double tail = 0.5 * (1 + level);
  if (post.likelihood == Likelihood::GaussianConjugate && post.noise) {
    spread *= std::sqrt(post.noise->rate / post.noise->shape);
    boost::math::students_t dist(2 * post.noise->shape);
    q = boost::math::quantile(dist, tail);
  } else {
    q = boost::math::quantile(boost::math::normal(), tail);
  }
  return {apply_inverse_link(post.link, center - q * spread), apply_inverse_link(post.link, center + q * spread)};
}

double deviance(const CoefficientPosterior& post, const GaussianObservations& data,
                const Eigen::VectorXd& beta, double noise_variance) {
  require(noise_variance > 0, "deviance: noise variance must be positive");
  const Eigen::MatrixXd x = design_matrix(post.basis, data.points);
  const Eigen::VectorXd fitted = x * beta;
  const Eigen::VectorXd column_sums = data.values.colwise().sum().transpose();
  const double rss = data.values.squaredNorm() - 2 * column_sums.dot(fitted) +
                     data.replicates() * fitted.squaredNorm();
  return data.total() * std::log(2 * std::numbers::pi * noise_variance) + std::max(0.0, rss) / noise_variance;
}

double deviance(const CoefficientPosterior& post, const PointPattern& pattern, const Eigen::VectorXd& beta) {
  GaussianPrior unused;
  BinnedPoisson model(pattern, post.basis, unused, resolve_bins(post.basis, post.bins_per_dim));
  Eigen::VectorXd e = model.eta(beta);
  double ll = 0;
  for (Eigen::Index k = 0; k < e.size(); ++k)
    ll += model.counts[k] * e[k] - std::exp(e[k]) - std::lgamma(model.counts[k] + 1);
  return -2 * ll;
}

double dic(const CoefficientPosterior& post, const GaussianObservations& data, int m_draws,
           std::uint64_t seed) {
  require(post.noise.has_value(), "dic: Gaussian data needs a conjugate posterior");
  CoefficientDraws draws = sample_coefficients(post, m_draws, seed);
  double mean_dev = 0;
  for (int k = 0; k < m_draws; ++k)
    mean_dev += deviance(post, data, draws.beta.row(k).transpose(), draws.noise_variance[k]);
  mean_dev /= m_draws;
  const double s2_mean = post.noise->shape > 1 ? post.noise->rate / (post.noise->shape - 1)
                                               : draws.noise_variance.mean();
  return 2 * mean_dev - deviance(post, data, post.mean, s2_mean);
}

double dic(const CoefficientPosterior& post, const PointPattern& pattern, int m_draws, std::uint64_t seed) {
  require(post.likelihood == Likelihood::PoissonLaplace, "dic: point data needs a Poisson posterior");
  CoefficientDraws draws = sample_coefficients(post, m_draws, seed);
  double mean_dev = 0;
  for (int k = 0; k < m_draws; ++k) mean_dev += deviance(post, pattern, draws.beta.row(k).transpose());
  mean_dev /= m_draws;
  return 2 * mean_dev - deviance(post, pattern, post.mean);
}

namespace {

// Bounding box of the observation points; axes where the points do not
// spread fall back to the ground set.
GroundSet observed_span(const std::vector<Point>& points, const GroundSet& ground) {
  Eigen::VectorXd lo = ground.lower(), hi = ground.upper();
  if (points.empty()) return ground;
  Eigen::VectorXd plo = points.front(), phi = points.front();
  for (const auto& t : points) {
    plo = plo.cwiseMin(t);
    phi = phi.cwiseMax(t);
  }
  for (int k = 0; k < ground.dim(); ++k)
    if (phi[k] > plo[k]) {
      lo[k] = std::max(lo[k], plo[k]);
      hi[k] = std::min(hi[k], phi[k]);
    }
  return GroundSet(lo, hi);
}

template <typename Fit, typename Score>
DicSelection select_by_dic(const std::vector<int>& sizes, Fit&& fit, Score&& score) {
  require(!sizes.empty(), "select_basis_by_dic: empty candidate list");
  DicSelection sel;
  std::optional<CoefficientPosterior> best;
  double best_dic = std::numeric_limits<double>::infinity();
  int best_size = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    DicCandidate cand{sizes[i], std::numeric_limits<double>::quiet_NaN(), false, {}};
    try {
      CoefficientPosterior post = fit(sizes[i]);
      cand.dic = score(post, sizes[i]);
      cand.ok = std::isfinite(cand.dic);
      if (!cand.ok) cand.error = "non-finite DIC";
      if (cand.ok && (cand.dic < best_dic || (cand.dic == best_dic && sizes[i] < best_size))) {
        best_dic = cand.dic;
        best_size = sizes[i];
        best = std::move(post);
      }
    } catch (const std::exception& e) {
      cand.error = e.what();
    }
    sel.candidates.push_back(cand);
  }
  if (!best) {
    std::string msg = "select_basis_by_dic: every candidate failed";
    for (const auto& c : sel.candidates) msg += "; size " + std::to_string(c.size) + ": " + c.error;
    throw NumericalError(msg);
  }
  sel.fit = std::move(*best);
  sel.size = best_size;
  return sel;
}

}  // namespace

DicSelection select_basis_by_dic(const GaussianObservations& data, const GroundSet& ground,
                                 const std::vector<int>& candidate_sizes, const GaussianPrior& prior,
                                 int degree, int m_draws, std::uint64_t seed) {
  const GroundSet span = observed_span(data.points, ground);
  return select_by_dic(
      candidate_sizes,
      [&](int size) { return fit_gaussian(data, BasisSet::uniform(ground, size, degree, span), prior); },
      [&](const CoefficientPosterior& post, int size) { return dic(post, data, m_draws, derive_seed(seed, size)); });
}

DicSelection select_basis_by_dic(const PointPattern& pattern, const GroundSet& ground,
                                 const std::vector<int>& candidate_sizes, const GaussianPrior& prior,
                                 int degree, int bins_per_dim, int m_draws, std::uint64_t seed) {
  return select_by_dic(
      candidate_sizes,
      [&](int size) { return fit_poisson(pattern, BasisSet::uniform(ground, size, degree), prior, bins_per_dim); },
      [&](const CoefficientPosterior& post, int size) { return dic(post, pattern, m_draws, derive_seed(seed, size)); });
}

}  // namespace maxdissim
