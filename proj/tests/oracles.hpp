#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "maxdissim/dissimilarity.hpp"
#include "maxdissim/inference.hpp"

namespace maxdissim::oracle {

// Normal-Inverse-Gamma posterior from the fully stacked design (one row
// per observation), solved densely.
struct DenseOracle {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scale;
  double shape, rate;
};

inline DenseOracle dense_oracle(const GaussianObservations& d, const BasisSet& basis, const GaussianPrior& prior) {
  const int n = d.replicates(), j = static_cast<int>(d.points.size()), k = basis.size() + 1;
  Eigen::MatrixXd x(n * j, k);
  Eigen::VectorXd y(n * j);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < j; ++c) {
      x(i * j + c, 0) = 1;
      x.row(i * j + c).tail(k - 1) = basis.values(d.points[c]).transpose();
      y[i * j + c] = d.values(i, c);
    }
  Eigen::MatrixXd v0inv = Eigen::MatrixXd::Zero(k, k);
  v0inv(0, 0) = 1 / prior.intercept_variance;
  for (int a = 1; a < k; ++a) v0inv(a, a) = 1 / prior.slope_variance;
  Eigen::MatrixXd p = x.transpose() * x + v0inv;
  DenseOracle o;
  o.scale = p.inverse();
  o.mean = p.fullPivLu().solve(x.transpose() * y);
  o.shape = prior.noise_shape + 0.5 * n * j;
  o.rate = prior.noise_rate + 0.5 * (y.squaredNorm() - o.mean.dot(p * o.mean));
  return o;
}

// Dense grid scan of |theta_x - theta_y| on a 1-D ground set, refined by
// golden section around the best cell.
inline double pointwise_max(const DissimilarityObjective& obj, int n = 20001) {
  const double lo = obj.ground().lower(0), hi = obj.ground().upper(0);
  auto at = [&](double s) { return obj.pointwise(Point::Constant(1, s)); };
  int arg = 0;
  double best = 0;
  for (int k = 0; k < n; ++k) {
    double v = at(lo + (hi - lo) * k / (n - 1.0));
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, arg - 1) / (n - 1.0);
  double b = lo + (hi - lo) * std::min(n - 1, arg + 1) / (n - 1.0);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (at(x1) > at(x2)) b = x2;
    else a = x1;
  }
  return std::max(best, at(0.5 * (a + b)));
}

}  // namespace maxdissim::oracle
