#pragma once

#include <functional>

#include <Eigen/Dense>

namespace maxdissim {

struct NelderMeadOptions {
  double tolerance = 1e-6;  ///< stop when the simplex diameter drops below this
  int max_evaluations = 2000;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;
  int evaluations;
  bool converged;
};

/// Maximizes `f` over the box [lower, upper] with the Nelder-Mead simplex;
/// every trial point is clamped into the box before evaluation. `step` sets
/// the initial simplex edge along each coordinate.
NelderMeadResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                      const NelderMeadOptions& options = {});

}  // namespace maxdissim
