#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "maxdissim/geometry.hpp"

namespace maxdissim {

/// Clamped (open uniform) B-spline basis along one axis.
class SplineAxis {
 public:
  SplineAxis() = default;
  SplineAxis(double lo, double hi, int degree, std::vector<double> interior_knots);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  const std::vector<double>& interior_knots() const { return interior_; }
  const std::vector<double>& knots() const { return knots_; }

  /// Index of the knot span containing x (x clamped to the axis).
  int span(double x) const;
  /// The degree+1 nonzero basis values at x; returns the first index.
  int nonzero(double x, double* values) const;

 private:
  double lo_ = 0, hi_ = 1;
  int degree_ = 0;
  std::vector<double> interior_;
  std::vector<double> knots_;
};

enum class BasisKind { Constant, BSpline1d, TensorBSpline2d };

/// The phi_i of the basis expansion; the intercept is not part of the set.
class BasisSet {
 public:
  /// Intercept only (B = 0).
  static BasisSet constant(const GroundSet& ground);
  static BasisSet bspline(const GroundSet& ground, int degree, std::vector<double> interior_knots);
  static BasisSet tensor_bspline(const GroundSet& ground, int degree,
                                 std::array<std::vector<double>, 2> interior_knots);
  /// `size` basis functions per axis with uniform interior knots. When
  /// size <= degree the degree drops to size - 1 (size 1 is a constant spline).
  static BasisSet uniform(const GroundSet& ground, int size_per_dim, int degree = 3);
  /// As above, with the interior knots spread uniformly over `knot_span`, a
  /// sub-box of the ground set such as the range of the observed points.
  static BasisSet uniform(const GroundSet& ground, int size_per_dim, int degree, const GroundSet& knot_span);

  BasisKind kind() const { return kind_; }
  const GroundSet& ground() const { return ground_; }
  int degree() const { return degree_; }
  /// B, the number of non-intercept basis functions.
  int size() const;
  const std::vector<SplineAxis>& axes() const { return axes_; }
  std::vector<std::vector<double>> interior_knots() const;

  static constexpr int kMaxNonzero = 64;
  /// Nonzero phi_i(t): indices [0, B) and values; returns the count.
  int nonzero(const Point& t, int* index, double* value) const;
  /// Dense vector of all B basis values at t.
  Eigen::VectorXd values(const Point& t) const;

  bool operator==(const BasisSet& other) const;

 private:
  BasisKind kind_ = BasisKind::Constant;
  GroundSet ground_;
  int degree_ = 0;
  std::vector<SplineAxis> axes_;
};

/// n x (B+1) design matrix: column 0 is the intercept.
Eigen::MatrixXd design_matrix(const BasisSet& basis, const std::vector<Point>& points);

enum class Link { Identity, Log };

inline double apply_inverse_link(Link link, double eta) {
  return link == Link::Log ? std::exp(eta) : eta;
}

std::string to_string(Link link);
Link link_from_string(const std::string& name);

/// theta(t) = g(beta_0 + sum_i beta_i phi_i(t)).
struct FunctionalParameter {
  BasisSet basis;
  Link link = Link::Identity;
  Eigen::VectorXd coefficients;  ///< length B + 1, intercept first

  FunctionalParameter(BasisSet b, Link l, Eigen::VectorXd coef);

  double linear_predictor(const Point& t) const;
  double operator()(const Point& t) const { return apply_inverse_link(link, linear_predictor(t)); }
};

/// Checks t against the ground set and evaluates.
double evaluate(const FunctionalParameter& fp, const Point& t);

/// Closed-form parameter, used for simulation truths and oracles.
struct AnalyticParameter {
  std::function<double(const Point&)> fn;
  std::string name;

  double operator()(const Point& t) const { return fn(t); }
};

/// Value-semantic evaluable parameter (fitted or analytic). Batch evaluation
/// over the columns of a d x n node matrix.
class Parameter {
 public:
  Parameter(FunctionalParameter fp) : impl_(std::move(fp)) {}
  Parameter(AnalyticParameter ap) : impl_(std::move(ap)) {}

  double operator()(const Point& t) const;
  void values(const Eigen::Ref<const Eigen::MatrixXd>& nodes, Eigen::VectorXd& out) const;

  const FunctionalParameter* functional() const { return std::get_if<FunctionalParameter>(&impl_); }

 private:
  std::variant<FunctionalParameter, AnalyticParameter> impl_;
};

/// alpha + beta * theta(t).
Parameter affine_transform(const Parameter& theta, double alpha, double beta);

}  // namespace maxdissim
