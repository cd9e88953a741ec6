#include "maxdissim/basis.hpp"

#include <algorithm>

namespace maxdissim {

SplineAxis::SplineAxis(double lo, double hi, int degree, std::vector<double> interior_knots)
    : lo_(lo), hi_(hi), degree_(degree), interior_(std::move(interior_knots)) {
  require(degree >= 0, "SplineAxis: degree must be >= 0");
  require(lo < hi, "SplineAxis: empty axis");
  require(std::is_sorted(interior_.begin(), interior_.end()), "SplineAxis: interior knots must be sorted");
  for (double k : interior_) require(k > lo && k < hi, "SplineAxis: interior knots must lie strictly inside the axis");
  knots_.assign(degree + 1, lo);
  knots_.insert(knots_.end(), interior_.begin(), interior_.end());
  knots_.insert(knots_.end(), degree + 1, hi);
}

int SplineAxis::span(double x) const {
  const int n = size() - 1;
  x = std::clamp(x, lo_, hi_);
  if (x >= knots_[n + 1]) return n;
  // First knot strictly greater than x, minus one.
  auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int SplineAxis::nonzero(double x, double* values) const {
  x = std::clamp(x, lo_, hi_);
  const int i = span(x);
  const int p = degree_;
  double left[64], right[64];
  values[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[i + 1 - j];
    right[j] = knots_[i + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
  return i - p;
}

namespace {

std::vector<double> uniform_knots(double lo, double hi, int count) {
  std::vector<double> k(count);
  for (int i = 0; i < count; ++i) k[i] = lo + (hi - lo) * (i + 1) / (count + 1);
  return k;
}

}  // namespace

BasisSet BasisSet::constant(const GroundSet& ground) {
  BasisSet b;
  b.kind_ = BasisKind::Constant;
  b.ground_ = ground;
  return b;
}

BasisSet BasisSet::bspline(const GroundSet& ground, int degree, std::vector<double> interior_knots) {
  require(ground.dim() == 1, "bspline basis needs a one-dimensional ground set");
  require(degree >= 0 && degree < 63, "bspline basis: degree out of range");
  BasisSet b;
  b.kind_ = BasisKind::BSpline1d;
  b.ground_ = ground;
  b.degree_ = degree;
  b.axes_.emplace_back(ground.lower(0), ground.upper(0), degree, std::move(interior_knots));
  return b;
}

BasisSet BasisSet::tensor_bspline(const GroundSet& ground, int degree,
                                  std::array<std::vector<double>, 2> interior_knots) {
  require(ground.dim() == 2, "tensor bspline basis needs a two-dimensional ground set");
  require(degree >= 0 && degree <= 7, "tensor bspline basis: degree out of range");
  BasisSet b;
  b.kind_ = BasisKind::TensorBSpline2d;
  b.ground_ = ground;
  b.degree_ = degree;
  for (int k = 0; k < 2; ++k)
    b.axes_.emplace_back(ground.lower(k), ground.upper(k), degree, std::move(interior_knots[k]));
  return b;
}

BasisSet BasisSet::uniform(const GroundSet& ground, int size_per_dim, int degree) {
  return uniform(ground, size_per_dim, degree, ground);
}

BasisSet BasisSet::uniform(const GroundSet& ground, int size_per_dim, int degree, const GroundSet& knot_span) {
  require(size_per_dim >= 1, "basis size must be >= 1");
  require(degree >= 0, "basis degree must be >= 0");
  require(knot_span.dim() == ground.dim(), "basis: knot span dimension differs from the ground set");
  for (int k = 0; k < ground.dim(); ++k)
    require(knot_span.lower(k) >= ground.lower(k) && knot_span.upper(k) <= ground.upper(k),
            "basis: knot span must lie inside the ground set");
  int deg = std::min(degree, size_per_dim - 1);
  int interior = size_per_dim - deg - 1;
  if (ground.dim() == 1)
    return bspline(ground, deg, uniform_knots(knot_span.lower(0), knot_span.upper(0), interior));
  require(ground.dim() == 2, "basis: only 1-D and 2-D ground sets are supported");
  return tensor_bspline(ground, deg,
                        {uniform_knots(knot_span.lower(0), knot_span.upper(0), interior),
                         uniform_knots(knot_span.lower(1), knot_span.upper(1), interior)});
}

int BasisSet::size() const {
  switch (kind_) {
    case BasisKind::Constant: return 0;
    case BasisKind::BSpline1d: return axes_[0].size();
    case BasisKind::TensorBSpline2d: return axes_[0].size() * axes_[1].size();
  }
  return 0;
}

std::vector<std::vector<double>> BasisSet::interior_knots() const {
  std::vector<std::vector<double>> out;
  for (const auto& a : axes_) out.push_back(a.interior_knots());
  return out;
}

int BasisSet::nonzero(const Point& t, int* index, double* value) const {
  switch (kind_) {
    case BasisKind::Constant: return 0;
    case BasisKind::BSpline1d: {
      int first = axes_[0].nonzero(t[0], value);
      for (int k = 0; k <= degree_; ++k) index[k] = first + k;
      return degree_ + 1;
    }
    case BasisKind::TensorBSpline2d: {
      double u[8], v[8];
      int fu = axes_[0].nonzero(t[0], u);
      int fv = axes_[1].nonzero(t[1], v);
      const int nv = axes_[1].size();
      int count = 0;
      for (int a = 0; a <= degree_; ++a)
        for (int b = 0; b <= degree_; ++b) {
          index[count] = (fu + a) * nv + (fv + b);
          value[count++] = u[a] * v[b];
        }
      return count;
    }
  }
  return 0;
}

Eigen::VectorXd BasisSet::values(const Point& t) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  int idx[kMaxNonzero];
  double val[kMaxNonzero];
  int n = nonzero(t, idx, val);
  for (int k = 0; k < n; ++k) out[idx[k]] = val[k];
  return out;
}

bool BasisSet::operator==(const BasisSet& other) const {
  return kind_ == other.kind_ && ground_ == other.ground_ && degree_ == other.degree_ &&
         interior_knots() == other.interior_knots();
}

Eigen::MatrixXd design_matrix(const BasisSet& basis, const std::vector<Point>& points) {
  require(!points.empty(), "design_matrix: empty point list");
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, basis.size() + 1);
  int idx[BasisSet::kMaxNonzero];
  double val[BasisSet::kMaxNonzero];
  for (int row = 0; row < n; ++row) {
    require(basis.ground().contains(points[row]), "design_matrix: point outside the ground set");
    x(row, 0) = 1.0;
    int nz = basis.nonzero(points[row], idx, val);
    for (int k = 0; k < nz; ++k) x(row, 1 + idx[k]) = val[k];
  }
  return x;
}

std::string to_string(Link link) { return link == Link::Log ? "log" : "identity"; }

Link link_from_string(const std::string& name) {
  if (name == "identity") return Link::Identity;
  if (name == "log") return Link::Log;
  throw InputError("unknown link function '" + name + "'");
}

FunctionalParameter::FunctionalParameter(BasisSet b, Link l, Eigen::VectorXd coef)
    : basis(std::move(b)), link(l), coefficients(std::move(coef)) {
  require(coefficients.size() == basis.size() + 1,
          "FunctionalParameter: coefficient vector must have length B + 1");
}

double FunctionalParameter::linear_predictor(const Point& t) const {
  int idx[BasisSet::kMaxNonzero];
  double val[BasisSet::kMaxNonzero];
  int nz = basis.nonzero(t, idx, val);
  double eta = coefficients[0];
  for (int k = 0; k < nz; ++k) eta += coefficients[1 + idx[k]] * val[k];
  return eta;
}

double evaluate(const FunctionalParameter& fp, const Point& t) {
  require(fp.basis.ground().contains(t), "evaluate: point outside the ground set");
  return fp(t);
}

double Parameter::operator()(const Point& t) const {
  return std::visit([&](const auto& p) { return p(t); }, impl_);
}

void Parameter::values(const Eigen::Ref<const Eigen::MatrixXd>& nodes, Eigen::VectorXd& out) const {
  const Eigen::Index n = nodes.cols();
  out.resize(n);
  if (const auto* fp = std::get_if<FunctionalParameter>(&impl_)) {
    int idx[BasisSet::kMaxNonzero];
    double val[BasisSet::kMaxNonzero];
    const double* beta = fp->coefficients.data();
    Point t(nodes.rows());
    for (Eigen::Index j = 0; j < n; ++j) {
      t = nodes.col(j);
      int nz = fp->basis.nonzero(t, idx, val);
      double eta = beta[0];
      for (int k = 0; k < nz; ++k) eta += beta[1 + idx[k]] * val[k];
      out[j] = apply_inverse_link(fp->link, eta);
    }
    return;
  }
  const auto& ap = std::get<AnalyticParameter>(impl_);
  Point t(nodes.rows());
  for (Eigen::Index j = 0; j < n; ++j) {
    t = nodes.col(j);
    out[j] = ap(t);
  }
}

Parameter affine_transform(const Parameter& theta, double alpha, double beta) {
  return AnalyticParameter{[theta, alpha, beta](const Point& t) { return alpha + beta * theta(t); },
                           "affine"};
}

}  // namespace maxdissim
