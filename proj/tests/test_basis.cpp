#include <cmath>
#include <random>

#include "doctest.h"

#include "maxdissim/basis.hpp"

using namespace maxdissim;

namespace {

Point pt(double a) { return Point::Constant(1, a); }
Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

// Textbook Cox-de Boor recursion on the full knot vector, with the right end
// closed on the last nonempty span.
double cox_de_boor(const std::vector<double>& u, int i, int k, double x) {
  if (k == 0) {
    const double hi = u.back();
    if (x == hi) return (u[i] < hi && u[i + 1] == hi) ? 1.0 : 0.0;
    return (u[i] <= x && x < u[i + 1]) ? 1.0 : 0.0;
  }
  double a = 0, b = 0;
  if (u[i + k] > u[i]) a = (x - u[i]) / (u[i + k] - u[i]) * cox_de_boor(u, i, k - 1, x);
  if (u[i + k + 1] > u[i + 1]) b = (u[i + k + 1] - x) / (u[i + k + 1] - u[i + 1]) * cox_de_boor(u, i + 1, k - 1, x);
  return a + b;
}

// de Boor's algorithm for the spline value sum_j c_j N_{j,p}(x).
double de_boor(const std::vector<double>& u, const std::vector<double>& c, int p, double x) {
  int n = static_cast<int>(c.size());
  int k = p;
  while (k < n - 1 && x >= u[k + 1]) ++k;
  std::vector<double> d(p + 1);
  for (int j = 0; j <= p; ++j) d[j] = c[j + k - p];
  for (int r = 1; r <= p; ++r)
    for (int j = p; j >= r; --j) {
      double denom = u[j + 1 + k - r] - u[j + k - p];
      double alpha = denom > 0 ? (x - u[j + k - p]) / denom : 0.0;
      d[j] = (1 - alpha) * d[j - 1] + alpha * d[j];
    }
  return d[p];
}

}  // namespace

TEST_CASE("basis size counts knots plus degree plus one") {
  GroundSet t = GroundSet::interval(0, 1);
  CHECK(BasisSet::bspline(t, 3, {0.25, 0.5, 0.75}).size() == 7);
  CHECK(BasisSet::bspline(t, 2, {}).size() == 3);
  CHECK(BasisSet::uniform(t, 10).size() == 10);
  CHECK(BasisSet::constant(t).size() == 0);
  GroundSet sq = GroundSet::square(-3, 3);
  CHECK(BasisSet::tensor_bspline(sq, 3, {std::vector<double>{0.0}, std::vector<double>{-1.0, 1.0}}).size() == 30);
  CHECK(BasisSet::uniform(sq, 6).size() == 36);
}

TEST_CASE("small sizes reduce the degree") {
  GroundSet t = GroundSet::interval(0, 1);
  auto b1 = BasisSet::uniform(t, 1);
  CHECK(b1.size() == 1);
  CHECK(b1.degree() == 0);
  auto b3 = BasisSet::uniform(t, 3);
  CHECK(b3.degree() == 2);
  CHECK(b3.interior_knots().front().empty());
}

TEST_CASE("knots spread over a sub-span") {
  GroundSet t = GroundSet::interval(0, 1);
  auto b = BasisSet::uniform(t, 7, 3, GroundSet::interval(0, 0.9));
  const auto k = b.interior_knots().front();
  REQUIRE(k.size() == 3);
  CHECK(k[0] == doctest::Approx(0.225));
  CHECK(k[2] == doctest::Approx(0.675));
  CHECK(b.ground() == t);
  CHECK_THROWS_AS(BasisSet::uniform(t, 7, 3, GroundSet::interval(0, 2)), InputError);
}

TEST_CASE("knot validation") {
  GroundSet t = GroundSet::interval(0, 1);
  CHECK_THROWS_AS(BasisSet::bspline(t, 3, {0.5, 0.2}), InputError);
  CHECK_THROWS_AS(BasisSet::bspline(t, 3, {0.0, 0.5}), InputError);
  CHECK_THROWS_AS(BasisSet::bspline(t, -1, {}), InputError);
  CHECK_THROWS_AS(BasisSet::bspline(GroundSet::square(0, 1), 3, {}), InputError);
}

TEST_CASE("basis values match the Cox-de Boor recursion") {
  GroundSet t = GroundSet::interval(-1, 2);
  for (int p : {0, 1, 2, 3, 5}) {
    auto basis = BasisSet::bspline(t, p, {-0.4, 0.1, 0.1, 0.9, 1.3});
    const auto& u = basis.axes()[0].knots();
    for (double x : {-1.0, -0.7, -0.4, 0.0, 0.1, 0.55, 1.29, 1.7, 2.0}) {
      Eigen::VectorXd v = basis.values(pt(x));
      for (int i = 0; i < basis.size(); ++i) CHECK(v[i] == doctest::Approx(cox_de_boor(u, i, p, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cubic spline evaluation matches de Boor") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0, 1);
  GroundSet t = GroundSet::interval(0, 1);
  auto basis = BasisSet::uniform(t, 9);
  Eigen::VectorXd beta(10);
  for (int i = 0; i < 10; ++i) beta[i] = z(gen);
  FunctionalParameter fp(basis, Link::Identity, beta);
  std::vector<double> c(beta.data() + 1, beta.data() + 10);
  const auto& knots = basis.axes()[0].knots();
  for (int k = 0; k < 100; ++k) {
    double x = u(gen);
    CHECK(evaluate(fp, pt(x)) == doctest::Approx(beta[0] + de_boor(knots, c, 3, x)).epsilon(1e-12));
  }
}

TEST_CASE("partition of unity") {
  GroundSet t = GroundSet::interval(0, 1);
  for (int size : {1, 2, 4, 7, 12, 20})
    for (int degree : {0, 1, 2, 3, 4}) {
      auto basis = BasisSet::uniform(t, size, degree);
      for (int k = 0; k < 1000; ++k) {
        double x = k / 999.0;
        CHECK(basis.values(pt(x)).sum() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  auto design = design_matrix(BasisSet::uniform(t, 8), {pt(0), pt(0.3), pt(0.77), pt(1)});
  for (int r = 0; r < design.rows(); ++r) {
    CHECK(design(r, 0) == 1.0);
    CHECK(design.row(r).tail(8).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tensor basis is the product of the axis bases") {
  GroundSet sq = GroundSet::square(-3, 3);
  auto basis = BasisSet::uniform(sq, 5, 2);
  auto bu = BasisSet::uniform(GroundSet::interval(-3, 3), 5, 2);
  for (auto [x, y] : {std::pair{-3.0, -3.0}, {0.4, -1.2}, {2.9, 3.0}, {-0.01, 1.7}}) {
    Eigen::VectorXd v = basis.values(pt(x, y));
    Eigen::VectorXd a = bu.values(pt(x)), b = bu.values(pt(y));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(v[i * 5 + j] == doctest::Approx(a[i] * b[j]).epsilon(1e-14));
  }
}

TEST_CASE("identity link is affine in the coefficients") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  GroundSet t = GroundSet::interval(0, 1);
  auto basis = BasisSet::uniform(t, 6);
  Eigen::VectorXd b1(7), b2(7);
  for (int i = 0; i < 7; ++i) {
    b1[i] = z(gen);
    b2[i] = z(gen);
  }
  const double a = 2.5, s = -0.7;
  FunctionalParameter f1(basis, Link::Identity, b1), f2(basis, Link::Identity, b2),
      f3(basis, Link::Identity, a * b1 + s * b2);
  for (double x : {0.0, 0.13, 0.5, 0.91, 1.0})
    CHECK(f3(pt(x)) == doctest::Approx(a * f1(pt(x)) + s * f2(pt(x))).epsilon(1e-12));

  Eigen::VectorXd shift = b1;
  shift[0] += 3;
  CHECK(FunctionalParameter(basis, Link::Identity, shift)(pt(0.4)) == doctest::Approx(f1(pt(0.4)) + 3));
}

TEST_CASE("evaluation edge cases") {
  GroundSet t = GroundSet::interval(0, 1);
  Eigen::VectorXd beta(1);
  beta << 2.0;
  FunctionalParameter c(BasisSet::constant(t), Link::Identity, beta);
  CHECK(evaluate(c, pt(0.3)) == 2.0);
  FunctionalParameter e(BasisSet::constant(t), Link::Log, beta);
  CHECK(evaluate(e, pt(0.3)) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(evaluate(c, pt(1.5)), InputError);
  CHECK_THROWS_AS(FunctionalParameter(BasisSet::uniform(t, 4), Link::Identity, beta), InputError);
  CHECK_THROWS_AS(design_matrix(BasisSet::uniform(t, 4), {}), InputError);
  CHECK_THROWS_AS(design_matrix(BasisSet::uniform(t, 4), {pt(-0.5)}), InputError);
  CHECK(link_from_string("log") == Link::Log);
  CHECK_THROWS_AS(link_from_string("probit"), InputError);
}

TEST_CASE("parameter batch evaluation and affine transform") {
  GroundSet t = GroundSet::interval(0, 1);
  Eigen::VectorXd beta = Eigen::VectorXd::LinSpaced(6, -1, 1);
  Parameter fp = FunctionalParameter(BasisSet::uniform(t, 5), Link::Log, beta);
  Parameter an = AnalyticParameter{[](const Point& s) { return std::sin(s[0]); }, "sin"};
  Eigen::MatrixXd nodes(1, 4);
  nodes << 0.0, 0.25, 0.6, 1.0;
  Eigen::VectorXd out;
  for (const Parameter* p : {&fp, &an}) {
    p->values(nodes, out);
    for (int j = 0; j < 4; ++j) CHECK(out[j] == doctest::Approx((*p)(pt(nodes(0, j)))).epsilon(1e-14));
  }
  Parameter g = affine_transform(an, 1.5, -2.0);
  CHECK(g(pt(0.3)) == doctest::Approx(1.5 - 2.0 * std::sin(0.3)));
  CHECK(fp.functional() != nullptr);
  CHECK(an.functional() == nullptr);
}
