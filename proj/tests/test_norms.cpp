#include <sstream>

#include "doctest.h"
#include "flagcurv/error.hpp"
#include "flagcurv/norms.hpp"
#include "flagcurv/random.hpp"

using namespace flagcurv;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_spd(Rng& rng, int n) {
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
  return M * M.transpose() + n * MatrixXd::Identity(n, n);
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

MinkowskiNorm sample_glued(int n) {
  Rng rng(11);
  // The pieces must be close for the glued norm to stay convex in a thin cone.
  MatrixXd P = random_spd(rng, n);
  MinkowskiNorm F1 = MinkowskiNorm::inner_product(MatrixXd::Identity(n, n) + 1e-3 * P / P.norm());
  VectorXd b = 1e-3 * rng.unit_vector(n);
  MinkowskiNorm F2 = MinkowskiNorm::randers(MatrixXd::Identity(n, n), b);
  BumpFunction bump;
  bump.axis = VectorXd::Unit(n, 0);
  return glue(F1, F2, bump);
}

}  // namespace

TEST_CASE("evaluation of inner product and Randers norms") {
  VectorXd y(3);
  y << 3, 4, 0;
  CHECK(evaluate(MinkowskiNorm::euclidean(3), y) == doctest::Approx(5.0).epsilon(1e-15));
  VectorXd b(2);
  b << 0.5, 0;
  MinkowskiNorm R = MinkowskiNorm::randers(MatrixXd::Identity(2, 2), b);
  CHECK(evaluate(R, vec2(1, 0)) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(evaluate(R, vec2(-1, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(R.reversible());
  CHECK_THROWS_AS(MinkowskiNorm::inner_product(-MatrixXd::Identity(2, 2)), ConvexityError);
  CHECK_THROWS_AS(evaluate(R, VectorXd::Zero(3)), ParameterError);
  CHECK_THROWS_AS(hessian(R, VectorXd::Zero(2)), DomainError);
}

TEST_CASE("navigation closed form agrees with the implicit solve") {
  MinkowskiNorm E = MinkowskiNorm::euclidean(2);
  MinkowskiNorm N = navigate(E, vec2(0.5, 0));
  REQUIRE(N.has_randers_form());
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    VectorXd y = rng.normal_vector(2);
    double a = evaluate(N, y), b = evaluate_implicit(N, y);
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, b));
    // Round trip F~(y + F(y) v) = F(y).
    VectorXd yt = y + evaluate(E, y) * vec2(0.5, 0);
    CHECK(std::abs(evaluate(N, yt) - evaluate(E, y)) <= 1e-9);
  }
  CHECK(randers_b_norm(N.matrix(), N.covector()) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(navigate(E, vec2(1.0, 0)), DomainError);
}

TEST_CASE("navigation of a non-quadratic base uses the implicit solve") {
  MinkowskiNorm G = sample_glued(3);
  VectorXd v = 0.2 * VectorXd::Unit(3, 1);
  MinkowskiNorm N = navigate(G, v);
  CHECK_FALSE(N.has_randers_form());
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    VectorXd y = rng.normal_vector(3);
    VectorXd yt = y + evaluate(G, y) * v;
    CHECK(std::abs(evaluate(N, yt) - evaluate(G, y)) <= 1e-11);
  }
  // The AD Hessian through the implicit solve matches finite differences.
  VectorXd y = rng.normal_vector(3);
  Mat<double> ga = hessian_t<double>(N, std::vector<double>(y.data(), y.data() + 3));
  MatrixXd gn = hessian_numeric(N, y);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(ga(i, j) - gn(i, j)) <= 1e-6);
}

TEST_CASE("Randers analytic derivatives match finite differences") {
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 4;
    MatrixXd A = random_spd(rng, n);
    VectorXd b = rng.normal_vector(n);
    b *= 0.6 / randers_b_norm(A, b);
    MinkowskiNorm R = MinkowskiNorm::randers(A, b);
    VectorXd y = rng.normal_vector(n), z = rng.normal_vector(n);
    MatrixXd g = hessian(R, y);
    double scale = g.cwiseAbs().maxCoeff();
    CHECK((g - hessian_numeric(R, y)).cwiseAbs().maxCoeff() <= 1e-7 * scale);
    MatrixXd c = cartan_matrix(R, y, z);
    MatrixXd cn = cartan_matrix_numeric(R, y, z);
    CHECK((c - cn).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, c.cwiseAbs().maxCoeff()));
    // Euler identity and C_y(y, ., .) = 0.
    CHECK(std::abs(y.dot(g * y) - std::pow(evaluate(R, y), 2)) <= 1e-10 * y.dot(g * y));
    CHECK((c * y).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff()));
    // 0-homogeneity of g_y.
    CHECK((hessian(R, 3.0 * y) - g).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  }
}

TEST_CASE("AD derivatives of a glued norm") {
  MinkowskiNorm G = sample_glued(3);
  Rng rng(9);
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    VectorXd y = rng.normal_vector(3), z = rng.normal_vector(3);
    MatrixXd g = hessian(G, y);
    CHECK((g - hessian_numeric(G, y)).cwiseAbs().maxCoeff() <= 1e-6 * g.cwiseAbs().maxCoeff());
    CHECK(std::abs(y.dot(g * y) - std::pow(evaluate(G, y), 2)) <= 1e-10 * y.dot(g * y));
    MatrixXd c = cartan_matrix(G, y, z);
    CHECK((c * y).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff()));
    MatrixXd cn = cartan_matrix_numeric(G, y, z);
    CHECK((c - cn).cwiseAbs().maxCoeff() <= 1e-4 * std::max(1.0, c.cwiseAbs().maxCoeff()));
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("Riemannian norms have vanishing Cartan tensor") {
  Rng rng(2);
  MinkowskiNorm E = MinkowskiNorm::inner_product(random_spd(rng, 4));
  VectorXd y = rng.normal_vector(4), z = rng.normal_vector(4);
  CHECK(cartan_matrix(E, y, z).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cartan_matrix_numeric(E, y, z).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(E.riemannian());
}

TEST_CASE("gluing") {
  SUBCASE("equal pieces give the piece back") {
    MinkowskiNorm E = MinkowskiNorm::euclidean(3);
    BumpFunction bump;
    bump.axis = VectorXd::Unit(3, 2);
    MinkowskiNorm G = glue(E, E, bump);
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
      VectorXd y = rng.normal_vector(3);
      CHECK(std::abs(evaluate(G, y) - evaluate(E, y)) <= 1e-14 * y.norm());
    }
  }
  SUBCASE("agreement inside the cones is exact") {
    MinkowskiNorm G = sample_glued(3);
    const BumpFunction& b = G.bump();
    VectorXd w = VectorXd::Unit(3, 1);
    for (double th : {0.0, 0.05, 0.19}) {
      VectorXd y = 2.0 * (std::cos(th) * b.axis + std::sin(th) * w);
      CHECK(evaluate(G, y) == evaluate(G.second(), y));
    }
    for (double th : {0.41, 1.0, 3.0}) {
      VectorXd y = 2.0 * (std::cos(th) * b.axis + std::sin(th) * w);
      CHECK(evaluate(G, y) == evaluate(G.first(), y));
    }
  }
  SUBCASE("smoothstep") {
    CHECK(smoothstep(0.0, 4) == 0.0);
    CHECK(smoothstep(1.0, 4) == 1.0);
    CHECK(smoothstep(0.5, 4) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(smoothstep(0.3, 4) + smoothstep(0.7, 4) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("bad bump") {
    BumpFunction b;
    b.axis = VectorXd::Unit(2, 0);
    b.theta1 = 0.5;
    b.theta2 = 0.4;
    CHECK_THROWS_AS(glue(MinkowskiNorm::euclidean(2), MinkowskiNorm::euclidean(2), b), ParameterError);
  }
}

TEST_CASE("validate_norm") {
  NormReport r = validate_norm(MinkowskiNorm::euclidean(3), 200);
  CHECK(r.ok());
  CHECK(r.min_eigenvalue == doctest::Approx(1.0));
  VectorXd b(2);
  b << 1.1, 0.0;
  NormReport bad = validate_norm(MinkowskiNorm::randers(MatrixXd::Identity(2, 2), b), 200);
  CHECK_FALSE(bad.ok());
  CHECK(bad.randers_b_norm == doctest::Approx(1.1));
  CHECK(validate_norm(sample_glued(3), 300).ok());
}

TEST_CASE("JSON round trip and sphere CSV") {
  MinkowskiNorm G = navigate(sample_glued(3), 0.1 * VectorXd::Unit(3, 2));
  MinkowskiNorm H = norm_from_json(nlohmann::json::parse(to_json(G).dump()));
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    VectorXd y = rng.normal_vector(3);
    CHECK(evaluate(H, y) == evaluate(G, y));
  }
  CHECK_THROWS_AS(norm_from_json(nlohmann::json{{"kind", "cubic"}}), ParameterError);
  CHECK_THROWS_AS(norm_from_json(nlohmann::json{{"kind", "randers"}}), ParameterError);
  std::ostringstream os;
  write_sphere_csv(MinkowskiNorm::euclidean(2), 4, 1, os);
  CHECK(os.str().rfind("y0,y1,F,min_eig\n", 0) == 0);
}
