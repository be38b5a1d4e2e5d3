#include <complex>

#include "doctest.h"
#include "flagcurv/error.hpp"
#include "flagcurv/lie_algebra.hpp"

using namespace flagcurv;

TEST_CASE("classical dimensions") {
  CHECK(build_classical(Family::su, 2, 0.5).dim() == 3);
  CHECK(build_classical(Family::so, 3, 1.0).dim() == 3);
  CHECK(build_classical(Family::sp, 2, 1.0).dim() == 10);
  for (int n = 2; n <= 5; ++n) CHECK(build_classical(Family::su, n).dim() == n * n - 1);
  for (int n = 3; n <= 8; ++n) CHECK(build_classical(Family::so, n).dim() == n * (n - 1) / 2);
  for (int n = 1; n <= 4; ++n) CHECK(build_classical(Family::sp, n).dim() == n * (2 * n + 1));
}

TEST_CASE("parameter errors") {
  CHECK_THROWS_AS(build_classical(Family::su, 1), ParameterError);
  CHECK_THROWS_AS(build_classical(Family::so, 2), ParameterError);
  CHECK_THROWS_AS(build_classical(Family::su, 3, -1.0), ParameterError);
  CHECK_THROWS_AS(family_from_string("g2"), ParameterError);
  CHECK_THROWS_AS(direct_sum({}), ParameterError);
  auto L = build_classical(Family::su, 2);
  CHECK_THROWS_AS(L.bracket(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)), ParameterError);
}

TEST_CASE("structural identities hold exactly") {
  for (int n = 2; n <= 4; ++n) {
    auto c = build_classical(Family::su, n).verify();
    CHECK(c.antisymmetry.exact);
    CHECK(c.ok());
  }
  for (int n = 3; n <= 5; ++n) CHECK(build_classical(Family::so, n).verify().ok());
  for (int n = 1; n <= 3; ++n) CHECK(build_classical(Family::sp, n).verify().ok());
}

TEST_CASE("su(2) brackets match Pauli commutators") {
  using C = std::complex<double>;
  auto L = build_classical(Family::su, 2, 0.5);
  auto mat = [&](int i) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    for (const auto& e : L.realization(i).entries) {
      double re = boost::rational_cast<double>(e.value.re);
      double im = boost::rational_cast<double>(e.value.im);
      m(e.row, e.col) = C(re, im);
    }
    return m;
  };
  const C I(0, 1);
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  sz << 1, 0, 0, -1;
  // The basis is i*sigma_y, i*sigma_x, i*sigma_z.
  CHECK((mat(0) - I * sy).norm() < 1e-14);
  CHECK((mat(1) - I * sx).norm() < 1e-14);
  CHECK((mat(2) - I * sz).norm() < 1e-14);
  for (int i = 0; i < 3; ++i) {
    CHECK(L.norm(Eigen::VectorXd::Unit(3, i)) == doctest::Approx(1.0));
    for (int j = 0; j < 3; ++j) {
      Eigen::Matrix2cd comm = mat(i) * mat(j) - mat(j) * mat(i);
      Eigen::VectorXd z = L.bracket(Eigen::VectorXd::Unit(3, i), Eigen::VectorXd::Unit(3, j));
      Eigen::Matrix2cd recon = Eigen::Matrix2cd::Zero();
      for (int k = 0; k < 3; ++k) recon += z[k] * mat(k);
      CHECK((comm - recon).norm() < 1e-14);
    }
  }
  // With this normalization the orthonormal basis has [e1,e2] = +-2 e3.
  Eigen::VectorXd z = L.bracket(Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 1));
  CHECK(std::abs(z[2]) == doctest::Approx(2.0));
  CHECK(std::abs(z[0]) + std::abs(z[1]) == 0.0);
}

TEST_CASE("bracket basics") {
  auto L = build_classical(Family::su, 3);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(8, -1.0, 2.0);
  CHECK(L.bracket(x, x).norm() < 1e-14);
  auto R = build_abelian(3);
  CHECK(R.bracket(Eigen::VectorXd::Ones(3), Eigen::VectorXd::LinSpaced(3, 0, 1)).norm() == 0.0);
}

TEST_CASE("direct sums are block diagonal") {
  auto a = build_classical(Family::su, 2);
  auto s = direct_sum({a, a});
  CHECK(s.dim() == 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 3; j < 6; ++j)
      CHECK(s.bracket(Eigen::VectorXd::Unit(6, i), Eigen::VectorXd::Unit(6, j)).norm() == 0.0);
  CHECK(s.verify().ok());
  auto t = direct_sum({a, build_abelian(1)});
  CHECK(t.dim() == 4);
  CHECK(t.factors().size() == 2);
  CHECK(t.verify().ok());
  CHECK(t.factors()[1].family == Family::abelian);
}

TEST_CASE("exact coordinates of matrices") {
  auto L = build_classical(Family::so, 4);
  QMatrix x;
  x.size = 4;
  x.entries = {{0, 1, {Rational(3), Rational(0)}}, {1, 0, {Rational(-3), Rational(0)}}};
  auto c = L.exact_coordinates(0, x);
  CHECK(c[0] == Rational(3));
  QMatrix bad;
  bad.size = 4;
  bad.entries = {{0, 0, {Rational(1), Rational(0)}}};
  CHECK_THROWS_AS(L.exact_coordinates(0, bad), StructureError);
}

TEST_CASE("standard Cartan subalgebras commute") {
  for (auto [f, n] : std::vector<std::pair<Family, int>>{{Family::su, 4}, {Family::so, 6}, {Family::so, 7}, {Family::sp, 3}}) {
    auto L = build_classical(f, n);
    auto t = L.standard_cartan();
    int rank = f == Family::su ? n - 1 : (f == Family::so ? n / 2 : n);
    CHECK(static_cast<int>(t.size()) == rank);
    for (auto& a : t)
      for (auto& b : t) CHECK(L.bracket(a, b).norm() == 0.0);
  }
}

TEST_CASE("identities on the largest algebras in range") {
  CHECK(build_classical(Family::su, 5).verify().ok());
  CHECK(build_classical(Family::so, 8).verify().ok());
  auto c = build_classical(Family::sp, 5).verify();
  CHECK(c.jacobi.exact);
  CHECK(c.ok());
}
