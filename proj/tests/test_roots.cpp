#include "doctest.h"
#include "flagcurv/error.hpp"
#include "flagcurv/roots.hpp"

using namespace flagcurv;

namespace {

CartanData standard(const LieAlgebra& L) { return root_decomposition(L, L.standard_cartan()); }

Eigen::MatrixXd orthonormal_frame(const LieAlgebra& L) {
  Eigen::LLT<Eigen::MatrixXd> llt(L.metric());
  Eigen::MatrixXd U = llt.matrixU();
  return U.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(L.dim(), L.dim()));
}

}  // namespace

TEST_CASE("root counts of classical algebras") {
  for (int n = 2; n <= 5; ++n) CHECK(standard(build_classical(Family::su, n)).root_system().roots.size() == std::size_t(n * (n - 1)));
  for (int n = 1; n <= 4; ++n) CHECK(standard(build_classical(Family::sp, n)).root_system().roots.size() == std::size_t(2 * n * n));
  for (int n = 2; n <= 4; ++n) CHECK(standard(build_classical(Family::so, 2 * n)).root_system().roots.size() == std::size_t(2 * n * (n - 1)));
  CHECK(standard(build_classical(Family::so, 7)).root_system().roots.size() == 18u);
}

TEST_CASE("block structure and reassembly of ad(h)") {
  auto L = build_classical(Family::su, 4);
  auto cd = standard(L);
  CHECK(cd.rank() == 3);
  CHECK(cd.block_residual(L) < 1e-10);
  Eigen::MatrixXd Q = orthonormal_frame(L);
  Eigen::MatrixXd Qi = Q.inverse();
  for (int k = 0; k < cd.rank(); ++k) {
    Eigen::VectorXd h = cd.t_basis.col(k);
    Eigen::MatrixXd A = Qi * L.ad(h) * Q;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(L.dim(), L.dim());
    for (const auto& pl : cd.planes) {
      Eigen::VectorXd p = Qi * pl.p, q = Qi * pl.q;
      R += pl.alpha[k] * (q * p.transpose() - p * q.transpose());
    }
    CHECK((A - R).norm() < 1e-8);
  }
  // t and the root planes span g.
  Eigen::MatrixXd span(L.dim(), L.dim());
  span.leftCols(3) = cd.t_basis;
  for (std::size_t i = 0; i < cd.planes.size(); ++i) {
    span.col(3 + 2 * i) = cd.planes[i].p;
    span.col(4 + 2 * i) = cd.planes[i].q;
  }
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(span).rank() == L.dim());
}

TEST_CASE("su(n) roots match the A-series up to isometry") {
  for (int n = 3; n <= 5; ++n) {
    auto L = build_classical(Family::su, n);
    auto rs = standard(L).root_system();
    auto iso = find_isometry(rs, abstract_root_system(RootFamily::A, n - 1));
    REQUIRE(iso.has_value());
    CHECK(iso->residual <= 1e-8);
  }
}

TEST_CASE("sp(2) root lengths are in ratio sqrt(2)") {
  auto rs = standard(build_classical(Family::sp, 2)).root_system();
  CHECK(rs.roots.size() == 8u);
  auto len = root_lengths(rs);
  REQUIRE(len.size() == 2u);
  CHECK(len[1] / len[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  // Default normalization: short roots have length sqrt(2).
  CHECK(len[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(find_isometry(rs, abstract_root_system(RootFamily::C, 2)).has_value());
}

TEST_CASE("so(n) roots match B and D series") {
  CHECK(find_isometry(standard(build_classical(Family::so, 8)).root_system(), abstract_root_system(RootFamily::D, 4)).has_value());
  CHECK(find_isometry(standard(build_classical(Family::so, 7)).root_system(), abstract_root_system(RootFamily::B, 3)).has_value());
}

TEST_CASE("abelian algebra has no roots") {
  auto L = build_abelian(3);
  auto cd = root_decomposition(L, L.standard_cartan());
  CHECK(cd.rank() == 3);
  CHECK(cd.planes.empty());
}

TEST_CASE("root decomposition errors") {
  auto L = build_classical(Family::su, 2);
  std::vector<Eigen::VectorXd> bad = {Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 1)};
  CHECK_THROWS_AS(root_decomposition(L, bad), PreconditionError);
  auto M = build_classical(Family::su, 3);
  std::vector<Eigen::VectorXd> small = {M.standard_cartan()[0]};
  CHECK_THROWS_AS(root_decomposition(M, small), DecompositionError);
}

TEST_CASE("abstract root systems") {
  auto d5 = abstract_root_system(RootFamily::D, 5);
  CHECK(d5.roots.size() == 40u);
  auto e6 = abstract_root_system(RootFamily::E6, 6);
  CHECK(e6.roots.size() == 72u);
  int sixth = 0;
  for (const auto& r : e6.roots)
    if (std::abs(std::abs(r[5]) - std::sqrt(3.0) / 2.0) < 1e-12) ++sixth;
  CHECK(sixth == 32);
  auto e7 = abstract_root_system(RootFamily::E7, 7);
  CHECK(e7.roots.size() == 126u);
  for (const auto& rs : {d5, e6, e7, abstract_root_system(RootFamily::A, 4), abstract_root_system(RootFamily::B, 3),
                         abstract_root_system(RootFamily::C, 5)}) {
    CHECK(rs.negation_closed());
    CHECK_FALSE(rs.has_zero_root());
  }
  // All E-roots have the same length.
  CHECK(root_lengths(e6).size() == 1u);
  CHECK(root_lengths(e7).size() == 1u);
  CHECK_THROWS_AS(abstract_root_system(RootFamily::E6, 5), ParameterError);
  CHECK_THROWS_AS(root_family_from_string("G2"), ParameterError);
}

TEST_CASE("E6 and E7 are closed under reflections") {
  for (const auto& rs : {abstract_root_system(RootFamily::E6, 6), abstract_root_system(RootFamily::E7, 7)})
    for (const auto& a : rs.roots)
      for (const auto& b : rs.roots) {
        Eigen::VectorXd r = b - 2.0 * a.dot(b) / a.squaredNorm() * a;
        CHECK(rs.find(r, 1e-9) >= 0);
      }
}
