#include "doctest.h"
#include "flagcurv/coset_space.hpp"
#include "flagcurv/error.hpp"

#include <random>

using namespace flagcurv;

namespace {

std::shared_ptr<const LieAlgebra> algebra(Family f, int n, double scale = 0.0) {
  return std::make_shared<LieAlgebra>(build_classical(f, n, scale));
}

Eigen::VectorXd random_m(const CosetDecomposition& S, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd c(S.dim_m());
  for (int i = 0; i < c.size(); ++i) c[i] = g(rng);
  return S.from_m(c);
}

}  // namespace

TEST_CASE("trivial subgroup") {
  auto S = build_coset(algebra(Family::su, 2), {});
  CHECK(S.dim_m() == 3);
  CHECK(S.t_cap_m.cols() == 1);
  CHECK(S.t_cap_h.cols() == 0);
  CHECK(S.checks.dimension_ok);
}

TEST_CASE("so(4)/so(2)") {
  auto L = algebra(Family::so, 4);
  // A34 is basis index 5 in the pair enumeration.
  auto S = build_coset(L, {Eigen::VectorXd::Unit(6, 5)});
  CHECK(S.dim_m() == 5);
  CHECK(S.rank_g() == 2);
  CHECK(S.rank_h() == 1);
  CHECK(S.checks.reductivity <= 1e-10);
  CHECK(S.checks.orthogonality <= 1e-12);
}

TEST_CASE("su(3)/su(2) is reductive with dim m = 5") {
  auto L = algebra(Family::su, 3);
  // Upper block su(2): A12, B12, D1.
  auto S = build_coset(L, {Eigen::VectorXd::Unit(8, 0), Eigen::VectorXd::Unit(8, 1), Eigen::VectorXd::Unit(8, 6)});
  CHECK(S.dim_m() == 5);
  CHECK(S.rank_h() == 1);
  CHECK(S.t_cap_m.cols() == 1);
  CHECK(S.checks.reductivity <= 1e-10);
  CHECK(S.checks.fundamental_ok);
}

TEST_CASE("non-subalgebra is rejected") {
  auto L = algebra(Family::su, 3);
  CHECK_THROWS_AS(build_coset(L, {Eigen::VectorXd::Unit(8, 0), Eigen::VectorXd::Unit(8, 2)}), StructureError);
}

TEST_CASE("projections and restricted brackets") {
  auto S = build_s1_bundle({hermitian_factor("Q", 4)}, {1.0});
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u = random_m(S, rng), v = random_m(S, rng);
    CHECK(S.algebra->norm(S.project_h(u)) < 1e-12);
    CHECK(S.algebra->norm(S.bracket_m(u, v) + S.bracket_h(u, v) - S.bracket(u, v)) < 1e-12);
    // Frame brackets agree with the g-level ones.
    Eigen::VectorXd a = S.to_m(u), b = S.to_m(v);
    CHECK((S.bracket_mm(a, b) - S.to_m(S.bracket_m(u, v))).norm() < 1e-12);
    CHECK((S.bracket_mh(a, b) - S.to_h(S.bracket_h(u, v))).norm() < 1e-12);
  }
  CHECK_THROWS_AS(S.project_h(Eigen::VectorXd::Zero(3)), ParameterError);
}

TEST_CASE("symmetric pair: [p,p]_m lies in R v") {
  auto S = build_s1_bundle({hermitian_factor("Q", 4)}, {1.0});
  const auto& L = *S.algebra;
  Eigen::VectorXd v = *S.navigation_v;
  v /= L.norm(v);
  // p = orthocomplement of v in m.
  std::vector<Eigen::VectorXd> p;
  for (int i = 0; i < S.dim_m(); ++i) {
    Eigen::VectorXd x = S.m_basis.col(i);
    x -= L.inner(x, v) * v;
    if (L.norm(x) > 1e-8) p.push_back(x);
  }
  for (auto& x : p)
    for (auto& y : p) {
      Eigen::VectorXd z = S.bracket_m(x, y);
      CHECK(L.norm(z - L.inner(z, v) * v) < 1e-10);
    }
}

TEST_CASE("S^1-bundles") {
  SUBCASE("k = 1, SO(4)/SO(2)") {
    auto S = build_s1_bundle({hermitian_factor("Q", 4)}, {1.0});
    CHECK(S.dim_m() == 5);
    CHECK(S.dim_h() == 1);
  }
  SUBCASE("k = 2, su(2) + su(2), c = (1, 2)") {
    auto f = hermitian_factor("A", 1, 1);
    auto S = build_s1_bundle({f, f}, {1.0, 2.0});
    CHECK(S.dim_h() == 1);
    CHECK(S.dim_m() == 5);
    CHECK(S.t_cap_m.cols() == 1);
    CHECK(S.rank_g() == S.rank_h() + 1);
    Eigen::VectorXd v = *S.navigation_v;
    for (int i = 0; i < S.dim_h(); ++i) CHECK(S.algebra->norm(S.bracket(v, S.h_basis.col(i))) < 1e-12);
  }
  SUBCASE("A(3,2) gives dim m = 13") {
    auto S = build_s1_bundle({hermitian_factor("A", 3, 2)}, {1.0});
    CHECK(S.dim_m() == 13);
    CHECK(S.rank_h() == 3);
  }
  SUBCASE("rank condition on several factors") {
    auto S = build_s1_bundle({hermitian_factor("A", 2, 1), hermitian_factor("C", 2), hermitian_factor("D", 3)},
                             {1.0, -0.5, 2.0});
    CHECK(S.rank_g() == S.rank_h() + 1);
  }
  SUBCASE("errors") {
    auto f = hermitian_factor("A", 1, 1);
    CHECK_THROWS_AS(build_s1_bundle({f, f}, {1.0, 0.0}), ParameterError);
    CHECK_THROWS_AS(build_s1_bundle({hermitian_factor("E6", 0)}, {1.0}), ParameterError);
    CHECK_THROWS_AS(hermitian_factor_from_string("X(2)"), ParameterError);
    auto bad = hermitian_factor("Q", 4);
    bad.v = Eigen::VectorXd::Unit(6, 1);
    CHECK_THROWS_AS(build_s1_bundle({bad}, {1.0}), StructureError);
  }
}

TEST_CASE("bracket with v is injective on p") {
  auto fa = hermitian_factor("A", 2, 1), fq = hermitian_factor("Q", 5);
  std::vector<double> c = {1.0, -3.0};
  auto S = build_s1_bundle({fa, fq}, c);
  const auto& L = *S.algebra;
  Eigen::VectorXd v = *S.navigation_v;
  // Lower bound from the root data: min |<v, alpha>| over root planes in m.
  double bound = 1e300;
  for (std::size_t j = 0; j < S.cartan.planes.size(); ++j)
    if (S.plane_location[j] == PlaneLocation::in_m)
      bound = std::min(bound, std::abs(L.inner(v, S.cartan.planes[j].alpha_g)));
  CHECK(bound >= 1e-8);
  std::mt19937_64 rng(11);
  Eigen::VectorXd vn = v / L.norm(v);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd u = random_m(S, rng);
    u -= L.inner(u, vn) * vn;
    u /= L.norm(u);
    CHECK(L.norm(S.bracket(v, u)) >= bound - 1e-10);
  }
}

TEST_CASE("hat decompositions") {
  for (auto S : {build_s1_bundle({hermitian_factor("A", 2, 2)}, {1.0}), build_s1_bundle({hermitian_factor("Q", 4)}, {1.0}),
                 build_coset(algebra(Family::su, 2), {})}) {
    auto fams = hat_decomposition(S);
    int total = 0;
    for (auto& f : fams) total += static_cast<int>(f.basis.cols());
    CHECK(total == S.dim_m());
    int d0 = static_cast<int>(fams[0].basis.cols());
    CHECK((d0 == 1 || d0 == 3));
    const auto& G = S.algebra->metric();
    for (std::size_t i = 0; i < fams.size(); ++i)
      for (std::size_t j = i + 1; j < fams.size(); ++j)
        if (fams[i].basis.cols() && fams[j].basis.cols())
          CHECK((fams[i].basis.transpose() * G * fams[j].basis).cwiseAbs().maxCoeff() < 1e-10);
    // A nonzero h-part means the index is a root of h, and the h-part is its root plane.
    for (auto& f : fams) {
      if (f.index.norm() == 0.0 || f.basis_h.cols() == 0) continue;
      CHECK(is_h_root(S, f.index));
      CHECK(f.basis_h.cols() == 2);
    }
  }
}

TEST_CASE("hathat family 0 and root pairs") {
  // su(5)/s(u(3)+u(2)): for each root plane alpha in m, the hathat family 0
  // for alpha' = pr_h(alpha) is t∩m + g_alpha exactly when alpha and -alpha are
  // the only roots in span{alpha, t∩m}.
  auto S = build_s1_bundle({hermitian_factor("A", 3, 2)}, {1.0});
  const auto& L = *S.algebra;
  Eigen::VectorXd u0 = S.t_cap_m.col(0);
  int seen_true = 0;
  for (std::size_t j = 0; j < S.cartan.planes.size(); ++j) {
    if (S.plane_location[j] != PlaneLocation::in_m) continue;
    Eigen::VectorXd a = S.cartan.planes[j].alpha_g;
    Eigen::VectorXd ap = S.project_h(a);
    auto fams = hathat_decomposition(S, ap);
    REQUIRE(fams[0].index.norm() == 0.0);
    bool only = true;
    Eigen::MatrixXd B(L.dim(), 2);
    B << a, u0;
    Eigen::MatrixXd P = B * (B.transpose() * L.metric() * B).inverse() * B.transpose() * L.metric();
    for (std::size_t k = 0; k < S.cartan.planes.size(); ++k) {
      if (k == j) continue;
      Eigen::VectorXd g = S.cartan.planes[k].alpha_g;
      if (L.norm(g - P * g) < 1e-9) only = false;
    }
    CHECK((fams[0].basis.cols() == 3) == only);
    if (only) ++seen_true;
  }
  CHECK(seen_true > 0);
  CHECK_THROWS_AS(hathat_decomposition(S, Eigen::VectorXd::Zero(L.dim())), ParameterError);
}
