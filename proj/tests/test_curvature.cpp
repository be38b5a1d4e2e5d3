#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "flagcurv/curvature.hpp"
#include "flagcurv/error.hpp"
#include "flagcurv/random.hpp"

using namespace flagcurv;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::shared_ptr<const LieAlgebra> algebra(Family f, int n, double scale = 0.0) {
  return std::make_shared<LieAlgebra>(build_classical(f, n, scale));
}

CosetDecomposition so4_so2() { return build_coset(algebra(Family::so, 4), {VectorXd::Unit(6, 5)}); }

CosetDecomposition su3_su2() {
  return build_coset(algebra(Family::su, 3), {VectorXd::Unit(8, 0), VectorXd::Unit(8, 1), VectorXd::Unit(8, 6)});
}

MinkowskiNorm normal_metric(const CosetDecomposition& S) { return MinkowskiNorm::euclidean(S.dim_m()); }

MinkowskiNorm random_randers(int n, Rng& rng, double bnorm = 0.4) {
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
  MatrixXd A = MatrixXd::Identity(n, n) + 0.2 * M * M.transpose() / n;
  VectorXd b = rng.normal_vector(n);
  b *= bnorm / randers_b_norm(A, b);
  return MinkowskiNorm::randers(A, b);
}

MinkowskiNorm small_glued(int n, Rng& rng) {
  MinkowskiNorm F1 = random_randers(n, rng, 0.2);
  MatrixXd A = F1.matrix();
  MinkowskiNorm F2 = MinkowskiNorm::randers(A + 1e-3 * MatrixXd::Identity(n, n), F1.covector() * 1.001);
  BumpFunction bump;
  bump.axis = VectorXd::Unit(n, 0);
  return glue(F1, F2, bump);
}

Flag random_flag(int n, Rng& rng) { return Flag{rng.normal_vector(n), rng.normal_vector(n)}; }

}  // namespace

TEST_CASE("su(2) orthonormal cyclic basis") {
  auto S = build_coset(algebra(Family::su, 2, 2.0), {});
  MinkowskiNorm F = normal_metric(S);
  // The m frame of su(2) at scale 2 is orthonormal with |[e1,e2]| = 1.
  VectorXd e1 = VectorXd::Unit(3, 0), e2 = VectorXd::Unit(3, 1);
  CHECK(S.bracket_mm(e1, e2).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(riemann_quadratic(S, F, e1, e2) == doctest::Approx(0.25).epsilon(1e-12));
  CurvatureResult r = flag_curvature_detailed(S, F, Flag{e1, e2});
  CHECK(r.K == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.eta_skipped);
  CHECK(r.eta_norm <= 1e-14);
  CHECK(sectional_oracle_normal(S, e1, e2) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.condition_number == doctest::Approx(1.0));
}

TEST_CASE("normal homogeneous oracle equivalence") {
  std::vector<std::pair<std::string, CosetDecomposition>> spaces;
  spaces.emplace_back("su2", build_coset(algebra(Family::su, 2), {}));
  spaces.emplace_back("su3", build_coset(algebra(Family::su, 3), {}));
  spaces.emplace_back("so4/so2", so4_so2());
  spaces.emplace_back("su3/su2", su3_su2());
  Rng rng(21);
  for (const auto& [name, S] : spaces) {
    CAPTURE(name);
    MinkowskiNorm F = normal_metric(S);
    for (int k = 0; k < 100; ++k) {
      Flag f = random_flag(S.dim_m(), rng);
      double K = flag_curvature(S, F, f);
      double O = sectional_oracle_normal(S, f.pole, f.wing);
      CHECK(curvature_close(K, O));
      CHECK(O >= 0.0);
    }
    // Finite-difference mode on the same data.
    Flag f = random_flag(S.dim_m(), rng);
    CurvatureOptions fd;
    fd.mode = DerivativeMode::finite;
    CHECK(curvature_close(flag_curvature(S, F, f, fd), sectional_oracle_normal(S, f.pole, f.wing)));
  }
}

TEST_CASE("abelian plane has zero curvature") {
  auto L = std::make_shared<LieAlgebra>(build_abelian(3));
  auto S = build_coset(L, {});
  MinkowskiNorm F = normal_metric(S);
  CHECK(riemann_quadratic(S, F, VectorXd::Unit(3, 0), VectorXd::Unit(3, 1)) == 0.0);
  Rng rng(1);
  MinkowskiNorm R = random_randers(3, rng);
  CHECK(std::abs(flag_curvature(S, R, random_flag(3, rng))) <= 1e-14);
}

TEST_CASE("spray and connection identities") {
  auto S = build_coset(algebra(Family::su, 3), {});
  Rng rng(5);
  const int n = S.dim_m();
  MinkowskiNorm R = random_randers(n, rng);
  MinkowskiNorm G = small_glued(n, rng);
  SUBCASE("bi-invariant eta vanishes") {
    for (int k = 0; k < 10; ++k) CHECK(spray_eta(S, normal_metric(S), rng.normal_vector(n)).norm() <= 1e-13);
  }
  for (const MinkowskiNorm* F : {&R, &G}) {
    for (int k = 0; k < 10; ++k) {
      VectorXd u = rng.normal_vector(n), w1 = rng.normal_vector(n), w2 = rng.normal_vector(n);
      VectorXd eta = spray_eta(S, *F, u);
      // Independent dense solve of <eta, w>_u = <u, [w,u]_m>_u over the frame.
      MatrixXd g = hessian(*F, u);
      VectorXd r(n);
      for (int a = 0; a < n; ++a) r[a] = u.dot(g * S.bracket_mm(VectorXd::Unit(n, a), u));
      VectorXd eta_ls = g.colPivHouseholderQr().solve(r);
      CHECK((eta - eta_ls).norm() <= 1e-10 * std::max(1.0, eta.norm()));
      // Both sides of the defining equation are quadratic in u, so eta is 2-homogeneous.
      for (double lam : {2.0, 1.0 / 3.0})
        CHECK((spray_eta(S, *F, lam * u) - lam * lam * eta).norm() <= 1e-10 * eta.norm());
      // Linearity of N in w and N(u,u) = eta(u).
      VectorXd lin = connection_N(S, *F, u, 2.0 * w1 - 0.5 * w2) - 2.0 * connection_N(S, *F, u, w1) +
                     0.5 * connection_N(S, *F, u, w2);
      CHECK(lin.norm() <= 1e-10);
      CHECK((connection_N(S, *F, u, u) - eta).norm() <= 1e-10 * std::max(1.0, eta.norm()));
    }
  }
}

TEST_CASE("bi-invariant connection is half the bracket") {
  auto S = build_coset(algebra(Family::su, 3), {});
  Rng rng(8);
  MinkowskiNorm F = normal_metric(S);
  for (int k = 0; k < 10; ++k) {
    VectorXd u = rng.normal_vector(8), w = rng.normal_vector(8);
    CHECK((connection_N(S, F, u, w) - 0.5 * S.bracket_mm(w, u)).norm() <= 1e-12);
  }
}

TEST_CASE("wing and pole-scale invariance on Finsler metrics") {
  auto S = build_coset(algebra(Family::su, 2), {});
  Rng rng(13);
  MinkowskiNorm R = random_randers(3, rng);
  MinkowskiNorm G = small_glued(3, rng);
  for (const MinkowskiNorm* F : {&R, &G}) {
    for (int k = 0; k < 20; ++k) {
      Flag f = random_flag(3, rng);
      double K = flag_curvature(S, *F, f);
      CHECK(std::abs(flag_curvature(S, *F, Flag{f.pole, f.wing + 0.7 * f.pole}) - K) <= 1e-8);
      CHECK(std::abs(flag_curvature(S, *F, Flag{2.0 * f.pole, f.wing}) - K) <= 1e-8);
    }
  }
}

TEST_CASE("automatic and finite-difference modes agree") {
  auto S = su3_su2();
  Rng rng(17);
  // Ad(H)-invariance is not needed for this consistency check on the formula.
  MinkowskiNorm R = random_randers(S.dim_m(), rng);
  CurvatureOptions fd;
  fd.mode = DerivativeMode::finite;
  for (int k = 0; k < 10; ++k) {
    Flag f = random_flag(S.dim_m(), rng);
    CHECK(curvature_close(flag_curvature(S, R, f), flag_curvature(S, R, f, fd), 1e-6, 1e-8));
  }
  auto T = build_coset(algebra(Family::su, 2), {});
  MinkowskiNorm G = small_glued(3, rng);
  // Finite differences of numeric Cartan tensors are only accurate to ~1e-3
  // here, and only away from the transition band where the norm is smooth on
  // the scale of the steps.
  fd.cartan_step = 1e-3;
  fd.eta_step = 1e-3;
  int checked = 0;
  while (checked < 10) {
    Flag f = random_flag(3, rng);
    double angle = std::acos(f.pole.normalized().dot(G.bump().axis));
    if (angle > 0.1 && angle < 0.6) continue;
    ++checked;
    CAPTURE(angle);
    CHECK(curvature_close(flag_curvature(T, G, f), flag_curvature(T, G, f, fd), 1e-3, 1e-5));
  }
}

TEST_CASE("commuting formula") {
  auto S = so4_so2();
  MinkowskiNorm F = normal_metric(S);
  // Commuting pairs in m: find elements of m bracketing to zero.
  const auto& L = *S.algebra;
  std::vector<std::pair<VectorXd, VectorXd>> pairs;
  const int n = S.dim_m();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      VectorXd u = VectorXd::Unit(n, a), v = VectorXd::Unit(n, b);
      if (L.norm(S.bracket(S.from_m(u), S.from_m(v))) <= 1e-12) pairs.emplace_back(u, v);
    }
  REQUIRE_FALSE(pairs.empty());
  for (auto& [u, v] : pairs) {
    double Kc = flag_curvature_commuting(S, F, u, v);
    CHECK(std::abs(Kc - flag_curvature(S, F, Flag{u, v})) <= 1e-6);
    CHECK(Kc >= 0.0);
    // U solves its linear system.
    VectorXd U = commuting_U(S, F, u, v);
    for (int a = 0; a < n; ++a) {
      VectorXd w = VectorXd::Unit(n, a);
      double rhs = 0.5 * (S.bracket_mm(w, u).dot(v) + S.bracket_mm(w, v).dot(u));
      CHECK(std::abs(U.dot(w) - rhs) <= 1e-10);
    }
  }
  SUBCASE("non-commuting pair is rejected") {
    auto T = build_coset(algebra(Family::su, 2), {});
    CHECK_THROWS_AS(flag_curvature_commuting(T, normal_metric(T), VectorXd::Unit(3, 0), VectorXd::Unit(3, 1)),
                    PreconditionError);
  }
  SUBCASE("centre flags vanish") {
    auto Lc = std::make_shared<LieAlgebra>(direct_sum({build_abelian(2), build_classical(Family::su, 2)}));
    auto C = build_coset(Lc, {});
    MinkowskiNorm E = normal_metric(C);
    // The abelian summand comes first in the direct sum.
    std::vector<VectorXd> centre = {C.to_m(VectorXd::Unit(5, 0)), C.to_m(VectorXd::Unit(5, 1))};
    REQUIRE(Lc->ad(C.from_m(centre[1])).norm() <= 1e-12);
    CHECK(commuting_U(C, E, centre[0], centre[1]).norm() <= 1e-14);
    CHECK(flag_curvature_commuting(C, E, centre[0], centre[1]) <= 1e-20);
    CHECK(std::abs(flag_curvature(C, E, Flag{centre[0], centre[1]})) <= 1e-14);
  }
}

TEST_CASE("Ad(H)-equivariance for an invariant Randers metric") {
  auto S = so4_so2();
  const int n = S.dim_m();
  // Ad(H)-fixed vectors of m: the kernel of ad(h) on m.
  MatrixXd adh(n, n);
  for (int a = 0; a < n; ++a) adh.col(a) = S.act_h(VectorXd::Unit(1, 0), VectorXd::Unit(n, a));
  Eigen::FullPivLU<MatrixXd> lu(adh);
  MatrixXd fixed = lu.kernel();
  REQUIRE(fixed.cols() == 1);
  // b is A-dual to a fixed vector, A = identity, so the Randers norm is invariant.
  MinkowskiNorm R = MinkowskiNorm::randers(MatrixXd::Identity(n, n), 0.3 * fixed.col(0).normalized());
  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    MatrixXd Ad = (0.37 * (k + 1) * adh).exp();
    Flag f = random_flag(n, rng);
    double K = flag_curvature(S, R, f);
    CHECK(std::abs(flag_curvature(S, R, Flag{Ad * f.pole, Ad * f.wing}) - K) <= 1e-7);
  }
}

TEST_CASE("errors") {
  auto S = build_coset(algebra(Family::su, 2), {});
  MinkowskiNorm F = normal_metric(S);
  VectorXd e1 = VectorXd::Unit(3, 0);
  CHECK_THROWS_AS(flag_curvature(S, F, Flag{VectorXd::Zero(3), e1}), DomainError);
  CHECK_THROWS_AS(flag_curvature(S, F, Flag{e1, 2.0 * e1}), DomainError);
  CHECK_THROWS_AS(flag_curvature(S, F, Flag{VectorXd::Zero(2), e1}), ParameterError);
  CHECK_THROWS_AS(spray_eta(S, MinkowskiNorm::euclidean(4), e1), ParameterError);
  CHECK_THROWS_AS(sectional_oracle_normal(S, e1, e1), DomainError);
}
