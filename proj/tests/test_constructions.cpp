#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "flagcurv/constructions.hpp"
#include "flagcurv/random.hpp"

using namespace flagcurv;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Bundle {
  CosetDecomposition space;
  VectorXd v;  // m frame, unit
};

Bundle q4() {
  Bundle b{build_s1_bundle({hermitian_factor("Q", 4)}, {1.0}), {}};
  b.v = b.space.to_m(*b.space.navigation_v).normalized();
  return b;
}

std::shared_ptr<const LieAlgebra> su2su2() {
  return std::make_shared<LieAlgebra>(direct_sum({build_classical(Family::su, 2), build_classical(Family::su, 2)}));
}

std::shared_ptr<const LieAlgebra> su2r() {
  return std::make_shared<LieAlgebra>(direct_sum({build_classical(Family::su, 2), build_abelian(1)}));
}

MatrixXd ad_h(const CosetDecomposition& S, int k) {
  const int n = S.dim_m();
  MatrixXd M(n, n);
  for (int a = 0; a < n; ++a) M.col(a) = S.act_h(VectorXd::Unit(S.dim_h(), k), VectorXd::Unit(n, a));
  return M;
}

}  // namespace

TEST_CASE("navigation conditions") {
  Bundle b = q4();
  NavigationConditions r = verify_navigation_conditions(b.space, b.v);
  CHECK(r.ok());
  CHECK(r.min_root_pairing > 0.1);
  CHECK(to_json(r)["ok"] == true);
  SUBCASE("vector in p fails the commuting condition with a witness") {
    VectorXd p = VectorXd::Unit(b.space.dim_m(), b.space.dim_m() - 1);
    REQUIRE(std::abs(p.dot(b.v)) < 1e-12);
    NavigationConditions bad = verify_navigation_conditions(b.space, p);
    CHECK_FALSE(bad.condition1);
    CHECK_FALSE(bad.h_witness.empty());
    CHECK_THROWS_AS(build_fp_metric(b.space, p, 0.5), PreconditionError);
  }
  SUBCASE("bundle hypothesis c_i != 0") {
    CHECK_THROWS_AS(build_s1_bundle({hermitian_factor("A", 1, 1), hermitian_factor("A", 1, 1)}, {1.0, 0.0}),
                    ParameterError);
  }
}

TEST_CASE("navigated metric") {
  Bundle b = q4();
  const int n = b.space.dim_m();
  MinkowskiNorm F = build_fp_metric(b.space, b.v, 0.5);
  CHECK(F.has_randers_form());
  NormReport rep = validate_norm(F, 500);
  CHECK(rep.ok());
  CHECK(rep.randers_b_norm == doctest::Approx(0.5).epsilon(1e-12));
  MinkowskiNorm F0 = build_fp_metric(b.space, b.v, 0.0);
  CHECK(F0.riemannian());
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    VectorXd y = rng.normal_vector(n);
    CHECK(evaluate(F0, y) == doctest::Approx(y.norm()).epsilon(1e-14));
  }
  CHECK_THROWS_AS(build_fp_metric(b.space, b.v, 1.0), ParameterError);
  CHECK_THROWS_AS(build_fp_metric(b.space, b.v, -0.1), ParameterError);
  SUBCASE("Ad(H)-invariance") {
    for (int k = 0; k < b.space.dim_h(); ++k)
      for (double t : {0.3, 1.1, 2.7}) {
        MatrixXd Ad = (t * ad_h(b.space, k)).exp();
        for (int s = 0; s < 10; ++s) {
          VectorXd y = rng.normal_vector(n);
          CHECK(std::abs(evaluate(F, Ad * y) - evaluate(F, y)) <= 1e-12);
        }
      }
  }
  SUBCASE("Killing navigation identity") {
    NavigationCheck c = navigation_identity_check(b.space, F, 100, 11);
    CHECK(c.n_pairs == 100);
    CHECK(c.max_abs_diff <= 1e-5);
    CHECK(c.failures == 0);
  }
}

TEST_CASE("pole certificates") {
  Bundle b = q4();
  const int n = b.space.dim_m();
  MinkowskiNorm F = build_fp_metric(b.space, b.v, 0.5);
  const LieAlgebra& L = *b.space.algebra;
  SUBCASE("plane through v gets the non-commuting certificate") {
    VectorXd p = VectorXd::Unit(n, n - 1);
    PoleCertificate c = fp_pole_certificate(b.space, F, b.v, p);
    CHECK(c.tag == CertificateTag::non_commuting);
    CHECK(c.ok);
    double direct = flag_curvature(b.space, F, Flag{c.pole, c.wing});
    CHECK(std::abs(direct - c.curvature) <= 1e-6);
  }
  SUBCASE("commutative plane in p gets the commuting certificate") {
    int found = 0;
    for (auto& [label, ab] : structured_planes(b.space)) {
      const auto& [x, y] = ab;
      if (std::abs(x.dot(b.v)) > 1e-12 || std::abs(y.dot(b.v)) > 1e-12) continue;
      if (L.norm(L.bracket(b.space.from_m(x), b.space.from_m(y))) > 1e-12) continue;
      ++found;
      PoleCertificate c = fp_pole_certificate(b.space, F, x, y);
      CHECK(c.tag == CertificateTag::commuting);
      CHECK(c.ok);
      VectorXd back = c.pole - navigation_solve(F.base(), F.wind(), c.pole) * F.wind();
      CHECK(c.curvature == doctest::Approx(sectional_oracle_normal(b.space, back, c.wing)));
      double direct = flag_curvature(b.space, F, Flag{c.pole, c.wing});
      CHECK(std::abs(direct - c.curvature) <= 1e-6);
    }
    CHECK(found > 0);
  }
}

TEST_CASE("glued rank-2 metrics") {
  for (auto L : {su2su2(), su2r()}) {
    EpsilonSearch es = find_glue_epsilon(L, {}, 0.5, 14, 0.5, 500);
    REQUIRE(es.epsilon > 0.0);
    GluedOptions opt;
    opt.validate_samples = 2000;
    GluedMetric G = build_rank2_glued(L, es.epsilon, opt);
    CHECK(G.report.ok());
    const CosetDecomposition& S = *G.space;
    // t1 and t2 are distinct Cartan subalgebras containing v1, v2.
    CHECK((G.t2 - G.t1 * (G.t1.transpose() * G.t2)).norm() > 0.1);
    CHECK((G.t1 * (G.t1.transpose() * G.v1) - G.v1).norm() <= 1e-12);
    CHECK((G.t2 * (G.t2.transpose() * G.v2) - G.v2).norm() <= 1e-10);
    CHECK(G.norm.bump().mu(G.axis) == 0.0);
    // Locality: poles well outside the theta2 cone see F~1 alone.
    Rng rng(5);
    int inside = 0;
    while (inside < 10) {
      VectorXd y = rng.normal_vector(S.dim_m()), w = rng.normal_vector(S.dim_m());
      if (std::acos(y.normalized().dot(G.axis)) < 0.5) continue;
      ++inside;
      CHECK(flag_curvature(S, G.norm, Flag{y, w}) == flag_curvature(S, G.first, Flag{y, w}));
    }
    // The t1 plane is flat for F~1 but positive at the axis pole, inside the F~2 cone.
    VectorXd a = G.axis;
    VectorXd bvec = G.t1.col(0) - G.t1.col(0).dot(a) * a;
    if (bvec.norm() < 1e-6) bvec = G.t1.col(1) - G.t1.col(1).dot(a) * a;
    bvec.normalize();
    CHECK(std::abs(flag_curvature(S, G.first, Flag{-a, bvec})) <= 1e-20);
    CHECK(flag_curvature(S, G.norm, Flag{a, bvec}) > kPositivityThreshold);
    // Too large epsilon is reported with its margin.
    try {
      build_rank2_glued(L, 0.4, opt);
      CHECK(false);
    } catch (const EpsilonTooLarge& e) {
      CHECK(e.margin <= 0.0);
    }
  }
  SUBCASE("epsilon = 0 is the bi-invariant norm") {
    GluedOptions opt;
    opt.validate_samples = 100;
    GluedMetric G = build_rank2_glued(su2su2(), 0.0, opt);
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
      VectorXd y = rng.normal_vector(6);
      CHECK(evaluate(G.norm, y) == doctest::Approx(y.norm()).epsilon(1e-14));
    }
  }
  SUBCASE("rank must be 2") {
    CHECK_THROWS_AS(build_rank2_glued(std::make_shared<LieAlgebra>(build_classical(Family::su, 2)), 0.01),
                    ParameterError);
    CHECK_THROWS_AS(build_rank2_glued(su2su2(), -1.0), ParameterError);
  }
}

TEST_CASE("fp_scan") {
  SUBCASE("bi-invariant su(2)") {
    auto S = build_coset(std::make_shared<LieAlgebra>(build_classical(Family::su, 2)), {});
    FPReport r = fp_scan(S, MinkowskiNorm::euclidean(3), 30, 8, 1);
    CHECK(r.fp_verified);
    CHECK(r.min_curvature_observed > 0.0);
    CHECK(r.evaluation_errors == 0);
  }
  SUBCASE("bi-invariant su(2)+R has a flat Cartan plane") {
    auto S = build_coset(su2r(), {});
    FPReport r = fp_scan(S, MinkowskiNorm::euclidean(4), 20, 8, 1);
    CHECK_FALSE(r.fp_verified);
    bool flat = false;
    for (const auto& p : r.planes)
      if (p.kind == "tm_pair:0-1") flat = std::abs(p.best_curvature) <= 1e-12;
    CHECK(flat);
  }
  SUBCASE("navigated Q(4) with certificates, deterministic") {
    Bundle b = q4();
    MinkowskiNorm F = build_fp_metric(b.space, b.v, 0.5);
    FPReport r = fp_scan(b.space, F, 40, 16, 9);
    CHECK(r.fp_verified);
    CHECK(r.min_curvature_observed >= -1e-8);
    CHECK(r.certificate_failures == 0);
    for (const auto& p : r.planes) CHECK(p.tag != CertificateTag::numeric);
    ScanOptions two;
    two.threads = 2;
    CHECK(to_json(fp_scan(b.space, F, 40, 16, 9, two)).dump() == to_json(r).dump());
    std::ostringstream os;
    write_csv(r, os);
    CHECK(os.str().rfind("plane_id,kind,pole_angle,curvature\n", 0) == 0);
  }
  SUBCASE("glued su(2)+su(2)") {
    EpsilonSearch es = find_glue_epsilon(su2su2(), {}, 0.5, 14, 0.5, 500);
    GluedOptions opt;
    opt.validate_samples = 1000;
    GluedMetric G = build_rank2_glued(su2su2(), es.epsilon, opt);
    ScanOptions o;
    o.axes = {G.axis};
    o.extra_planes = {G.t1.col(0), G.t1.col(1)};
    FPReport r = fp_scan(*G.space, G.norm, 30, 16, 4, o);
    CHECK(r.fp_verified);
    CHECK(r.planes.back().kind == "extra:0");
    CHECK(r.planes.back().best_curvature > kPositivityThreshold);
  }
  CHECK_THROWS_AS(fp_scan(q4().space, MinkowskiNorm::euclidean(3), 1, 1, 0), ParameterError);
}
