#include <cmath>

#include "doctest.h"
#include "flagcurv/criterion.hpp"
#include "flagcurv/error.hpp"
#include "flagcurv/random.hpp"

using namespace flagcurv;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

VectorXd e(int n, int i) { return VectorXd::Unit(n, i); }

CriterionInstance floating_copy(CriterionInstance inst) {
  inst.exact = false;
  inst.exact_roots.clear();
  inst.exact_u0.clear();
  return inst;
}

}  // namespace

TEST_CASE("check_root_pair on classical witnesses") {
  auto a32 = catalog_case("A(3,2)");
  CHECK(a32.exact);
  CHECK(a32.listed);
  CHECK(a32.root_system.roots.size() == 20u);
  CHECK(a32.h_roots.size() == 8u);  // su(3) + su(2)
  auto c = check_root_pair(a32, e(5, 0) - e(5, 3), e(5, 1) - e(5, 4));
  CHECK(c.ok);
  CHECK(c.independent);
  CHECK(c.condition1);
  CHECK(c.condition2);
  CHECK(c.condition3);

  auto c5 = catalog_case("C(5)");
  CHECK(check_root_pair(c5, 2 * e(5, 0), 2 * e(5, 1)).ok);
  auto same = check_root_pair(c5, 2 * e(5, 0), 2 * e(5, 0));
  CHECK_FALSE(same.ok);
  CHECK_FALSE(same.independent);
  CHECK_FALSE(check_root_pair(c5, 2 * e(5, 0), -2 * e(5, 0)).independent);

  auto d5 = catalog_case("D(5)");
  CHECK(check_root_pair(d5, e(5, 0) + e(5, 1), e(5, 2) + e(5, 3)).ok);
  // e1 - e2 is a root of u(5)'s semisimple part.
  auto h = check_root_pair(d5, e(5, 0) - e(5, 1), e(5, 2) + e(5, 3));
  CHECK_FALSE(h.condition1);
  CHECK_FALSE(h.ok);
}

TEST_CASE("exceptional witnesses") {
  auto e7 = catalog_case("E7");
  CHECK(e7.root_system.roots.size() == 126u);
  CHECK(e7.h_roots.size() == 72u);
  CHECK_FALSE(e7.exact);
  // beta + R alpha + R u0 also contains sqrt(2) e7, a root with plane in m:
  // sqrt(2) e7 - beta = -alpha + sqrt(2) (sqrt(2) e6 + e7).
  auto c7 = check_root_pair(e7, e(7, 4) + e(7, 5), e(7, 4) - e(7, 5));
  CHECK(c7.independent);
  CHECK(c7.condition1);
  CHECK(c7.condition2);
  CHECK_FALSE(c7.condition3);
  REQUIRE(c7.condition3_extra.size() == 1u);
  CHECK((e7.root_system.roots[c7.condition3_extra[0]] - std::sqrt(2.0) * e(7, 6)).norm() < 1e-12);
  CHECK(enumerate_root_pairs(e7).empty());
  // The verdict does not depend on the sign convention for t∩m.
  CriterionInstance flipped = e7;
  const VectorXd u_flip = vec({0, 0, 0, 0, 0, std::sqrt(2.0), -1.0});
  flipped.h_roots.clear();
  for (std::size_t i = 0; i < e7.root_system.roots.size(); ++i)
    if (std::abs(e7.root_system.roots[i].dot(u_flip)) < 1e-9) flipped.h_roots.push_back(static_cast<int>(i));
  finalize_instance(flipped, u_flip);
  CHECK(flipped.h_roots.size() == 72u);
  CHECK(enumerate_root_pairs(flipped).empty());

  auto e6 = catalog_case("E6");
  CHECK(e6.h_roots.size() == 40u);
  auto w = catalog_witness("E6");
  REQUIRE(w.has_value());
  CHECK(check_root_pair(e6, w->first, w->second).ok);
  CHECK(std::abs(w->first.dot(w->second)) < 1e-12);

  // All five half-coordinates negative together with -sqrt(3)/2: no '+' sign.
  const double s3 = std::sqrt(3.0) / 2.0;
  VectorXd literal = vec({-0.5, -0.5, -0.5, -0.5, -0.5, -s3});
  CHECK(e6.root_system.find(literal) < 0);
  CHECK_THROWS_AS(check_root_pair(e6, w->first, literal), ParameterError);
  CHECK_THROWS_AS(check_root_pair(e6, w->first, vec({1, 0, 0})), ParameterError);
}

TEST_CASE("sign symmetry") {
  for (const char* name : {"D(5)", "E6", "A(3,2)"}) {
    auto inst = catalog_case(name);
    Rng rng(17);
    const int n = static_cast<int>(inst.root_system.roots.size());
    for (int t = 0; t < 40; ++t) {
      int a = static_cast<int>(rng.uniform() * n) % n;
      int b = static_cast<int>(rng.uniform() * n) % n;
      const auto& ra = inst.root_system.roots[a];
      const auto& rb = inst.root_system.roots[b];
      bool ok = check_root_pair(inst, ra, rb).ok;
      CHECK(check_root_pair(inst, VectorXd(-ra), rb).ok == ok);
      CHECK(check_root_pair(inst, ra, VectorXd(-rb)).ok == ok);
      CHECK(check_root_pair(inst, VectorXd(-ra), VectorXd(-rb)).ok == ok);
    }
  }
}

TEST_CASE("literal reading of condition 3 is never satisfied") {
  for (const char* name : {"A(3,2)", "C(5)", "D(5)", "E6", "E7"}) {
    auto inst = catalog_case(name);
    auto w = catalog_witness(name);
    REQUIRE(w.has_value());
    auto lit = check_root_pair(inst, w->first, w->second, Condition3Reading::literal);
    CHECK_FALSE(lit.condition3);
    CHECK_FALSE(lit.ok);
    CHECK(enumerate_root_pairs(inst, 1, Condition3Reading::literal).empty());
  }
}

TEST_CASE("enumeration: spheres and rank one are empty") {
  for (const char* name : {"A(1,1)", "A(2,1)", "A(3,1)", "A(1,4)"}) {
    auto inst = catalog_case(name);
    CHECK_FALSE(inst.listed);
    CHECK(enumerate_root_pairs(inst).empty());
  }
  // Brute force over all ordered root pairs of A(3,1) (12 roots).
  auto s7 = catalog_case("A(3,1)");
  int ok = 0;
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b) ok += a != b && check_root_pair(s7, a, b).ok;
  CHECK(ok == 0);
}

TEST_CASE("regression table: listed cases carry their witnesses") {
  for (const char* name : {"A(3,2)", "A(4,4)", "C(5)", "D(5)", "E6"}) {
    CAPTURE(name);
    auto inst = catalog_case(name);
    CHECK(inst.listed);
    auto pairs = enumerate_root_pairs(inst, 2);
    CHECK_FALSE(pairs.empty());
    auto w = catalog_witness(name);
    REQUIRE(w.has_value());
    CHECK(contains_pair(inst, pairs, w->first, w->second));
    for (const auto& p : pairs) CHECK(check_root_pair(inst, p.alpha, p.beta).ok);
    CHECK(enumerate_root_pairs(inst, 1).size() == pairs.size());
  }
}

TEST_CASE("exact and floating membership agree") {
  for (const char* name : {"A(3,2)", "C(5)", "D(5)", "A(2,1)"}) {
    auto inst = catalog_case(name);
    REQUIRE(inst.exact);
    auto ex = enumerate_root_pairs(inst);
    auto fl = enumerate_root_pairs(floating_copy(inst));
    REQUIRE(ex.size() == fl.size());
    for (std::size_t i = 0; i < ex.size(); ++i) {
      CHECK(ex[i].alpha == fl[i].alpha);
      CHECK(ex[i].beta == fl[i].beta);
    }
  }
}

TEST_CASE("catalog errors and flags") {
  CHECK_THROWS_AS(catalog_case("B(3)"), ParameterError);
  CHECK_THROWS_AS(catalog_case("A(0,2)"), ParameterError);
  CHECK_THROWS_AS(catalog_case("A(2,x)"), ParameterError);
  CHECK_FALSE(catalog_case("C(3)").listed);
  CHECK_FALSE(catalog_case("D(6)").listed);
  CHECK(catalog_case("D(7)").listed);
  for (auto& inst : {catalog_case("A(3,2)"), catalog_case("E7"), catalog_case("Q(5)")}) {
    CHECK(std::abs(inst.u0.norm() - 1.0) < 1e-14);
    for (int h : inst.h_roots) CHECK(std::abs(inst.root_system.roots[h].dot(inst.u0)) < 1e-12);
  }
}

TEST_CASE("ratio_exclusion") {
  CHECK_FALSE(ratio_exclusion(1.0, 2.0));
  CHECK(ratio_exclusion(1.0, 3.0));
  CHECK_FALSE(ratio_exclusion(1.0, -1.0));
  CHECK_FALSE(ratio_exclusion(-2.0, 1.0));
  CHECK(ratio_exclusion(1.0, 1.0 + 1e-6));
  CHECK_FALSE(ratio_exclusion(1.0, 1.0 + 1e-12));
  CHECK_THROWS_AS(ratio_exclusion(0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(ratio_exclusion(1.0, 0.0), ParameterError);
  CHECK_FALSE(ratio_exclusion(Rational(1, 3), Rational(2, 3)));
  CHECK(ratio_exclusion(Rational(1, 3), Rational(3, 4)));
  CHECK_THROWS_AS(ratio_exclusion(Rational(0), Rational(1)), ParameterError);
}

TEST_CASE("product_case_check decision tree") {
  auto k2 = product_case_check(parse_product_spec("A(1,1)+A(1,1)@1,3"));
  CHECK(k2.excluded);
  CHECK(k2.predicate == "ratio_exclusion");
  CHECK_FALSE(product_case_check(parse_product_spec("A(1,1)+A(1,1)@1,1")).excluded);
  CHECK_FALSE(product_case_check(parse_product_spec("A(1,1)+A(1,1)@2,-1")).excluded);

  auto k3 = product_case_check(parse_product_spec("A(1,1)+A(1,1)+A(1,1)@1,1,2"));
  CHECK(k3.excluded);
  REQUIRE(k3.witness_check.has_value());
  CHECK(k3.witness_check->ok);
  CHECK_FALSE(product_case_check(parse_product_spec("A(1,1)+A(1,1)+A(1,1)@1,1,1")).excluded);
  CHECK_FALSE(product_case_check(parse_product_spec("A(1,1)+A(1,1)+A(1,1)@1,-1,1")).excluded);
  CHECK(product_case_check(parse_product_spec("A(1,1)+A(2,1)+A(1,1)@1,1,1")).excluded);
  CHECK(product_case_check(parse_product_spec("C(2)+A(2,1)@1,1")).excluded);
  CHECK(product_case_check(parse_product_spec("E6+C(3)@1,-2")).excluded);

  CHECK_THROWS_AS(product_case_check(parse_product_spec("A(2,1)")), ParameterError);
  CHECK_THROWS_AS(parse_product_spec("A(1,1)+A(1,1)@1"), ParameterError);
  CHECK_THROWS_AS(product_case_check(parse_product_spec("A(1,1)+A(1,1)@1,0")), ParameterError);
}

TEST_CASE("product_case_check k > 3 on random specs") {
  const char* pool[] = {"A(1,1)", "A(2,1)", "A(3,2)", "C(2)", "C(3)", "D(4)", "Q(5)", "A(2,2)"};
  Rng rng(4242);
  for (int t = 0; t < 50; ++t) {
    ProductSpec spec;
    const int k = 4 + static_cast<int>(rng.uniform() * 3);
    for (int i = 0; i < k; ++i) {
      spec.factors.push_back(parse_factor_label(pool[static_cast<int>(rng.uniform() * 8) % 8]));
      double c = 0.2 + 2.8 * rng.uniform();
      spec.c.push_back(rng.uniform() < 0.5 ? -c : c);
    }
    auto v = product_case_check(spec);
    CHECK(v.excluded);
    CHECK(v.rule == "k>3");
    REQUIRE(v.witness_check.has_value());
    CHECK(v.witness_check->ok);
  }
}

TEST_CASE("k = 2 mixed case: exceptional set matches the direct check") {
  ProductSpec spec = parse_product_spec("C(2)+A(1,1)@0.37,1");
  auto v = product_case_check(spec);
  CHECK(v.rule == "k=2 mixed");
  CHECK(v.excluded);
  REQUIRE_FALSE(v.exceptional.empty());
  const VectorXd beta = product_instance(spec).root_system.roots[v.witness->beta];
  for (const auto& ex : v.exceptional) {
    CHECK_FALSE(ex.values.empty());
    for (double c : ex.values) {
      // Exceptional values come in +- pairs.
      bool mirrored = false;
      for (double d : ex.values) mirrored = mirrored || std::abs(c + d) < 1e-9;
      CHECK(mirrored);
      ProductSpec at = spec;
      at.c = {c, 1.0};
      auto inst = product_instance(at);
      auto chk = check_root_pair(inst, ex.alpha, inst.root_system.find(beta));
      CHECK_FALSE(chk.condition3);
    }
    ProductSpec generic = spec;
    generic.c = {0.37, 1.0};
    auto inst = product_instance(generic);
    CHECK(check_root_pair(inst, ex.alpha, inst.root_system.find(beta)).ok);
  }
  // c hitting every exceptional set gives no verdict.
  auto first = v.exceptional.front().values;
  for (double c : first) {
    bool everywhere = true;
    for (const auto& ex : v.exceptional) {
      bool in = false;
      for (double d : ex.values) in = in || std::abs(c - d) < 1e-9;
      everywhere = everywhere && in;
    }
    ProductSpec at = spec;
    at.c = {c, 1.0};
    CHECK(product_case_check(at).excluded == !everywhere);
  }
}

TEST_CASE("catalog data agrees with computed cosets") {
  struct Case {
    const char* type;
    int p, q;
    const char* name;
  };
  for (const Case& cs : {Case{"A", 2, 1, "A(2,1)"}, Case{"A", 2, 2, "A(2,2)"}, Case{"C", 3, 0, "C(3)"},
                         Case{"D", 4, 0, "D(4)"}, Case{"Q", 5, 0, "Q(5)"}, Case{"Q", 6, 0, "Q(6)"}}) {
    CAPTURE(cs.name);
    auto space = build_s1_bundle({hermitian_factor(cs.type, cs.p, cs.q)}, {1.0});
    auto computed = criterion_instance(space);
    auto cat = catalog_case(cs.name);
    std::vector<int> lc(computed.root_system.roots.size()), lt(cat.root_system.roots.size());
    for (std::size_t i = 0; i < lc.size(); ++i) lc[i] = computed.is_h_root(static_cast<int>(i));
    for (std::size_t i = 0; i < lt.size(); ++i) lt[i] = cat.is_h_root(static_cast<int>(i));
    auto iso = find_isometry(computed.root_system, cat.root_system, lc, lt,
                             {IsometryConstraint{computed.u0, cat.u0, true}});
    REQUIRE(iso.has_value());
    CHECK(iso->residual <= 1e-8);
    CHECK(std::min((iso->Q * computed.u0 - cat.u0).norm(), (iso->Q * computed.u0 + cat.u0).norm()) <= 1e-8);
    CHECK(enumerate_root_pairs(computed).size() == enumerate_root_pairs(cat).size());
  }
}

TEST_CASE("criterion table rows") {
  auto row = criterion_row("E6");
  CHECK(row.excluded);
  REQUIRE(row.witness_found.has_value());
  CHECK(*row.witness_found);
  auto e7 = criterion_row("E7");
  CHECK_FALSE(e7.excluded);
  REQUIRE(e7.witness_found.has_value());
  CHECK_FALSE(*e7.witness_found);
  auto sphere = criterion_row("A(2,1)");
  CHECK_FALSE(sphere.excluded);
  CHECK(sphere.n_pairs == 0);
  auto prod = criterion_row("A(1,1)+A(1,1)+A(1,1)+A(2,1)@1,2,3,4");
  CHECK(prod.excluded);
  auto text = rows_to_text({row, sphere, prod});
  CHECK(text.find("excluded") != std::string::npos);
  auto j = row_to_json(row);
  CHECK(j["n_roots"] == 72);
}
