#include "flagcurv/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "flagcurv/cache.hpp"
#include "flagcurv/catalog.hpp"
#include "flagcurv/constructions.hpp"
#include "flagcurv/criterion.hpp"
#include "flagcurv/curvature.hpp"
#include "flagcurv/error.hpp"
#include "flagcurv/random.hpp"

namespace flagcurv {

namespace {

using nlohmann::json;
using Eigen::VectorXd;

// Named boolean checks with their measured values.
struct Checklist {
  json items = json::array();
  bool ok = true;
  void add(const std::string& name, bool pass, json value = nullptr) {
    items.push_back({{"check", name}, {"pass", pass}, {"value", std::move(value)}});
    ok = ok && pass;
  }
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) { return splitmix64(seed ^ (salt * 0x9e3779b97f4a7c15ULL)); }

CriterionOutcome outcome(int id, const char* tag, const char* title) {
  CriterionOutcome o;
  o.id = id;
  o.tag = tag;
  o.title = title;
  return o;
}

std::shared_ptr<const CosetDecomposition> space(const std::string& name) { return build_space(name); }

double worst(const AlgebraChecks& c) {
  return std::max({c.antisymmetry.max_violation, c.jacobi.max_violation, c.ad_invariance.max_violation});
}

json algebra_json(const std::string& name, const LieAlgebra& L, const AlgebraChecks& c) {
  return {{"algebra", name},
          {"dim", L.dim()},
          {"exact", c.antisymmetry.exact && c.jacobi.exact && c.ad_invariance.exact},
          {"max_violation", worst(c)},
          {"ok", c.ok(1e-12)}};
}

CriterionOutcome run_algebra(const ReproduceOptions& opt) {
  CriterionOutcome o = outcome(1, "algebra", "structure constants: antisymmetry, Jacobi, ad-invariance");
  Checklist cl;
  json rows = json::array();
  int n_algebras = 0;
  double max_violation = 0.0;
  auto record = [&](const std::string& name, const LieAlgebra& L) {
    AlgebraChecks c = L.verify();
    rows.push_back(algebra_json(name, L, c));
    ++n_algebras;
    max_violation = std::max(max_violation, worst(c));
    cl.ok = cl.ok && c.ok(1e-12);
  };
  struct Range {
    Family family;
    int lo, hi;
  };
  for (Range r : {Range{Family::su, 2, 5}, Range{Family::so, 3, 8}, Range{Family::sp, 1, 5}})
    for (int n = r.lo; n <= r.hi; ++n) record(std::string(to_string(r.family)) + "(" + std::to_string(n) + ")",
                                              build_classical(r.family, n));
  for (const auto& e : space_catalog()) {
    if (e.kind == "root_level") continue;
    record(e.name, *space(e.name)->algebra);
  }
  cl.add("all algebras within 1e-12", cl.ok, max_violation);
  if (!opt.cache_dir.empty()) {
    double dev = 0.0;
    for (Family f : {Family::su, Family::so, Family::sp})
      for (int n = 2; n <= 4; ++n) {
        load_or_build_cache(opt.cache_dir, f, n);
        CacheLookup again = load_or_build_cache(opt.cache_dir, f, n);
        dev = std::max(dev, cache_deviation(again.entry, build_classical(f, n)));
      }
    cl.add("cached constants match", dev <= 1e-12, dev);
  }
  o.pass = cl.ok;
  std::ostringstream s;
  s << n_algebras << " algebras, max violation " << max_violation;
  o.summary = s.str();
  o.detail = {{"checks", cl.items}, {"algebras", rows}};
  return o;
}

CriterionOutcome run_oracle(const ReproduceOptions& opt) {
  CriterionOutcome o = outcome(2, "oracle", "flag curvature formula against the Riemannian sectional curvature");
  Checklist cl;
  json rows = json::array();
  Rng rng(derive_seed(opt.seed, 2));
  int total_fail = 0;
  for (const char* name : {"su2", "su3", "so4/so2", "su3/su2"}) {
    auto S = space(name);
    MinkowskiNorm F = MinkowskiNorm::euclidean(S->dim_m());
    double max_abs = 0.0, max_rel = 0.0;
    int fails = 0;
    for (int k = 0; k < 100; ++k) {
      Flag f{rng.normal_vector(S->dim_m()), rng.normal_vector(S->dim_m())};
      double K = flag_curvature(*S, F, f);
      double O = sectional_oracle_normal(*S, f.pole, f.wing);
      double d = std::abs(K - O);
      max_abs = std::max(max_abs, d);
      if (std::max(std::abs(K), std::abs(O)) > 0.0) max_rel = std::max(max_rel, d / std::max(std::abs(K), std::abs(O)));
      if (!curvature_close(K, O, 1e-6, 1e-8)) ++fails;
    }
    total_fail += fails;
    rows.push_back({{"space", name}, {"flags", 100}, {"failures", fails}, {"max_abs_diff", max_abs},
                    {"max_rel_diff", max_rel}});
    cl.add(std::string(name) + ": 100 flags agree", fails == 0, max_rel);
  }
  o.pass = cl.ok;
  o.summary = std::to_string(400 - total_fail) + "/400 flags within 1e-6 rel / 1e-8 abs";
  o.detail = {{"checks", cl.items}, {"spaces", rows}};
  return o;
}

MinkowskiNorm navigated_so4(const CosetDecomposition& S, double speed) {
  VectorXd v = S.to_m(*S.navigation_v).normalized();
  return build_fp_metric(S, v, speed);
}

CriterionOutcome run_navigation(const ReproduceOptions& opt) {
  CriterionOutcome o = outcome(3, "navigation", "Killing navigation preserves flag curvature");
  auto S = space("so4/so2");
  MinkowskiNorm F = navigated_so4(*S, 0.5);
  NavigationCheck r = navigation_identity_check(*S, F, 100, derive_seed(opt.seed, 3), 1e-5);
  Checklist cl;
  cl.add("100 pairs", r.n_pairs == 100, r.n_pairs);
  cl.add("max |K - K~| <= 1e-5", r.max_abs_diff <= 1e-5, r.max_abs_diff);
  o.pass = cl.ok;
  std::ostringstream s;
  s << r.n_pairs << " pairs on so4/so2 at speed 0.5, max diff " << r.max_abs_diff;
  o.summary = s.str();
  o.detail = {{"checks", cl.items}, {"space", "so4/so2"}, {"speed", 0.5}, {"max_rel_diff", r.max_rel_diff}};
  return o;
}

json scan_summary(const FPReport& r) {
  double worst_best = std::numeric_limits<double>::infinity();
  for (const auto& p : r.planes) worst_best = std::min(worst_best, p.best_curvature);
  return {{"planes", r.planes.size()},
          {"poles", r.n_poles},
          {"flags", r.n_flags},
          {"fp_verified", r.fp_verified},
          {"min_best_pole_curvature", worst_best},
          {"min_curvature_observed", r.min_curvature_observed},
          {"certificate_failures", r.certificate_failures},
          {"evaluation_errors", r.evaluation_errors}};
}

CriterionOutcome run_fp_scan(const ReproduceOptions& opt) {
  CriterionOutcome o = outcome(4, "fp-scan", "every plane of so4/so2 (navigated) has a positively curved flag");
  auto S = space("so4/so2");
  MinkowskiNorm F = navigated_so4(*S, 0.5);
  ScanOptions so;
  so.threads = opt.threads;
  FPReport r = fp_scan(*S, F, 500, 64, derive_seed(opt.seed, 4), so);
  Checklist cl;
  bool every = !r.planes.empty();
  int n_cert = 0;
  for (const auto& p : r.planes) {
    every = every && p.best_curvature > kPositivityThreshold;
    n_cert += p.tag != CertificateTag::numeric;
  }
  cl.add("every plane has curvature > 1e-8", every);
  cl.add("global minimum >= -1e-8", r.min_curvature_observed >= -kPositivityThreshold, r.min_curvature_observed);
  cl.add("no certificate failures", r.certificate_failures == 0, r.certificate_failures);
  cl.add("no evaluation errors", r.evaluation_errors == 0, r.evaluation_errors);
  cl.add("scan verified", r.fp_verified);
  o.pass = cl.ok;
  std::ostringstream s;
  s << r.planes.size() << " planes x " << r.n_poles << " poles, " << n_cert << " certified, min "
    << r.min_curvature_observed;
  o.summary = s.str();
  o.detail = {{"checks", cl.items}, {"scan", scan_summary(r)}, {"certified_planes", n_cert}};
  return o;
}

// Orthonormal m-frame basis of the centre of g.
Eigen::MatrixXd centre_m(const CosetDecomposition& S) {
  const LieAlgebra& L = *S.algebra;
  const int n = L.dim();
  Eigen::MatrixXd M(n * n, n);
  for (int j = 0; j < n; ++j) M.block(j * n, 0, n, n) = L.ad(VectorXd::Unit(n, j));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  Eigen::MatrixXd K = lu.kernel();
  if (lu.rank() == n) return Eigen::MatrixXd(S.dim_m(), 0);
  Eigen::MatrixXd C(S.dim_m(), K.cols());
  for (int c = 0; c < K.cols(); ++c) C.col(c) = S.to_m(K.col(c));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  return qr.householderQ() * Eigen::MatrixXd::Identity(S.dim_m(), K.cols());
}

json glued_case(const std::string& name, const ReproduceOptions& opt, Checklist& cl) {
  auto S0 = space(name);
  GluedOptions go;
  EpsilonSearch es = find_glue_epsilon(S0->algebra, go, 0.5, 20, 0.5, 2000);
  cl.add(name + ": epsilon found by bisection", es.epsilon > 0.0, es.epsilon);
  GluedMetric G = build_rank2_glued(S0->algebra, es.epsilon, go);
  cl.add(name + ": 1e4-sample validation", G.report.n_samples >= 10000 && G.report.ok(), G.report.min_eigenvalue);
  const CosetDecomposition& S = *G.space;

  ScanOptions so;
  so.threads = opt.threads;
  so.axes = {G.axis};
  so.extra_planes = {G.t1.col(0), G.t1.col(1)};
  Eigen::MatrixXd Z = centre_m(S);
  Rng rng(derive_seed(opt.seed, 50 + name.size()));
  for (int c = 0; c < Z.cols(); ++c)
    for (int k = 0; k < 4; ++k) {
      VectorXd w = rng.normal_vector(S.dim_m());
      w -= Z * (Z.transpose() * w);
      so.extra_planes.push_back(Z.col(c));
      so.extra_planes.push_back(w.normalized());
    }
  FPReport r = fp_scan(S, G.norm, 200, 32, derive_seed(opt.seed, 5), so);
  cl.add(name + ": scan verified", r.fp_verified, r.min_curvature_observed);
  const PlaneRecord* t1 = nullptr;
  bool centre_ok = true;
  double centre_min = std::numeric_limits<double>::infinity();
  for (const auto& p : r.planes) {
    if (p.kind == "extra:0") t1 = &p;
    else if (p.kind.rfind("extra:", 0) == 0) {
      centre_ok = centre_ok && p.best_curvature > kPositivityThreshold;
      centre_min = std::min(centre_min, p.best_curvature);
    }
  }
  json t1j = nullptr;
  if (t1) {
    // The axis lies in t1 and has mu = 0; F~1 alone is flat on t1.
    VectorXd a = G.axis, w = t1->a - t1->a.dot(a) * a;
    if (w.norm() < 1e-6) w = t1->b - t1->b.dot(a) * a;
    w.normalize();
    const double mu = G.norm.bump().mu(a);
    const double K_axis = flag_curvature(S, G.norm, Flag{a, w});
    const double K_first = flag_curvature(S, G.first, Flag{a, w});
    cl.add(name + ": t1 plane positive", t1->best_curvature > kPositivityThreshold, t1->best_curvature);
    cl.add(name + ": t1 positive at a pole with mu = 0", mu == 0.0 && K_axis > kPositivityThreshold, K_axis);
    cl.add(name + ": t1 flat for F~1 alone", std::abs(K_first) <= 1e-12, K_first);
    t1j = {{"best_curvature", t1->best_curvature}, {"best_pole_mu", G.norm.bump().mu(t1->best_pole)},
           {"axis_curvature", K_axis}, {"axis_curvature_first", K_first}};
  } else {
    cl.add(name + ": t1 plane scanned", false);
  }
  if (Z.cols() > 0) cl.add(name + ": centre planes positive", centre_ok, centre_min);
  return {{"space", name},
          {"epsilon", es.epsilon},
          {"boundary", es.boundary},
          {"min_eigenvalue", G.report.min_eigenvalue},
          {"centre_dim", Z.cols()},
          {"t1_plane", t1j},
          {"scan", scan_summary(r)}};
}

CriterionOutcome run_glued(const ReproduceOptions& opt) {
  CriterionOutcome o = outcome(5, "glued", "glued rank-2 metrics on su2+su2 and su2+R");
  Checklist cl;
  json cases = json::array();
  for (const char* name : {"su2+su2", "su2+R"}) cases.push_back(glued_case(name, opt, cl));

  // Two-dimensional centre: flags inside it are flat for any left-invariant metric.
  auto S = space("su2+R2");
  Eigen::MatrixXd Z = centre_m(*S);
  Rng rng(derive_seed(opt.seed, 55));
  const int n = S->dim_m();
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + 0.2 * M * M.transpose() / n;
  VectorXd b = rng.normal_vector(n);
  b *= 0.4 / randers_b_norm(A, b);
  MinkowskiNorm R = MinkowskiNorm::randers(A, b);
  double worst_K = 0.0, worst_C = 0.0;
  for (int k = 0; k < 20; ++k) {
    VectorXd u = Z * rng.normal_vector(2), v = Z * rng.normal_vector(2);
    worst_K = std::max(worst_K, std::abs(flag_curvature(*S, R, Flag{u, v})));
    worst_C = std::max(worst_C, std::abs(flag_curvature_commuting(*S, R, u, v)));
  }
  cl.add("su2+R2: centre dimension 2", Z.cols() == 2, Z.cols());
  cl.add("su2+R2: centre flags flat (curvature formula)", worst_K <= 1e-12, worst_K);
  cl.add("su2+R2: centre flags flat (commuting formula)", worst_C <= 1e-12, worst_C);
  o.pass = cl.ok;
  std::ostringstream s;
  s << "epsilon " << cases[0]["epsilon"].get<double>() << " / " << cases[1]["epsilon"].get<double>()
    << ", both scans " << (cl.ok ? "verified" : "checked");
  o.summary = s.str();
  o.detail = {{"checks", cl.items}, {"cases", cases}, {"randers_centre", {{"flags", 20}, {"max_abs_K", worst_K},
                                                                         {"max_abs_commuting", worst_C}}}};
  return o;
}

CriterionOutcome run_criterion(const ReproduceOptions& opt) {
  CriterionOutcome o = outcome(6, "criterion", "root-pair exclusion table");
  Checklist cl;
  json rows = json::array();
  bool e7_failed = false;
  for (const char* name : {"A(3,2)", "C(5)", "D(5)", "E6", "E7"}) {
    CriterionRow row = criterion_row(name, 1);
    bool found = row.witness_found.value_or(false);
    rows.push_back(row_to_json(row));
    if (std::string(name) == "E7" && !found) {
      e7_failed = true;
      continue;
    }
    cl.add(std::string(name) + ": witness among the pairs", found, row.n_pairs);
  }
  for (const char* name : {"A(1,1)", "A(2,1)"}) {
    CriterionRow row = criterion_row(name, 1);
    rows.push_back(row_to_json(row));
    cl.add(std::string(name) + ": sphere has no pair", row.n_pairs == 0, row.n_pairs);
  }

  json products = json::array();
  auto product = [&](const std::string& spec, bool expect) {
    ProductVerdict v = product_case_check(parse_product_spec(spec));
    products.push_back({{"spec", spec}, {"excluded", v.excluded}, {"rule", v.rule}});
    cl.add(spec + (expect ? ": excluded" : ": not excluded"), v.excluded == expect);
  };
  static const char* labels[] = {"A(1,1)", "A(2,1)", "A(3,2)", "C(3)", "D(4)", "Q(5)", "E6"};
  static const double cs[] = {1.0, -1.0, 2.0, -3.0, 0.5, 1.5};
  Rng rng(derive_seed(opt.seed, 6));
  int k4_excluded = 0;
  for (int t = 0; t < 20; ++t) {
    ProductSpec spec;
    for (int f = 0; f < 4; ++f) {
      spec.factors.push_back(parse_factor_label(labels[static_cast<int>(rng.uniform() * 7)]));
      spec.c.push_back(cs[static_cast<int>(rng.uniform() * 6)]);
    }
    ProductVerdict v = product_case_check(spec);
    k4_excluded += v.excluded && v.witness_check && v.witness_check->ok;
  }
  cl.add("k=4: 20 random products excluded", k4_excluded == 20, k4_excluded);
  product("A(1,1)+A(1,1)+A(1,1)@1,1,2", true);
  product("A(1,1)+A(1,1)@1,3", true);
  product("A(1,1)+A(1,1)@1,1", false);

  o.pass = cl.ok && !e7_failed;
  o.known_deviation = cl.ok && e7_failed;
  if (e7_failed)
    cl.items.push_back({{"check", "E7: witness among the pairs"}, {"pass", false}, {"known_deviation", true},
                        {"value", "the reference pair (e5+e6, e5-e6) has the extra root sqrt2 e7 in "
                                  "beta + R alpha + R u0; no pair exists in E7"}});
  o.summary = o.pass ? "all verdicts match"
              : o.known_deviation ? "all verdicts match except E7 (no valid root pair exists)"
                                  : "verdict mismatch";
  o.detail = {{"checks", cl.items}, {"rows", rows}, {"products", products}};
  return o;
}

using Runner = std::function<CriterionOutcome(const ReproduceOptions&)>;

const std::vector<std::pair<std::string, Runner>>& runners() {
  static const std::vector<std::pair<std::string, Runner>> r = {
      {"algebra", run_algebra}, {"oracle", run_oracle},   {"navigation", run_navigation},
      {"fp-scan", run_fp_scan}, {"glued", run_glued},     {"criterion", run_criterion}};
  return r;
}

json outcomes_json(const std::vector<CriterionOutcome>& v) {
  json a = json::array();
  for (const auto& o : v)
    a.push_back({{"id", o.id}, {"tag", o.tag}, {"title", o.title}, {"pass", o.pass},
                 {"known_deviation", o.known_deviation}, {"summary", o.summary}, {"detail", o.detail}});
  return a;
}

CriterionOutcome guarded(const std::string& tag, const Runner& run, const ReproduceOptions& opt) {
  try {
    return run(opt);
  } catch (const Error& e) {
    CriterionOutcome o;
    for (const auto& [t, _] : runners()) {
      ++o.id;
      if (t == tag) break;
    }
    o.tag = tag;
    o.title = tag;
    o.summary = std::string("error (") + to_string(e.code()) + "): " + e.what();
    o.detail = {{"error", to_string(e.code())}, {"message", e.what()}};
    return o;
  }
}

}  // namespace

const std::vector<std::string>& reproduce_tags() {
  static const std::vector<std::string> t = {"algebra", "oracle", "navigation", "fp-scan",
                                             "glued",   "criterion", "determinism"};
  return t;
}

bool ReproduceReport::all_pass() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.pass; });
}

bool ReproduceReport::acceptable() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.pass || o.known_deviation; });
}

ReproduceReport reproduce(const ReproduceOptions& opt) {
  for (const auto& t : opt.tags)
    if (std::find(reproduce_tags().begin(), reproduce_tags().end(), t) == reproduce_tags().end())
      throw ParameterError("unknown reproduce tag '" + t + "'");
  auto selected = [&](const std::string& t) {
    return opt.tags.empty() || std::find(opt.tags.begin(), opt.tags.end(), t) != opt.tags.end();
  };
  ReproduceReport rep;
  rep.seed = opt.seed;
  std::vector<std::string> ran;
  for (const auto& [tag, run] : runners())
    if (selected(tag)) {
      rep.outcomes.push_back(guarded(tag, run, opt));
      ran.push_back(tag);
    }
  if (selected("determinism")) {
    std::vector<CriterionOutcome> first = rep.outcomes, second;
    if (ran.empty()) {
      for (const auto& [tag, run] : runners()) {
        first.push_back(guarded(tag, run, opt));
        ran.push_back(tag);
      }
    }
    for (const auto& [tag, run] : runners())
      if (std::find(ran.begin(), ran.end(), tag) != ran.end()) second.push_back(guarded(tag, run, opt));
    const std::string a = outcomes_json(first).dump(), b = outcomes_json(second).dump();
    CriterionOutcome o = outcome(7, "determinism", "identical reports for a fixed seed");
    o.pass = a == b;
    o.summary = std::to_string(ran.size()) + " criteria rerun, " + std::to_string(a.size()) + " bytes, " +
                (o.pass ? "identical" : "different");
    json tags = ran;
    o.detail = {{"rerun", tags}, {"bytes", a.size()}, {"identical", o.pass}};
    rep.outcomes.push_back(o);
  }
  return rep;
}

nlohmann::json to_json(const ReproduceReport& r) {
  return {{"schema", kReportSchema},
          {"report", "reproduce"},
          {"seed", r.seed},
          {"all_pass", r.all_pass()},
          {"acceptable", r.acceptable()},
          {"criteria", outcomes_json(r.outcomes)}};
}

std::string to_text(const ReproduceReport& r) {
  std::ostringstream os;
  for (const auto& o : r.outcomes) {
    os << "criterion " << o.id << " [" << o.tag << "] "
       << (o.pass ? "PASS" : o.known_deviation ? "FAIL (known deviation)" : "FAIL") << ": " << o.title << " -- "
       << o.summary << "\n";
  }
  return os.str();
}

}  // namespace flagcurv
