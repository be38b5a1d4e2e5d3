#include "flagcurv/constructions.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

#include "flagcurv/random.hpp"

namespace flagcurv {

namespace {

// ad(x) on the m frame (the full algebra when h = 0 is not assumed).
Eigen::MatrixXd ad_m(const CosetDecomposition& S, const Eigen::VectorXd& x) {
  const int n = S.dim_m();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    if (x[j] != 0.0)
      for (int k = 0; k < n; ++k)
        for (int c = 0; c < n; ++c) M(c, k) += x[j] * S.cm(j, k, c);
  return M;
}

bool orthonormal_pair(Eigen::VectorXd& a, Eigen::VectorXd& b) {
  double na = a.norm();
  if (na < 1e-12) return false;
  a /= na;
  b -= b.dot(a) * a;
  double nb = b.norm();
  if (nb < 1e-8) return false;
  b /= nb;
  return true;
}

bool is_identity_base(const MinkowskiNorm& F) {
  if (F.kind() != MinkowskiNorm::Kind::navigated) return false;
  const MinkowskiNorm& B = F.base();
  if (B.kind() != MinkowskiNorm::Kind::inner_product) return false;
  const Eigen::MatrixXd& A = B.matrix();
  return (A - Eigen::MatrixXd::Identity(A.rows(), A.cols())).cwiseAbs().maxCoeff() <= 1e-14;
}

}  // namespace

std::string to_string(CertificateTag t) {
  switch (t) {
    case CertificateTag::commuting: return "commuting";
    case CertificateTag::non_commuting: return "non_commuting";
    case CertificateTag::numeric: return "numeric";
  }
  return "numeric";
}

NavigationConditions verify_navigation_conditions(const CosetDecomposition& space, const Eigen::VectorXd& v) {
  if (v.size() != space.dim_m()) throw ParameterError("navigation vector must have length dim m");
  if (!(v.norm() > 0.0)) throw ParameterError("navigation vector must be nonzero");
  if (space.cartan.rank() == 0) throw PreconditionError("space has no root data");
  const LieAlgebra& L = *space.algebra;
  NavigationConditions r;
  Eigen::VectorXd x = space.from_m(v);
  double scale = L.norm(x);
  for (int k = 0; k < space.dim_h(); ++k) {
    double b = L.norm(L.bracket(x, space.h_basis.col(k))) / scale;
    if (b > r.max_h_bracket) {
      r.max_h_bracket = b;
      Eigen::Index big;
      space.h_basis.col(k).cwiseAbs().maxCoeff(&big);
      r.h_witness = "h[" + std::to_string(k) + "] ~ " + L.labels()[big];
    }
  }
  r.condition1 = r.max_h_bracket <= 1e-10;
  std::string detail;
  if (!r.condition1) detail += "[v,h] != 0 at " + r.h_witness + "; ";
  bool in_tm = true;
  if (space.t_cap_m.cols() == 0) {
    in_tm = false;
  } else {
    Eigen::VectorXd res = x - space.t_cap_m * (space.t_cap_m.transpose() * (L.metric() * x));
    in_tm = L.norm(res) <= 1e-10 * scale;
  }
  if (!in_tm) detail += "v is not in t∩m; ";
  r.min_root_pairing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < space.cartan.planes.size(); ++i) {
    PlaneLocation loc = space.plane_location[i];
    if (loc == PlaneLocation::in_h) continue;
    double pr = std::abs(L.inner(x, space.cartan.planes[i].alpha_g)) / scale;
    if (loc == PlaneLocation::mixed || pr < 1e-8) r.failing_roots.push_back(static_cast<int>(i));
    r.min_root_pairing = std::min(r.min_root_pairing, pr);
  }
  if (!std::isfinite(r.min_root_pairing)) r.min_root_pairing = 0.0;
  if (!r.failing_roots.empty()) detail += std::to_string(r.failing_roots.size()) + " root plane(s) in m with <v,alpha> = 0 or mixed; ";
  r.condition2 = in_tm && r.failing_roots.empty();
  r.detail = detail.empty() ? "ok" : detail.substr(0, detail.size() - 2);
  return r;
}

MinkowskiNorm build_fp_metric(const CosetDecomposition& space, const Eigen::VectorXd& v, double speed) {
  if (!(speed >= 0.0 && speed < 1.0)) throw ParameterError("speed must lie in [0, 1)");
  NavigationConditions rep = verify_navigation_conditions(space, v);
  if (!rep.ok()) throw PreconditionError("navigation conditions fail: " + rep.detail);
  Eigen::VectorXd w = speed * v / v.norm();
  const int n = space.dim_m();
  Eigen::VectorXd vhat = v / v.norm();
  Eigen::MatrixXd M = ad_m(space, vhat);  // column a: [v, m_a]_m
  double skew = (M + M.transpose()).cwiseAbs().maxCoeff();
  double along = (M.transpose() * vhat).cwiseAbs().maxCoeff();
  if (skew > 1e-10 || along > 1e-10)
    throw PreconditionError("v is not a Killing field of the normal metric (symmetric part " + std::to_string(skew) +
                            ", <[v,u],v> " + std::to_string(along) + ")");
  return navigate(MinkowskiNorm::euclidean(n), w);
}

PoleCertificate fp_pole_certificate(const CosetDecomposition& space, const MinkowskiNorm& F_nav,
                                    const Eigen::VectorXd& p1, const Eigen::VectorXd& p2, int n_poles) {
  const LieAlgebra& L = *space.algebra;
  Eigen::VectorXd a = p1, b = p2;
  if (!orthonormal_pair(a, b)) throw DomainError("certificate plane is degenerate");
  PoleCertificate c;
  auto sweep = [&](const std::string& why) {
    c.tag = CertificateTag::numeric;
    c.detail = why;
    c.curvature = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2 * n_poles; ++k) {
      double phi = M_PI * k / n_poles;
      Eigen::VectorXd y = std::cos(phi) * a + std::sin(phi) * b, w = -std::sin(phi) * a + std::cos(phi) * b;
      double K = flag_curvature(space, F_nav, Flag{y, w});
      if (K > c.curvature) {
        c.curvature = K;
        c.pole = y;
        c.wing = w;
      }
    }
    c.ok = c.curvature > kPositivityThreshold;
    return c;
  };
  if (!is_identity_base(F_nav)) return sweep("metric is not a navigation of the normal metric");
  const MinkowskiNorm& F = F_nav.base();
  const Eigen::VectorXd& v = F_nav.wind();
  Eigen::VectorXd xa = space.from_m(a), xb = space.from_m(b);
  bool commutative = L.norm(L.bracket(xa, xb)) <= 1e-10;
  auto back_solve = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return y - navigation_solve(F, v, y) * v;
  };
  if (commutative) {
    double pv = std::hypot(a.dot(v), b.dot(v));
    if (pv > 1e-10 * std::max(1.0, v.norm())) {
      PoleCertificate bad = sweep("commutative plane is not orthogonal to v");
      bad.detail = "commutative plane is not orthogonal to v (v should pair with every root of m)";
      return bad;
    }
    Eigen::VectorXd v1p = back_solve(a);
    c.pole = a;
    c.wing = b;
    c.tag = CertificateTag::commuting;
    c.curvature = sectional_oracle_normal(space, v1p, b);
    c.ok = c.curvature > kPositivityThreshold;
    c.detail = "commutative plane; back-solved pole";
    if (!c.ok) c.detail += " has zero oracle curvature";
    return c;
  }
  // Non-commutative plane: v2 in P orthogonal to v, v1 orthogonal to v2 in P.
  Eigen::VectorXd v2, v1;
  double pa = a.dot(v), pb = b.dot(v);
  if (std::hypot(pa, pb) <= 1e-14) {
    v1 = a;
    v2 = b;
  } else {
    v2 = pb * a - pa * b;
    v2.normalize();
    v1 = a - a.dot(v2) * v2;
    v1.normalize();
  }
  Eigen::VectorXd v1p = back_solve(v1), v1pp = back_solve(Eigen::VectorXd(-v1));
  double K1 = sectional_oracle_normal(space, v1p, v2), K2 = sectional_oracle_normal(space, v1pp, v2);
  c.tag = CertificateTag::non_commuting;
  c.wing = v2;
  if (K1 >= K2) {
    c.pole = v1;
    c.curvature = K1;
  } else {
    c.pole = -v1;
    c.curvature = K2;
  }
  c.ok = c.curvature > kPositivityThreshold;
  if (!c.ok) return sweep("both back-solved poles commute with v2");
  c.detail = "non-commutative plane; pole " + std::string(K1 >= K2 ? "+v1" : "-v1");
  return c;
}

NavigationCheck navigation_identity_check(const CosetDecomposition& space, const MinkowskiNorm& F_nav, int n_pairs,
                                          std::uint64_t seed, double tol) {
  if (F_nav.kind() != MinkowskiNorm::Kind::navigated) throw ParameterError("metric is not navigated");
  const MinkowskiNorm& F = F_nav.base();
  const Eigen::VectorXd& v = F_nav.wind();
  Rng rng(seed);
  NavigationCheck r;
  const int n = space.dim_m();
  while (r.n_pairs < n_pairs) {
    Eigen::VectorXd y = rng.normal_vector(n), w = rng.normal_vector(n);
    Eigen::MatrixXd g = hessian(F, y);
    w -= (w.dot(g * y) / y.dot(g * y)) * y;
    if (w.norm() < 1e-6) continue;
    ++r.n_pairs;
    double K = flag_curvature(space, F, Flag{y, w});
    Eigen::VectorXd yt = y + evaluate(F, y) * v;
    double Kt = flag_curvature(space, F_nav, Flag{yt, w});
    double d = std::abs(K - Kt);
    double rel = d / std::max(std::abs(K), std::abs(Kt));
    r.max_abs_diff = std::max(r.max_abs_diff, d);
    if (std::isfinite(rel)) r.max_rel_diff = std::max(r.max_rel_diff, rel);
    if (d > tol) ++r.failures;
  }
  return r;
}

namespace {

struct GluedFrame {
  std::shared_ptr<const CosetDecomposition> space;
  Eigen::MatrixXd t1, t2;
  Eigen::VectorXd v1, v2;
};

GluedFrame glued_frame(std::shared_ptr<const LieAlgebra> L, std::uint64_t seed) {
  if (!L) throw ParameterError("algebra is empty");
  auto space = std::make_shared<CosetDecomposition>(build_coset(L, {}, {}, seed));
  const int n = space->dim_m();
  if (space->rank_g() != 2) throw ParameterError("glued construction requires rank 2 (got rank " +
                                                 std::to_string(space->rank_g()) + ")");
  if (n <= 2) throw ParameterError("glued construction requires a non-abelian algebra");
  GluedFrame f;
  f.space = space;
  f.t1.resize(n, 2);
  for (int k = 0; k < 2; ++k) f.t1.col(k) = space->to_m(space->cartan.t_basis.col(k));
  Rng rng(seed);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 100) throw NumericalError("no generic vector found in the Cartan subalgebra");
    Eigen::VectorXd c = rng.unit_vector(2);
    Eigen::VectorXd x = f.t1 * c;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ad_m(*space, x));
    const auto& sv = svd.singularValues();
    int nullity = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] <= 1e-8 * std::max(1.0, sv[0])) ++nullity;
    // Genericity with margin: every root pairs with x by at least 0.1.
    double smallest = sv.size() > 2 ? sv[n - 3] : 1.0;
    if (nullity == 2 && smallest > 0.1) {
      f.v1 = x / x.norm();
      break;
    }
  }
  for (int attempt = 0;; ++attempt) {
    if (attempt > 100) throw NumericalError("no second Cartan subalgebra found");
    Eigen::VectorXd X = rng.unit_vector(n);
    Eigen::MatrixXd Ad = ad_m(*space, X).exp();
    Eigen::MatrixXd t2 = Ad * f.t1;
    // Distance between the planes: component of t2 outside t1.
    double dist = (t2 - f.t1 * (f.t1.transpose() * t2)).norm();
    if (dist > 0.5) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(t2);
      f.t2 = qr.householderQ() * Eigen::MatrixXd::Identity(n, 2);
      f.v2 = Ad * f.v1;
      f.v2.normalize();
      break;
    }
  }
  return f;
}

GluedMetric assemble(const GluedFrame& f, double epsilon, const GluedOptions& opt) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be non-negative");
  if (epsilon >= 1.0) throw DomainError("epsilon must be < 1 for the navigations to exist");
  const int n = f.space->dim_m();
  GluedMetric g;
  g.space = f.space;
  g.t1 = f.t1;
  g.t2 = f.t2;
  g.v1 = f.v1;
  g.v2 = f.v2;
  g.axis = f.v1;
  g.epsilon = epsilon;
  MinkowskiNorm E = MinkowskiNorm::euclidean(n);
  g.first = navigate(E, epsilon * f.v1);
  g.second = navigate(E, epsilon * f.v2);
  BumpFunction bump;
  bump.axis = g.axis;
  bump.theta1 = opt.theta1;
  bump.theta2 = opt.theta2;
  bump.order = opt.order;
  g.norm = glue(g.first, g.second, bump);
  return g;
}

}  // namespace

GluedMetric build_rank2_glued(std::shared_ptr<const LieAlgebra> L, double epsilon, const GluedOptions& opt) {
  GluedMetric g = assemble(glued_frame(L, opt.seed), epsilon, opt);
  g.report = validate_norm(g.norm, opt.validate_samples, opt.seed);
  if (!g.report.ok())
    throw EpsilonTooLarge("glued norm is not strongly convex at epsilon = " + std::to_string(epsilon) +
                              " (min eigenvalue " + std::to_string(g.report.min_eigenvalue) + ")",
                          g.report.min_eigenvalue);
  return g;
}

EpsilonSearch find_glue_epsilon(std::shared_ptr<const LieAlgebra> L, const GluedOptions& opt, double hi,
                                int iterations, double safety, int samples) {
  if (!(hi > 0.0 && hi < 1.0)) throw ParameterError("epsilon search bound must lie in (0, 1)");
  if (!(safety > 0.0 && safety <= 1.0)) throw ParameterError("safety factor must lie in (0, 1]");
  GluedFrame f = glued_frame(L, opt.seed);
  auto valid = [&](double eps) { return validate_norm(assemble(f, eps, opt).norm, samples, opt.seed).ok(); };
  EpsilonSearch s;
  double lo = 0.0;
  if (valid(hi)) {
    lo = hi;
  } else {
    for (; s.iterations < iterations; ++s.iterations) {
      double mid = 0.5 * (lo + hi);
      if (valid(mid)) lo = mid;
      else hi = mid;
    }
  }
  s.boundary = lo;
  s.epsilon = lo * safety;
  return s;
}

std::vector<std::pair<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>>> structured_planes(
    const CosetDecomposition& space) {
  std::vector<std::pair<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>>> out;
  const LieAlgebra& L = *space.algebra;
  const int n = space.dim_m();
  const int tm = static_cast<int>(space.t_cap_m.cols());
  std::vector<Eigen::VectorXd> t(tm);
  for (int i = 0; i < tm; ++i) t[i] = space.to_m(space.t_cap_m.col(i));
  for (int i = 0; i < tm; ++i)
    for (int j = i + 1; j < tm; ++j) out.push_back({"tm_pair:" + std::to_string(i) + "-" + std::to_string(j), {t[i], t[j]}});
  for (std::size_t k = 0; k < space.cartan.planes.size(); ++k) {
    if (space.plane_location[k] != PlaneLocation::in_m) continue;
    Eigen::VectorXd p = space.to_m(space.cartan.planes[k].p), q = space.to_m(space.cartan.planes[k].q);
    out.push_back({"root_plane:" + std::to_string(k), {p, q}});
    for (int i = 0; i < tm; ++i) {
      out.push_back({"tm_root:" + std::to_string(i) + ":" + std::to_string(k) + "p", {t[i], p}});
      out.push_back({"tm_root:" + std::to_string(i) + ":" + std::to_string(k) + "q", {t[i], q}});
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Eigen::VectorXd ea = Eigen::VectorXd::Unit(n, a), eb = Eigen::VectorXd::Unit(n, b);
      if (L.norm(L.bracket(space.from_m(ea), space.from_m(eb))) <= 1e-12)
        out.push_back({"commuting:" + std::to_string(a) + "-" + std::to_string(b), {ea, eb}});
    }
  return out;
}

namespace {

struct PlaneJob {
  std::string kind;
  Eigen::VectorXd a, b;
};

void scan_plane(const CosetDecomposition& space, const MinkowskiNorm& F, const PlaneJob& job, int n_poles,
                const ScanOptions& opt, bool certify, PlaneRecord& rec, double& max_cond) {
  rec.kind = job.kind;
  rec.a = job.a;
  rec.b = job.b;
  const bool full = !F.reversible();
  rec.sweep_step = (full ? 2.0 : 1.0) * M_PI / n_poles;
  rec.sweep.assign(n_poles, std::numeric_limits<double>::quiet_NaN());
  auto consider = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& w, double angle) -> double {
    ++rec.n_flags;
    try {
      CurvatureResult r = flag_curvature_detailed(space, F, Flag{y, w}, opt.curvature);
      max_cond = std::max(max_cond, r.condition_number);
      rec.min_curvature = std::min(rec.min_curvature, r.K);
      if (r.K > rec.best_curvature) {
        rec.best_curvature = r.K;
        rec.best_pole = y;
        rec.best_angle = angle;
      }
      return r.K;
    } catch (const Error&) {
      ++rec.errors;
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  for (int k = 0; k < n_poles; ++k) {
    double phi = k * rec.sweep_step;
    Eigen::VectorXd y = std::cos(phi) * job.a + std::sin(phi) * job.b;
    Eigen::VectorXd w = -std::sin(phi) * job.a + std::cos(phi) * job.b;
    rec.sweep[k] = consider(y, w, phi);
  }
  for (const auto& x : opt.axes) {
    Eigen::VectorXd p = job.a * job.a.dot(x) + job.b * job.b.dot(x);
    if (p.norm() <= 1e-8 * x.norm()) continue;
    p.normalize();
    double phi = std::atan2(p.dot(job.b), p.dot(job.a));
    Eigen::VectorXd w = -std::sin(phi) * job.a + std::cos(phi) * job.b;
    consider(p, w, phi);
  }
  if (certify) {
    try {
      PoleCertificate c = fp_pole_certificate(space, F, job.a, job.b, n_poles);
      if (c.tag != CertificateTag::numeric) {
        double phi = std::atan2(c.pole.dot(job.b), c.pole.dot(job.a));
        double K = consider(c.pole, c.wing, phi);
        bool consistent = std::isfinite(K) && (K > 0) == (c.curvature > 0) &&
                          curvature_close(K, c.curvature, 1e-6, 1e-6);
        if (c.ok && consistent) rec.tag = c.tag;
        else rec.certificate_failed = true;
      } else if (!c.ok) {
        rec.certificate_failed = true;
      }
    } catch (const Error&) {
      rec.certificate_failed = true;
    }
  }
}

}  // namespace

FPReport fp_scan(const CosetDecomposition& space, const MinkowskiNorm& F, int n_planes, int n_poles,
                 std::uint64_t seed, const ScanOptions& opt) {
  if (n_planes < 0 || n_poles < 1) throw ParameterError("fp_scan requires n_planes >= 0 and n_poles >= 1");
  if (F.dim() != space.dim_m()) throw ParameterError("norm dimension does not match dim m");
  if (opt.extra_planes.size() % 2) throw ParameterError("extra planes must be given as pairs");
  const int n = space.dim_m();
  if (n < 2) throw ParameterError("fp_scan requires dim m >= 2");
  std::vector<PlaneJob> jobs;
  for (int i = 0; i < n_planes; ++i) {
    Rng rng(splitmix64(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(i + 1)));
    Eigen::VectorXd a, b;
    do {
      a = rng.normal_vector(n);
      b = rng.normal_vector(n);
    } while (!orthonormal_pair(a, b));
    jobs.push_back({"random", a, b});
  }
  if (opt.structured)
    for (auto& [label, ab] : structured_planes(space)) {
      Eigen::VectorXd a = ab.first, b = ab.second;
      if (orthonormal_pair(a, b)) jobs.push_back({label, a, b});
    }
  for (std::size_t i = 0; i + 1 < opt.extra_planes.size(); i += 2) {
    Eigen::VectorXd a = opt.extra_planes[i], b = opt.extra_planes[i + 1];
    if (a.size() != n || b.size() != n) throw ParameterError("extra plane has wrong dimension");
    if (!orthonormal_pair(a, b)) throw DomainError("extra plane is degenerate");
    jobs.push_back({"extra:" + std::to_string(i / 2), a, b});
  }
  const bool certify = opt.certificates && is_identity_base(F);
  FPReport rep;
  rep.metric = to_json(F);
  rep.n_planes = static_cast<int>(jobs.size());
  rep.n_poles = n_poles;
  rep.seed = seed;
  rep.positivity = opt.positivity;
  rep.space_id = space.name;
  rep.planes.resize(jobs.size());
  std::vector<double> conds(jobs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      rep.planes[i].id = static_cast<int>(i);
      scan_plane(space, F, jobs[i], n_poles, opt, certify, rep.planes[i], conds[i]);
    }
  };
  const int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  rep.fp_verified = !rep.planes.empty();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const PlaneRecord& r = rep.planes[i];
    rep.min_curvature_observed = std::min(rep.min_curvature_observed, r.min_curvature);
    rep.max_condition_number = std::max(rep.max_condition_number, conds[i]);
    rep.n_flags += r.n_flags;
    rep.evaluation_errors += r.errors;
    if (r.certificate_failed) ++rep.certificate_failures;
    if (!(r.best_curvature > opt.positivity)) rep.fp_verified = false;
  }
  if (rep.max_condition_number > 1e10)
    rep.warnings.push_back("g_u condition number " + std::to_string(rep.max_condition_number) + " exceeds 1e10");
  if (rep.evaluation_errors) rep.warnings.push_back(std::to_string(rep.evaluation_errors) + " flag evaluations failed");
  if (rep.certificate_failures) rep.warnings.push_back(std::to_string(rep.certificate_failures) + " certificate failures");
  return rep;
}

namespace {

nlohmann::json vjson(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const FPReport& r) {
  nlohmann::json j;
  j["space"] = r.space_id;
  j["metric"] = r.metric;
  j["n_planes"] = r.n_planes;
  j["n_poles"] = r.n_poles;
  j["seed"] = r.seed;
  j["n_flags"] = r.n_flags;
  j["min_curvature_observed"] = num(r.min_curvature_observed);
  j["max_condition_number"] = num(r.max_condition_number);
  j["positivity_threshold"] = r.positivity;
  j["certificate_failures"] = r.certificate_failures;
  j["evaluation_errors"] = r.evaluation_errors;
  j["fp_verified"] = r.fp_verified;
  j["warnings"] = r.warnings;
  nlohmann::json planes = nlohmann::json::array();
  for (const auto& p : r.planes) {
    planes.push_back({{"id", p.id},
                      {"kind", p.kind},
                      {"basis", {vjson(p.a), vjson(p.b)}},
                      {"best_pole", p.best_pole.size() ? vjson(p.best_pole) : nlohmann::json(nullptr)},
                      {"best_curvature", num(p.best_curvature)},
                      {"min_curvature", num(p.min_curvature)},
                      {"certificate", to_string(p.tag)},
                      {"n_flags", p.n_flags}});
  }
  j["planes"] = planes;
  return j;
}

void write_csv(const FPReport& r, std::ostream& out) {
  out << "plane_id,kind,pole_angle,curvature\n";
  auto old = out.precision(17);
  for (const auto& p : r.planes)
    for (std::size_t k = 0; k < p.sweep.size(); ++k) out << p.id << ',' << p.kind << ',' << k * p.sweep_step << ',' << p.sweep[k] << '\n';
  out.precision(old);
}

nlohmann::json to_json(const NavigationConditions& r) {
  return {{"condition1", r.condition1},   {"condition2", r.condition2},       {"max_h_bracket", r.max_h_bracket},
          {"h_witness", r.h_witness},     {"failing_roots", r.failing_roots}, {"min_root_pairing", r.min_root_pairing},
          {"detail", r.detail},           {"ok", r.ok()}};
}

}  // namespace flagcurv
