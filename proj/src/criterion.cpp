#include "flagcurv/criterion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#include "flagcurv/error.hpp"

namespace flagcurv {

namespace {

std::optional<Rational> to_rational(double x) {
  for (long long d = 1; d <= 12; ++d) {
    double r = x * static_cast<double>(d);
    double n = std::round(r);
    if (std::abs(r - n) < 1e-12) return Rational(static_cast<long long>(n), d);
  }
  return std::nullopt;
}

std::optional<RationalVector> to_rational(const Eigen::VectorXd& v) {
  RationalVector out;
  out.reserve(v.size());
  for (int i = 0; i < v.size(); ++i) {
    auto r = to_rational(v[i]);
    if (!r) return std::nullopt;
    out.push_back(*r);
  }
  return out;
}

RationalVector sub(const RationalVector& a, const RationalVector& b) {
  RationalVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// Row echelon span over the rationals.
class ExactSpan {
 public:
  explicit ExactSpan(const std::vector<RationalVector>& vectors) {
    for (const auto& v : vectors) insert(v);
  }
  bool contains(const RationalVector& x) const { return reduce(x).second; }
  int dim() const { return static_cast<int>(rows_.size()); }

 private:
  std::pair<RationalVector, bool> reduce(RationalVector x) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rational f = x[pivots_[r]];
      if (f == Rational(0)) continue;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= f * rows_[r][i];
    }
    bool zero = std::all_of(x.begin(), x.end(), [](const Rational& v) { return v == Rational(0); });
    return {x, zero};
  }
  void insert(const RationalVector& v) {
    auto [x, zero] = reduce(v);
    if (zero) return;
    int piv = 0;
    while (x[piv] == Rational(0)) ++piv;
    const Rational lead = x[piv];
    for (auto& e : x) e /= lead;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rational f = rows_[r][piv];
      if (f == Rational(0)) continue;
      for (std::size_t i = 0; i < x.size(); ++i) rows_[r][i] -= f * x[i];
    }
    rows_.push_back(x);
    pivots_.push_back(piv);
  }
  std::vector<RationalVector> rows_;
  std::vector<int> pivots_;
};

// Orthonormal span; membership by distance to the subspace.
class FloatSpan {
 public:
  explicit FloatSpan(const std::vector<Eigen::VectorXd>& vectors) {
    for (const auto& v : vectors) {
      Eigen::VectorXd r = residual(v);
      r = residual(r);
      double n = r.norm();
      if (n > 1e-10 * std::max(1.0, v.norm())) basis_.push_back(r / n);
    }
  }
  double distance(const Eigen::VectorXd& x) const { return residual(residual(x)).norm(); }
  bool contains(const Eigen::VectorXd& x, double tol) const { return distance(x) <= tol; }
  int dim() const { return static_cast<int>(basis_.size()); }

 private:
  Eigen::VectorXd residual(Eigen::VectorXd x) const {
    for (const auto& b : basis_) x -= b.dot(x) * b;
    return x;
  }
  std::vector<Eigen::VectorXd> basis_;
};

// Membership oracle for the spans used by the conditions.
class SpanTest {
 public:
  SpanTest(const CriterionInstance& inst, const std::vector<int>& roots, bool with_u0) : inst_(inst) {
    if (inst.exact) {
      std::vector<RationalVector> v;
      for (int r : roots) v.push_back(inst.exact_roots[r]);
      if (with_u0) v.push_back(inst.exact_u0);
      exact_.emplace(v);
    } else {
      std::vector<Eigen::VectorXd> v;
      for (int r : roots) v.push_back(inst.root_system.roots[r]);
      if (with_u0) v.push_back(inst.u0);
      float_.emplace(v);
    }
  }
  // gamma in the span
  bool contains(int gamma) const {
    if (exact_) return exact_->contains(inst_.exact_roots[gamma]);
    return float_->contains(inst_.root_system.roots[gamma], kRootPlaneTolerance);
  }
  // gamma - beta in the span
  bool contains_difference(int gamma, int beta) const {
    if (exact_) return exact_->contains(sub(inst_.exact_roots[gamma], inst_.exact_roots[beta]));
    return float_->contains(inst_.root_system.roots[gamma] - inst_.root_system.roots[beta], kRootPlaneTolerance);
  }

 private:
  const CriterionInstance& inst_;
  std::optional<ExactSpan> exact_;
  std::optional<FloatSpan> float_;
};

bool is_negative(const CriterionInstance& inst, int a, int b) {
  if (inst.exact) {
    const auto& x = inst.exact_roots[a];
    const auto& y = inst.exact_roots[b];
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != -y[i]) return false;
    return true;
  }
  return (inst.root_system.roots[a] + inst.root_system.roots[b]).norm() <= kRootPlaneTolerance;
}

std::vector<int> all_root_indices(const CriterionInstance& inst) {
  std::vector<int> idx(inst.root_system.roots.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return idx;
}

std::vector<int> condition2_extra(const CriterionInstance& inst, int alpha) {
  SpanTest plane(inst, {alpha}, true);
  std::vector<int> extra;
  const int n = static_cast<int>(inst.root_system.roots.size());
  for (int g = 0; g < n; ++g)
    if (g != alpha && !is_negative(inst, g, alpha) && plane.contains(g)) extra.push_back(g);
  return extra;
}

std::vector<int> condition3_extra(const CriterionInstance& inst, const SpanTest& plane, int beta) {
  std::vector<int> extra;
  const int n = static_cast<int>(inst.root_system.roots.size());
  for (int g = 0; g < n; ++g)
    if (g != beta && plane.contains_difference(g, beta)) extra.push_back(g);
  return extra;
}

std::vector<int> condition3_basis(const CriterionInstance& inst, int alpha, Condition3Reading reading) {
  if (reading == Condition3Reading::literal) return all_root_indices(inst);
  return {alpha};
}

bool is_canonical(const Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] > 1e-12) return true;
    if (v[i] < -1e-12) return false;
  }
  return false;
}

std::vector<int> canonical_roots(const CriterionInstance& inst) {
  std::vector<int> reps;
  for (std::size_t i = 0; i < inst.root_system.roots.size(); ++i)
    if (is_canonical(inst.root_system.roots[i])) reps.push_back(static_cast<int>(i));
  return reps;
}

Eigen::VectorXd unit(int n, int i) { return Eigen::VectorXd::Unit(n, i); }

int parse_int(const std::string& s, const std::string& label) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("bad integer '" + s + "' in '" + label + "'");
  }
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

const char* kCatalogNames = "A(p,q), C(n), D(n), Q(n), E6, E7, F1+F2+...@c1,c2,...";

struct FactorCase {
  CriterionInstance inst;
  Eigen::VectorXd u0_direction;
};

FactorCase factor_case(const FactorLabel& f) {
  FactorCase out;
  CriterionInstance& inst = out.inst;
  inst.name = f.label();
  inst.family = f.type;
  inst.p = f.p;
  inst.q = f.q;
  Eigen::VectorXd dir;
  if (f.type == "A") {
    const int p = f.p, q = f.q, n = p + q;
    inst.root_system = abstract_root_system(RootFamily::A, n - 1);
    dir = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < p; ++i) dir[i] = q;
    for (int i = p; i < n; ++i) dir[i] = -p;
    int hi = std::max(p, q), lo = std::min(p, q);
    inst.listed = (hi > lo && lo == 2) || (p == q && p > 3);
    if (lo == 1) inst.note = "sphere S^" + std::to_string(2 * n - 1);
  } else if (f.type == "C") {
    inst.root_system = abstract_root_system(RootFamily::C, f.p);
    dir = Eigen::VectorXd::Ones(f.p);
    inst.listed = f.p > 4;
  } else if (f.type == "D") {
    inst.root_system = abstract_root_system(RootFamily::D, f.p);
    dir = Eigen::VectorXd::Ones(f.p);
    inst.listed = f.p == 5 || f.p > 6;
  } else if (f.type == "Q") {
    const int n = f.p;
    inst.root_system = n % 2 == 0 ? abstract_root_system(RootFamily::D, n / 2)
                                  : abstract_root_system(RootFamily::B, (n - 1) / 2);
    dir = unit(inst.root_system.rank, 0);
  } else if (f.type == "E6") {
    inst.root_system = abstract_root_system(RootFamily::E6, 6);
    dir = unit(6, 5);
    inst.listed = true;
  } else if (f.type == "E7") {
    inst.root_system = abstract_root_system(RootFamily::E7, 7);
    dir = Eigen::VectorXd::Zero(7);
    dir[5] = std::sqrt(2.0);
    dir[6] = 1.0;
    inst.listed = true;
  } else {
    throw ParameterError("unknown factor type '" + f.type + "'");
  }
  if (!inst.listed && inst.note.empty()) inst.note = "outside the excluded list";
  Eigen::VectorXd u = dir.normalized();
  for (std::size_t i = 0; i < inst.root_system.roots.size(); ++i)
    if (std::abs(inst.root_system.roots[i].dot(u)) <= kRootPlaneTolerance) inst.h_roots.push_back(static_cast<int>(i));
  out.u0_direction = dir;
  finalize_instance(inst, dir);
  return out;
}

struct ProductParts {
  CriterionInstance inst;
  std::vector<Eigen::VectorXd> v;   // v_i in block coordinates, length sqrt(2)
  std::vector<int> root_factor;     // factor of each root
  std::vector<int> offset;
};

ProductParts product_parts(const ProductSpec& spec) {
  const int k = static_cast<int>(spec.factors.size());
  if (k < 1) throw ParameterError("product spec without factors");
  if (static_cast<int>(spec.c.size()) != k) throw ParameterError("product spec needs one c value per factor");
  for (double c : spec.c)
    if (!(std::abs(c) > 0.0) || !std::isfinite(c)) throw ParameterError("product spec c values must be nonzero");
  std::vector<FactorCase> cases;
  std::vector<RootSystem> systems;
  for (const auto& f : spec.factors) {
    cases.push_back(factor_case(f));
    systems.push_back(cases.back().inst.root_system);
  }
  ProductParts out;
  CriterionInstance& inst = out.inst;
  inst.root_system = product_root_system(systems);
  inst.family = "product";
  std::ostringstream name;
  const int dim = inst.root_system.rank;
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(dim);
  int off = 0, base = 0;
  for (int i = 0; i < k; ++i) {
    const auto& fi = cases[i].inst;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v.segment(off, fi.root_system.rank) = std::sqrt(2.0) * fi.u0;
    out.v.push_back(v);
    out.offset.push_back(off);
    dir += spec.c[i] * v;
    for (int h : fi.h_roots) inst.h_roots.push_back(base + h);
    for (std::size_t r = 0; r < fi.root_system.roots.size(); ++r) out.root_factor.push_back(i);
    off += fi.root_system.rank;
    base += static_cast<int>(fi.root_system.roots.size());
    name << (i ? "+" : "") << fi.name;
  }
  name << "@";
  for (int i = 0; i < k; ++i) {
    std::ostringstream c;
    c << std::setprecision(12) << spec.c[i];
    name << (i ? "," : "") << c.str();
  }
  inst.name = name.str();
  finalize_instance(inst, dir);
  return out;
}

// Canonical roots of factor i outside h_i, optionally excluding R v_i.
std::vector<int> p_roots(const ProductParts& parts, int factor, bool drop_centre_line) {
  std::vector<int> out;
  const auto& roots = parts.inst.root_system.roots;
  const Eigen::VectorXd& v = parts.v[factor];
  for (std::size_t r = 0; r < roots.size(); ++r) {
    if (parts.root_factor[r] != factor || !is_canonical(roots[r])) continue;
    if (parts.inst.is_h_root(static_cast<int>(r))) continue;
    if (drop_centre_line) {
      FloatSpan line({v});
      if (line.contains(roots[r], kRootPlaneTolerance)) continue;
    }
    out.push_back(static_cast<int>(r));
  }
  return out;
}

int root_of(const ProductParts& parts, const Eigen::VectorXd& x) {
  int idx = parts.inst.root_system.find(x, kRootPlaneTolerance);
  if (idx < 0) throw StructureError("rank-one centre generator is not a root");
  return idx;
}

bool same_abs(double a, double b) {
  return std::abs(std::abs(a) - std::abs(b)) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

// First passing pair among alpha in A, beta in B.
bool search_witness(const CriterionInstance& inst, const std::vector<int>& A, const std::vector<int>& B,
                    ProductVerdict& verdict) {
  for (int a : A)
    for (int b : B) {
      RootPairCheck chk = check_root_pair(inst, a, b);
      if (chk.ok) {
        verdict.excluded = true;
        verdict.witness = RootPair{a, b};
        verdict.witness_check = chk;
        return true;
      }
    }
  return false;
}

}  // namespace

bool CriterionInstance::is_h_root(int index) const {
  return std::binary_search(h_roots.begin(), h_roots.end(), index);
}

int CriterionInstance::root_index(const Eigen::VectorXd& x, const std::string& what) const {
  if (x.size() != root_system.rank)
    throw ParameterError(what + " has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(root_system.rank));
  int idx = root_system.find(x, kRootPlaneTolerance);
  if (idx < 0) throw ParameterError(what + " " + format_vector(x) + " is not a root of " + name);
  return idx;
}

void finalize_instance(CriterionInstance& inst, const Eigen::VectorXd& u0_direction) {
  const auto& rs = inst.root_system;
  if (u0_direction.size() != rs.rank) throw ParameterError("u0 dimension mismatch");
  double n = u0_direction.norm();
  if (!(n > 0.0)) throw ParameterError("u0 must be nonzero");
  inst.u0 = u0_direction / n;
  if (!rs.negation_closed()) throw StructureError("root system is not closed under negation");
  std::sort(inst.h_roots.begin(), inst.h_roots.end());
  inst.h_roots.erase(std::unique(inst.h_roots.begin(), inst.h_roots.end()), inst.h_roots.end());
  for (int h : inst.h_roots) {
    if (h < 0 || h >= static_cast<int>(rs.roots.size())) throw ParameterError("h root index out of range");
    if (std::abs(rs.roots[h].dot(inst.u0)) > kRootPlaneTolerance)
      throw StructureError("h root " + format_vector(rs.roots[h]) + " is not orthogonal to u0");
  }
  inst.exact = false;
  inst.exact_roots.clear();
  inst.exact_u0.clear();
  auto u = to_rational(u0_direction);
  if (!u) return;
  std::vector<RationalVector> roots;
  for (const auto& r : rs.roots) {
    auto e = to_rational(r);
    if (!e) return;
    roots.push_back(std::move(*e));
  }
  inst.exact = true;
  inst.exact_roots = std::move(roots);
  inst.exact_u0 = std::move(*u);
}

RootPairCheck check_root_pair(const CriterionInstance& inst, int alpha, int beta, Condition3Reading reading) {
  const int n = static_cast<int>(inst.root_system.roots.size());
  if (alpha < 0 || alpha >= n || beta < 0 || beta >= n) throw ParameterError("root index out of range");
  RootPairCheck out;
  out.alpha = alpha;
  out.beta = beta;
  out.independent = !SpanTest(inst, {alpha}, false).contains(beta);
  out.condition1 = !inst.is_h_root(alpha) && !inst.is_h_root(beta);
  out.condition2_extra = condition2_extra(inst, alpha);
  out.condition2 = out.condition2_extra.empty();
  SpanTest plane(inst, condition3_basis(inst, alpha, reading), true);
  out.condition3_extra = condition3_extra(inst, plane, beta);
  out.condition3 = out.condition3_extra.empty();
  out.ok = out.independent && out.condition1 && out.condition2 && out.condition3;
  return out;
}

RootPairCheck check_root_pair(const CriterionInstance& inst, const Eigen::VectorXd& alpha,
                              const Eigen::VectorXd& beta, Condition3Reading reading) {
  return check_root_pair(inst, inst.root_index(alpha, "alpha"), inst.root_index(beta, "beta"), reading);
}

std::vector<RootPair> enumerate_root_pairs(const CriterionInstance& inst, int threads, Condition3Reading reading) {
  const std::vector<int> reps = canonical_roots(inst);
  const int m = static_cast<int>(reps.size());
  std::vector<std::vector<RootPair>> per_alpha(m);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < m; i = next++) {
      const int a = reps[i];
      if (inst.is_h_root(a) || !condition2_extra(inst, a).empty()) continue;
      SpanTest plane(inst, condition3_basis(inst, a, reading), true);
      for (int b : reps) {
        if (b == a || inst.is_h_root(b)) continue;
        if (is_negative(inst, a, b)) continue;
        if (!condition3_extra(inst, plane, b).empty()) continue;
        // independence: beta = +-alpha is the only dependent case in a reduced system,
        // but a non-reduced input is still caught here.
        if (SpanTest(inst, {a}, false).contains(b)) continue;
        per_alpha[i].push_back({a, b});
      }
    }
  };
  const int nt = std::max(1, std::min(threads, m));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::vector<RootPair> out;
  for (auto& v : per_alpha) out.insert(out.end(), v.begin(), v.end());
  return out;
}

bool contains_pair(const CriterionInstance& inst, const std::vector<RootPair>& pairs, const Eigen::VectorXd& alpha,
                   const Eigen::VectorXd& beta) {
  const auto& roots = inst.root_system.roots;
  auto same_class = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return (x - y).norm() <= kRootPlaneTolerance || (x + y).norm() <= kRootPlaneTolerance;
  };
  for (const auto& p : pairs)
    if (same_class(roots[p.alpha], alpha) && same_class(roots[p.beta], beta)) return true;
  return false;
}

std::string FactorLabel::label() const {
  if (type == "A") return "A(" + std::to_string(p) + "," + std::to_string(q) + ")";
  if (type == "E6" || type == "E7") return type;
  return type + "(" + std::to_string(p) + ")";
}

bool FactorLabel::rank_one() const { return type == "A" && p == 1 && q == 1; }

FactorLabel parse_factor_label(const std::string& raw) {
  const std::string label = trim(raw);
  static const std::regex two(R"(^A\((\d+),(\d+)\)$)");
  static const std::regex one(R"(^([CDQ])\((\d+)\)$)");
  std::smatch m;
  FactorLabel f;
  if (label == "E6" || label == "E7") {
    f.type = label;
    f.p = label == "E6" ? 6 : 7;
    return f;
  }
  if (std::regex_match(label, m, two)) {
    f.type = "A";
    f.p = parse_int(m[1], label);
    f.q = parse_int(m[2], label);
    if (f.p < 1 || f.q < 1) throw ParameterError("A(p,q) requires p, q >= 1");
    return f;
  }
  if (std::regex_match(label, m, one)) {
    f.type = m[1];
    f.p = parse_int(m[2], label);
    if (f.type == "C" && f.p == 1) return FactorLabel{"A", 1, 1};  // sp(1)/u(1) = su(2)/u(1)
    if (f.type == "C" && f.p < 1) throw ParameterError("C(n) requires n >= 1");
    if (f.type == "D" && f.p < 2) throw ParameterError("D(n) requires n >= 2");
    if (f.type == "Q" && f.p < 4) throw ParameterError("Q(n) requires n >= 4");
    return f;
  }
  throw ParameterError("unknown catalog case '" + label + "'; known: " + kCatalogNames);
}

ProductSpec parse_product_spec(const std::string& raw) {
  const std::string text = trim(raw);
  ProductSpec spec;
  std::string factors = text, cs;
  auto at = text.find('@');
  if (at != std::string::npos) {
    factors = text.substr(0, at);
    cs = text.substr(at + 1);
  }
  std::stringstream fs(factors);
  std::string item;
  while (std::getline(fs, item, '+')) spec.factors.push_back(parse_factor_label(item));
  if (spec.factors.empty()) throw ParameterError("empty product spec");
  if (cs.empty()) {
    spec.c.assign(spec.factors.size(), 1.0);
  } else {
    std::stringstream ss(cs);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        spec.c.push_back(v);
      } catch (const std::exception&) {
        throw ParameterError("bad c value '" + item + "' in '" + text + "'");
      }
    }
  }
  if (spec.c.size() != spec.factors.size()) throw ParameterError("product spec needs one c value per factor");
  return spec;
}

CriterionInstance product_instance(const ProductSpec& spec) { return product_parts(spec).inst; }

CriterionInstance catalog_case(const std::string& name) {
  const std::string n = trim(name);
  if (n.find('+') != std::string::npos || n.find('@') != std::string::npos)
    return product_instance(parse_product_spec(n));
  return factor_case(parse_factor_label(n)).inst;
}

CriterionInstance criterion_instance(const CosetDecomposition& space) {
  if (space.t_cap_m.cols() != 1) throw PreconditionError("criterion needs dim t∩m = 1");
  const LieAlgebra& L = *space.algebra;
  CriterionInstance inst;
  inst.root_system = space.cartan.root_system();
  inst.name = space.name;
  inst.family = "computed";
  Eigen::VectorXd u(space.cartan.rank());
  for (int k = 0; k < u.size(); ++k) u[k] = L.inner(space.cartan.t_basis.col(k), space.t_cap_m.col(0));
  for (int plane : space.h_roots) {
    inst.h_roots.push_back(2 * plane);
    inst.h_roots.push_back(2 * plane + 1);
  }
  finalize_instance(inst, u);
  return inst;
}

std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> catalog_witness(const std::string& name) {
  FactorLabel f;
  try {
    f = parse_factor_label(name);
  } catch (const ParameterError&) {
    return std::nullopt;
  }
  if (f.type == "A" && f.p >= 2 && f.q >= 2) {
    const int n = f.p + f.q;
    return std::make_pair(Eigen::VectorXd(unit(n, 0) - unit(n, f.p)), Eigen::VectorXd(unit(n, 1) - unit(n, f.p + 1)));
  }
  if (f.type == "C" && f.p >= 2) return std::make_pair(Eigen::VectorXd(2.0 * unit(f.p, 0)), Eigen::VectorXd(2.0 * unit(f.p, 1)));
  if (f.type == "D" && f.p >= 4)
    return std::make_pair(Eigen::VectorXd(unit(f.p, 0) + unit(f.p, 1)), Eigen::VectorXd(unit(f.p, 2) + unit(f.p, 3)));
  if (f.type == "E6") {
    const double s3 = std::sqrt(3.0) / 2.0;
    Eigen::VectorXd a(6), b(6);
    a << -0.5, 0.5, 0.5, 0.5, 0.5, s3;
    b << -0.5, -0.5, -0.5, -0.5, -0.5, s3;  // e6 sign flipped so that b is a root
    return std::make_pair(a, b);
  }
  if (f.type == "E7") return std::make_pair(Eigen::VectorXd(unit(7, 4) + unit(7, 5)), Eigen::VectorXd(unit(7, 4) - unit(7, 5)));
  return std::nullopt;
}

bool ratio_exclusion(double c1, double c2) {
  if (!(c1 != 0.0) || !(c2 != 0.0) || !std::isfinite(c1) || !std::isfinite(c2))
    throw ParameterError("ratio_exclusion needs nonzero finite c1, c2");
  for (double r : {1.0, -1.0, 0.5, -0.5, 2.0, -2.0}) {
    double t = r * c2;
    if (std::abs(c1 - t) <= 1e-9 * std::max(std::abs(c1), std::abs(t))) return false;
  }
  return true;
}

bool ratio_exclusion(const Rational& c1, const Rational& c2) {
  if (c1.numerator() == 0 || c2.numerator() == 0) throw ParameterError("ratio_exclusion needs nonzero c1, c2");
  for (Rational r : {Rational(1), Rational(-1), Rational(1, 2), Rational(-1, 2), Rational(2), Rational(-2)})
    if (c1 == r * c2) return false;
  return true;
}

ProductVerdict product_case_check(const ProductSpec& spec) {
  const int k = static_cast<int>(spec.factors.size());
  if (k < 2) throw ParameterError("product_case_check needs at least two factors");
  ProductParts parts = product_parts(spec);
  const CriterionInstance& inst = parts.inst;
  ProductVerdict out;
  auto rank_one = [&](int i) { return spec.factors[i].rank_one(); };

  if (k > 3) {
    out.rule = "k>3";
    out.order = {0, 1};
    search_witness(inst, p_roots(parts, 0, false), p_roots(parts, 1, false), out);
  } else if (k == 3) {
    int big = -1;
    for (int i = 0; i < 3; ++i)
      if (!rank_one(i)) {
        big = i;
        break;
      }
    if (big >= 0) {
      out.rule = "k=3 non-A1 factor";
      for (int j = 0; j < 3 && !out.excluded; ++j) {
        if (j == big) continue;
        out.order = {big, j};
        search_witness(inst, p_roots(parts, j, false), p_roots(parts, big, true), out);
      }
    } else {
      out.rule = "k=3 all A1";
      // alpha = v_a, beta = v_b with |c_b| != |c_d| for the remaining index d.
      const int perms[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
      for (const auto& pm : perms) {
        for (int swap = 0; swap < 2 && !out.excluded; ++swap) {
          int a = pm[0], b = swap ? pm[2] : pm[1], d = swap ? pm[1] : pm[2];
          if (same_abs(spec.c[b], spec.c[d])) continue;
          out.order = {a, b, d};
          search_witness(inst, {root_of(parts, parts.v[a])}, {root_of(parts, parts.v[b])}, out);
        }
        if (out.excluded) break;
      }
      if (!out.excluded) {
        out.order.clear();
        out.note = "|c1|, |c2|, |c3| all equal: no verdict";
      }
    }
  } else if (!rank_one(0) && !rank_one(1)) {
    out.rule = "k=2 both non-A1";
    out.order = {0, 1};
    search_witness(inst, p_roots(parts, 0, true), p_roots(parts, 1, true), out);
  } else if (rank_one(0) && rank_one(1)) {
    out.rule = "k=2 both A1";
    out.predicate = "ratio_exclusion";
    out.order = {0, 1};
    out.excluded = ratio_exclusion(spec.c[0], spec.c[1]);
    if (!out.excluded) out.note = "c1 in {+-c2, +-c2/2, +-2c2}: no verdict";
  } else {
    out.rule = "k=2 mixed";
    const int big = rank_one(0) ? 1 : 0, small = 1 - big;
    out.order = {big, small};
    const double c = spec.c[big] / spec.c[small];
    const int beta = root_of(parts, parts.v[small]);
    const auto& roots = inst.root_system.roots;
    for (int a : p_roots(parts, big, true)) {
      ExceptionalSet ex;
      ex.alpha = a;
      // c v1 + t alpha = gamma: solve in the plane spanned by v1 and alpha.
      Eigen::MatrixXd B(roots[a].size(), 2);
      B.col(0) = parts.v[big];
      B.col(1) = roots[a];
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
      for (std::size_t g = 0; g < roots.size(); ++g) {
        if (parts.root_factor[g] != big) continue;
        Eigen::VectorXd x = qr.solve(roots[g]);
        if ((B * x - roots[g]).norm() > kRootPlaneTolerance) continue;
        double val = x[0];
        if (std::abs(val) < 1e-12) continue;  // c = 0 is outside the family
        bool seen = false;
        for (double e : ex.values) seen = seen || std::abs(e - val) <= 1e-9 * std::max(1.0, std::abs(val));
        if (!seen) ex.values.push_back(val);
      }
      std::sort(ex.values.begin(), ex.values.end());
      bool hit = false;
      for (double e : ex.values) hit = hit || std::abs(e - c) <= 1e-9 * std::max(std::abs(e), std::abs(c));
      if (!hit && !out.excluded) search_witness(inst, {a}, {beta}, out);
      out.exceptional.push_back(std::move(ex));
    }
    if (!out.excluded) out.note = "c1/c2 lies in every exceptional set: no verdict";
  }
  if (!out.excluded && out.note.empty()) out.note = "rule produced no verified witness";
  return out;
}

CriterionRow criterion_row(const std::string& name, int threads) {
  CriterionRow row;
  CriterionInstance inst = catalog_case(name);
  row.name = inst.name;
  row.n_roots = static_cast<int>(inst.root_system.roots.size());
  auto pairs = enumerate_root_pairs(inst, threads);
  row.n_pairs = static_cast<int>(pairs.size());
  if (!pairs.empty()) row.first_pair = pairs.front();
  if (inst.family == "product") {
    ProductVerdict v = product_case_check(parse_product_spec(name));
    row.excluded = v.excluded;
    row.listed = true;
    row.rule = v.rule;
    row.note = v.note;
    if (v.witness) row.first_pair = v.witness;
  } else {
    row.excluded = !pairs.empty();
    row.listed = inst.listed;
    row.rule = "enumeration";
    row.note = inst.note;
    if (auto w = catalog_witness(name)) row.witness_found = contains_pair(inst, pairs, w->first, w->second);
  }
  return row;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < v.size(); ++i) {
    double x = std::abs(v[i]) < 1e-15 ? 0.0 : v[i];
    if (i) os << ",";
    os << std::setprecision(10) << x;
  }
  os << ")";
  return os.str();
}

namespace {
std::vector<double> as_list(const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  for (auto& x : out)
    if (std::abs(x) < 1e-15) x = 0.0;
  return out;
}

nlohmann::json pair_json(const CriterionInstance& inst, const RootPair& p) {
  return {{"alpha", as_list(inst.root_system.roots[p.alpha])}, {"beta", as_list(inst.root_system.roots[p.beta])}};
}
}  // namespace

void to_json(nlohmann::json& j, const CriterionInstance& inst) {
  j = {{"name", inst.name},
       {"family", inst.family},
       {"ambient_dim", inst.root_system.rank},
       {"n_roots", inst.root_system.roots.size()},
       {"n_h_roots", inst.h_roots.size()},
       {"u0", as_list(inst.u0)},
       {"listed", inst.listed},
       {"exact", inst.exact},
       {"note", inst.note}};
}

void to_json(nlohmann::json& j, const RootPairCheck& c) {
  j = {{"ok", c.ok},
       {"independent", c.independent},
       {"condition1", c.condition1},
       {"condition2", c.condition2},
       {"condition3", c.condition3},
       {"condition2_extra", c.condition2_extra},
       {"condition3_extra", c.condition3_extra}};
}

nlohmann::json pairs_to_json(const CriterionInstance& inst, const std::vector<RootPair>& pairs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pairs) arr.push_back(pair_json(inst, p));
  return arr;
}

nlohmann::json verdict_to_json(const ProductSpec& spec, const ProductVerdict& v) {
  CriterionInstance inst = product_instance(spec);
  nlohmann::json j = {{"name", inst.name}, {"excluded", v.excluded}, {"rule", v.rule}, {"order", v.order}, {"note", v.note}};
  if (!v.predicate.empty()) j["predicate"] = v.predicate;
  if (v.witness) j["witness"] = pair_json(inst, *v.witness);
  if (v.witness_check) j["witness_check"] = *v.witness_check;
  if (!v.exceptional.empty()) {
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : v.exceptional)
      ex.push_back({{"alpha", as_list(inst.root_system.roots[e.alpha])}, {"c_values", e.values}});
    j["exceptional"] = ex;
  }
  return j;
}

nlohmann::json row_to_json(const CriterionRow& row) {
  nlohmann::json j = {{"name", row.name},   {"listed", row.listed},   {"excluded", row.excluded},
                      {"n_roots", row.n_roots}, {"n_pairs", row.n_pairs}, {"rule", row.rule},
                      {"note", row.note}};
  if (row.witness_found) j["witness_found"] = *row.witness_found;
  if (row.first_pair) j["first_pair"] = pair_json(catalog_case(row.name), *row.first_pair);
  return j;
}

std::string rows_to_text(const std::vector<CriterionRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(28) << "case" << std::setw(8) << "listed" << std::setw(8) << "roots" << std::setw(8)
     << "pairs" << std::setw(10) << "verdict" << std::setw(9) << "witness"
     << "rule\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(28) << r.name << std::setw(8) << (r.listed ? "yes" : "no") << std::setw(8)
       << r.n_roots << std::setw(8) << r.n_pairs << std::setw(10) << (r.excluded ? "excluded" : "open") << std::setw(9)
       << (r.witness_found ? (*r.witness_found ? "found" : "MISSING") : "-") << r.rule;
    if (!r.note.empty()) os << " (" << r.note << ")";
    os << "\n";
  }
  return os.str();
}

}  // namespace flagcurv
