#include "flagcurv/coset_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "flagcurv/error.hpp"
#include "flagcurv/random.hpp"

namespace flagcurv {

namespace {

// Orthonormal basis (columns, coefficient space) of the null space of M.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, double rel_tol = 1e-9) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  double cut = std::max(rel_tol * std::max(smax, 1.0), 1e-12);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd m(a.rows(), a.cols() + b.cols());
  m << a, b;
  return m;
}

// Stacked ad(x_i) restricted to the span of `basis` (g coordinates).
Eigen::MatrixXd stacked_ad(const LieAlgebra& L, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& basis) {
  const int d = L.dim();
  Eigen::MatrixXd M(d * xs.cols(), basis.cols());
  for (int i = 0; i < xs.cols(); ++i) M.middleRows(i * d, d) = L.ad(xs.col(i)) * basis;
  return M;
}

}  // namespace

Eigen::VectorXd CosetDecomposition::project_h(const Eigen::VectorXd& x) const {
  if (x.size() != dim_g()) throw ParameterError("project: vector length does not match dim g");
  return h_basis * (h_basis.transpose() * (algebra->metric() * x));
}

Eigen::VectorXd CosetDecomposition::project_m(const Eigen::VectorXd& x) const {
  if (x.size() != dim_g()) throw ParameterError("project: vector length does not match dim g");
  return x - project_h(x);
}

Eigen::VectorXd CosetDecomposition::bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return algebra->bracket(x, y);
}

Eigen::VectorXd CosetDecomposition::bracket_m(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return project_m(algebra->bracket(x, y));
}

Eigen::VectorXd CosetDecomposition::bracket_h(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return project_h(algebra->bracket(x, y));
}

Eigen::VectorXd CosetDecomposition::to_m(const Eigen::VectorXd& x) const {
  if (x.size() != dim_g()) throw ParameterError("to_m: vector length does not match dim g");
  return m_basis.transpose() * (algebra->metric() * x);
}

Eigen::VectorXd CosetDecomposition::from_m(const Eigen::VectorXd& c) const {
  if (c.size() != dim_m()) throw ParameterError("from_m: vector length does not match dim m");
  return m_basis * c;
}

Eigen::VectorXd CosetDecomposition::to_h(const Eigen::VectorXd& x) const {
  if (x.size() != dim_g()) throw ParameterError("to_h: vector length does not match dim g");
  return h_basis.transpose() * (algebra->metric() * x);
}

Eigen::VectorXd CosetDecomposition::from_h(const Eigen::VectorXd& c) const {
  if (c.size() != dim_h()) throw ParameterError("from_h: vector length does not match dim h");
  return h_basis * c;
}

Eigen::VectorXd CosetDecomposition::bracket_mm(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const int n = dim_m();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      double ab = a[i] * b[j];
      if (ab == 0.0) continue;
      for (int k = 0; k < n; ++k) out[k] += ab * cm(i, j, k);
    }
  }
  return out;
}

Eigen::VectorXd CosetDecomposition::bracket_mh(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const int n = dim_m(), nh = dim_h();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double ab = a[i] * b[j];
      if (ab == 0.0) continue;
      for (int k = 0; k < nh; ++k) out[k] += ab * ch(i, j, k);
    }
  return out;
}

Eigen::VectorXd CosetDecomposition::act_h(const Eigen::VectorXd& hk, const Eigen::VectorXd& b) const {
  const int n = dim_m(), nh = dim_h();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < nh; ++k) {
    if (hk[k] == 0.0) continue;
    for (int a = 0; a < n; ++a) {
      double x = hk[k] * b[a];
      if (x == 0.0) continue;
      for (int c = 0; c < n; ++c) out[c] += x * chm(k, a, c);
    }
  }
  return out;
}

void CosetDecomposition::finalize_frame() {
  const int n = dim_m(), nh = dim_h();
  const Eigen::MatrixXd& G = algebra->metric();
  cm_.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  ch_.assign(static_cast<std::size_t>(n) * n * nh, 0.0);
  chm_.assign(static_cast<std::size_t>(nh) * n * n, 0.0);
  Eigen::MatrixXd MtG = m_basis.transpose() * G;
  Eigen::MatrixXd HtG = h_basis.transpose() * G;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Eigen::VectorXd z = algebra->bracket(m_basis.col(a), m_basis.col(b));
      Eigen::VectorXd zm = MtG * z, zh = HtG * z;
      for (int c = 0; c < n; ++c) {
        cm_[(a * n + b) * n + c] = zm[c];
        cm_[(b * n + a) * n + c] = -zm[c];
      }
      for (int k = 0; k < nh; ++k) {
        ch_[(a * n + b) * nh + k] = zh[k];
        ch_[(b * n + a) * nh + k] = -zh[k];
      }
    }
  for (int k = 0; k < nh; ++k)
    for (int a = 0; a < n; ++a) {
      Eigen::VectorXd zm = MtG * algebra->bracket(h_basis.col(k), m_basis.col(a));
      for (int c = 0; c < n; ++c) chm_[(k * n + a) * n + c] = zm[c];
    }
}

CosetDecomposition build_coset(std::shared_ptr<const LieAlgebra> Lp, const std::vector<Eigen::VectorXd>& h_vectors,
                               const std::vector<Eigen::VectorXd>& seed_directions, std::uint64_t seed) {
  if (!Lp) throw ParameterError("build_coset: missing algebra");
  const LieAlgebra& L = *Lp;
  const int d = L.dim();
  const Eigen::MatrixXd& G = L.metric();
  CosetDecomposition S;
  S.algebra = Lp;
  S.h_basis = orthonormalize(L, h_vectors);
  const int nh = S.dim_h();
  auto pr_h = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return S.h_basis * (S.h_basis.transpose() * (G * x));
  };

  for (int i = 0; i < nh; ++i)
    for (int j = i + 1; j < nh; ++j) {
      Eigen::VectorXd z = L.bracket(S.h_basis.col(i), S.h_basis.col(j));
      double off = L.norm(z - pr_h(z));
      S.checks.subalgebra = std::max(S.checks.subalgebra, off);
    }
  if (S.checks.subalgebra > 1e-10)
    throw StructureError("h is not a subalgebra: |pr_m [h_i,h_j]| = " + std::to_string(S.checks.subalgebra));

  Rng rng(seed);

  // Cartan subalgebra of h as the centralizer in h of a generic element.
  Eigen::MatrixXd th(d, 0);
  if (nh > 0) {
    bool found = false;
    for (int attempt = 0; attempt < 16 && !found; ++attempt) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < nh; ++i) x += rng.normal() * S.h_basis.col(i);
      Eigen::MatrixXd K = S.h_basis.transpose() * G * L.ad(x) * S.h_basis;
      Eigen::MatrixXd ns = null_space(K);
      th = orthonormalize(L, Eigen::MatrixXd(S.h_basis * ns));
      found = true;
      for (int i = 0; i < th.cols() && found; ++i)
        for (int j = i + 1; j < th.cols(); ++j)
          if (L.norm(L.bracket(th.col(i), th.col(j))) > 1e-10) {
            found = false;
            break;
          }
    }
    if (!found) throw DecompositionError("could not find a Cartan subalgebra of h");
  }

  // z ∩ m where z is the centralizer of t∩h in g.
  Eigen::MatrixXd zm;
  {
    Eigen::MatrixXd M(th.cols() * d + nh, d);
    if (th.cols() > 0) M.topRows(th.cols() * d) = stacked_ad(L, th, Eigen::MatrixXd::Identity(d, d));
    if (nh > 0) M.bottomRows(nh) = S.h_basis.transpose() * G;
    zm = orthonormalize(L, null_space(M));
  }

  // Greedy abelian extension inside z ∩ m.
  Eigen::MatrixXd a(d, 0);
  auto commuting_part = [&]() -> Eigen::MatrixXd {
    // Vectors of z ∩ m commuting with a and orthogonal to a.
    Eigen::MatrixXd M(a.cols() * d + a.cols(), zm.cols());
    if (a.cols() > 0) {
      M.topRows(a.cols() * d) = stacked_ad(L, a, zm);
      M.bottomRows(a.cols()) = a.transpose() * G * zm;
    }
    return zm * null_space(M);
  };
  for (const auto& s0 : seed_directions) {
    if (s0.size() != d) throw ParameterError("seed direction has wrong length");
    Eigen::MatrixXd C = commuting_part();
    if (C.cols() == 0) break;
    Eigen::MatrixXd Co = orthonormalize(L, C);
    Eigen::VectorXd y = Co * (Co.transpose() * (G * s0));
    if (L.norm(y) <= 1e-8) continue;
    a = hcat(a, y / L.norm(y));
  }
  for (int guard = 0; guard < d; ++guard) {
    Eigen::MatrixXd C = commuting_part();
    if (C.cols() == 0) break;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < C.cols(); ++i) y += rng.normal() * C.col(i);
    a = hcat(a, y / L.norm(y));
  }

  std::vector<Eigen::VectorXd> tvec;
  for (int i = 0; i < th.cols(); ++i) tvec.push_back(th.col(i));
  for (int i = 0; i < a.cols(); ++i) tvec.push_back(a.col(i));
  try {
    S.cartan = root_decomposition(L, tvec, seed ^ 0x9e3779b97f4a7c15ULL);
  } catch (const Error& e) {
    throw DecompositionError(std::string("failed to extend t∩h to a Cartan subalgebra of g: ") + e.what());
  }
  if (S.cartan.rank() != static_cast<int>(tvec.size()))
    throw DecompositionError("Cartan basis lost independence during orthonormalization");
  S.t_cap_h = S.cartan.t_basis.leftCols(th.cols());
  S.t_cap_m = S.cartan.t_basis.rightCols(a.cols());

  // Fundamental check: t∩h is maximal abelian in h.
  if (nh > 0) {
    Eigen::MatrixXd M = stacked_ad(L, S.t_cap_h, S.h_basis);
    S.checks.fundamental_ok = null_space(M).cols() == S.t_cap_h.cols();
  } else {
    S.checks.fundamental_ok = true;
  }
  if (!S.checks.fundamental_ok) throw DecompositionError("t∩h is not a Cartan subalgebra of h");

  // Classify root planes and assemble an adapted frame of m.
  std::vector<Eigen::VectorXd> mvec;
  for (int i = 0; i < S.t_cap_m.cols(); ++i) mvec.push_back(S.t_cap_m.col(i));
  for (std::size_t j = 0; j < S.cartan.planes.size(); ++j) {
    const auto& pl = S.cartan.planes[j];
    Eigen::VectorXd ph = pr_h(pl.p), qh = pr_h(pl.q);
    Eigen::VectorXd pm = pl.p - ph, qm = pl.q - qh;
    double hpart = std::max(L.norm(ph), L.norm(qh));
    double mpart = std::max(L.norm(pm), L.norm(qm));
    PlaneLocation loc = PlaneLocation::mixed;
    if (mpart <= 1e-8) loc = PlaneLocation::in_h;
    if (hpart <= 1e-8) loc = PlaneLocation::in_m;
    S.plane_location.push_back(loc);
    if (loc == PlaneLocation::in_h) S.h_roots.push_back(static_cast<int>(j));
    mvec.push_back(pm);
    mvec.push_back(qm);
  }
  S.m_basis = orthonormalize(L, mvec, 1e-8);
  S.checks.dimension_ok = S.dim_h() + S.dim_m() == d;
  if (!S.checks.dimension_ok)
    throw DecompositionError("dim h + dim m = " + std::to_string(S.dim_h() + S.dim_m()) + " differs from dim g = " +
                             std::to_string(d));
  if (nh > 0) {
    S.checks.orthogonality = (S.h_basis.transpose() * G * S.m_basis).cwiseAbs().maxCoeff();
    for (int i = 0; i < nh; ++i)
      for (int j = 0; j < S.dim_m(); ++j)
        S.checks.reductivity =
            std::max(S.checks.reductivity, L.norm(pr_h(L.bracket(S.h_basis.col(i), S.m_basis.col(j)))));
    if (S.checks.reductivity > 1e-10) throw StructureError("decomposition is not reductive");
  }
  S.finalize_frame();
  return S;
}

std::string HermitianFactorSpec::label() const {
  if (type == "A") return "A(" + std::to_string(p) + "," + std::to_string(q) + ")";
  if (type == "E6" || type == "E7") return type;
  return type + "(" + std::to_string(p) + ")";
}

bool HermitianFactorSpec::rank_one() const {
  return (type == "A" && p == 1 && q == 1) || (type == "Q" && p == 3) || (type == "C" && p == 1);
}

namespace {

int pair_index(int n, int i, int j) {
  // Position of (i,j), i<j, in the row-major enumeration of pairs.
  int idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++idx)
      if (a == i && b == j) return idx;
  return -1;
}

Eigen::VectorXd unit(int d, int i) { return Eigen::VectorXd::Unit(d, i); }

}  // namespace

HermitianFactorSpec hermitian_factor(const std::string& type, int p, int q, double scale) {
  HermitianFactorSpec f;
  f.type = type;
  f.p = p;
  f.q = q;
  f.scale = scale;
  if (type == "E6" || type == "E7") return f;
  std::shared_ptr<LieAlgebra> L;
  if (type == "A") {
    if (p < 1 || q < 1) throw ParameterError("A(p,q) requires p, q >= 1");
    const int n = p + q;
    L = std::make_shared<LieAlgebra>(build_classical(Family::su, n, scale));
    const int d = L->dim();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((i < p) == (j < p)) {
          int k = pair_index(n, i, j);
          f.h_basis.push_back(unit(d, 2 * k));
          f.h_basis.push_back(unit(d, 2 * k + 1));
        }
    for (int k = 0; k + 1 < n; ++k)
      if (k + 1 < p || k >= p) f.h_basis.push_back(unit(d, n * (n - 1) + k));
    QMatrix v;
    v.size = n;
    for (int i = 0; i < n; ++i) v.entries.push_back({i, i, {Rational(0), Rational(i < p ? q : -p)}});
    f.v = L->coordinates(0, v);
  } else if (type == "Q") {
    if (p < 3) throw ParameterError("Q(n) requires n >= 3");
    const int n = p;
    L = std::make_shared<LieAlgebra>(build_classical(Family::so, n, scale));
    const int d = L->dim();
    for (int i = 2; i < n; ++i)
      for (int j = i + 1; j < n; ++j) f.h_basis.push_back(unit(d, pair_index(n, i, j)));
    f.v = unit(d, 0);
  } else if (type == "C") {
    if (p < 1) throw ParameterError("C(n) requires n >= 1");
    const int n = p;
    L = std::make_shared<LieAlgebra>(build_classical(Family::sp, n, scale));
    const int d = L->dim();
    for (int k = 0; k < n * (n - 1); ++k) f.h_basis.push_back(unit(d, k));
    for (int k = 0; k + 1 < n; ++k) f.h_basis.push_back(unit(d, n * (n - 1) + k) - unit(d, n * (n - 1) + k + 1));
    f.v = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < n; ++k) f.v += unit(d, n * (n - 1) + k);
  } else if (type == "D") {
    if (p < 2) throw ParameterError("D(n) requires n >= 2");
    const int n = p;
    L = std::make_shared<LieAlgebra>(build_classical(Family::so, 2 * n, scale));
    // X + iY in u(n) goes to [[X, -Y], [Y, X]].
    auto embed = [&](const std::vector<std::tuple<int, int, int>>& X, const std::vector<std::tuple<int, int, int>>& Y) {
      QMatrix m;
      m.size = 2 * n;
      for (auto [i, j, s] : X) {
        m.entries.push_back({i, j, {Rational(s), Rational(0)}});
        m.entries.push_back({i + n, j + n, {Rational(s), Rational(0)}});
      }
      for (auto [i, j, s] : Y) {
        m.entries.push_back({i, j + n, {Rational(-s), Rational(0)}});
        m.entries.push_back({i + n, j, {Rational(s), Rational(0)}});
      }
      return L->coordinates(0, m);
    };
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        f.h_basis.push_back(embed({{i, j, 1}, {j, i, -1}}, {}));
        f.h_basis.push_back(embed({}, {{i, j, 1}, {j, i, 1}}));
      }
    for (int k = 0; k + 1 < n; ++k) f.h_basis.push_back(embed({}, {{k, k, 1}, {k + 1, k + 1, -1}}));
    std::vector<std::tuple<int, int, int>> id;
    for (int i = 0; i < n; ++i) id.push_back({i, i, 1});
    f.v = embed({}, id);
  } else {
    throw ParameterError("unknown Hermitian factor type '" + type + "' (expected A, Q, C, D, E6 or E7)");
  }
  f.v *= std::sqrt(2.0) / L->norm(f.v);
  f.algebra = L;
  return f;
}

HermitianFactorSpec hermitian_factor_from_string(const std::string& label, double scale) {
  static const std::regex two(R"(\s*([A-Z])\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*)");
  static const std::regex one(R"(\s*([A-Z])\s*\(\s*(\d+)\s*\)\s*)");
  std::smatch m;
  if (label == "E6" || label == "E7") return hermitian_factor(label, 0, 0, scale);
  if (std::regex_match(label, m, two)) return hermitian_factor(m[1], std::stoi(m[2]), std::stoi(m[3]), scale);
  if (std::regex_match(label, m, one)) return hermitian_factor(m[1], std::stoi(m[2]), 0, scale);
  throw ParameterError("cannot parse Hermitian factor '" + label + "'");
}

CosetDecomposition build_s1_bundle(const std::vector<HermitianFactorSpec>& factors, const std::vector<double>& c) {
  if (factors.empty()) throw ParameterError("build_s1_bundle requires at least one factor");
  if (factors.size() != c.size()) throw ParameterError("one coefficient c_i is required per factor");
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] == 0.0 || !std::isfinite(c[i]))
      throw ParameterError("coefficient c_" + std::to_string(i + 1) +
                           " must be a nonzero real; c_i = 0 splits off a circle factor");
  std::vector<LieAlgebra> parts;
  for (const auto& f : factors) {
    if (!f.algebra)
      throw ParameterError("factor " + f.label() + " is available at root level only (no structure constants)");
    for (const auto& h : f.h_basis)
      if (f.algebra->norm(f.algebra->bracket(f.v, h)) > 1e-10)
        throw StructureError("v is not central in k for factor " + f.label());
    parts.push_back(*f.algebra);
  }
  auto L = std::make_shared<LieAlgebra>(direct_sum(parts));
  const int d = L->dim();
  std::vector<Eigen::VectorXd> h, vs;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  int off = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const int di = factors[i].algebra->dim();
    for (const auto& x : factors[i].h_basis) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
      y.segment(off, di) = x;
      h.push_back(y);
    }
    Eigen::VectorXd vi = Eigen::VectorXd::Zero(d);
    vi.segment(off, di) = factors[i].v;
    vs.push_back(vi);
    v += c[i] * vi;
    off += di;
  }
  // Orthocomplement of v inside span{v_i}.
  std::vector<Eigen::VectorXd> span = {v};
  for (const auto& x : vs) span.push_back(x);
  Eigen::MatrixXd ob = orthonormalize(*L, span);
  for (int i = 1; i < ob.cols(); ++i) h.push_back(ob.col(i));

  CosetDecomposition S = build_coset(L, h, {v});
  std::string name;
  for (std::size_t i = 0; i < factors.size(); ++i) name += (i ? "x" : "") + factors[i].label();
  S.name = "bundle " + name;
  S.navigation_v = v;
  if (S.t_cap_m.cols() != 1) throw DecompositionError("S^1-bundle has dim t∩m != 1");
  double along = std::abs(L->inner(S.t_cap_m.col(0), v)) / L->norm(v);
  if (std::abs(along - 1.0) > 1e-8) throw DecompositionError("t∩m is not spanned by v");
  return S;
}

namespace {

bool lex_pos(const Eigen::VectorXd& x, double tol) {
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] > tol) return true;
    if (x[i] < -tol) return false;
  }
  return false;
}

Eigen::VectorXd canonical_sign(const Eigen::VectorXd& x, double tol) { return lex_pos(x, tol) ? x : Eigen::VectorXd(-x); }

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - tol) return true;
    if (a[i] > b[i] + tol) return false;
  }
  return false;
}

}  // namespace

std::vector<SubspaceFamily> hat_decomposition(const CosetDecomposition& S) {
  const LieAlgebra& L = *S.algebra;
  const int rh = S.rank_h();
  const double tol = 1e-8;
  // Group planes by +-pr_h(alpha), in t∩h frame coordinates.
  std::vector<Eigen::VectorXd> keys;
  std::vector<std::vector<int>> members;
  keys.push_back(Eigen::VectorXd::Zero(rh));
  members.push_back({});
  for (std::size_t j = 0; j < S.cartan.planes.size(); ++j) {
    Eigen::VectorXd a = canonical_sign(S.cartan.planes[j].alpha.head(rh), tol);
    if (a.norm() <= tol) a.setZero();
    std::size_t g = 0;
    while (g < keys.size() && (keys[g] - a).norm() > tol) ++g;
    if (g == keys.size()) {
      keys.push_back(a);
      members.push_back({});
    }
    members[g].push_back(static_cast<int>(j));
  }
  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin() + 1, order.end(),
                   [&](std::size_t x, std::size_t y) { return lex_less(keys[y], keys[x], tol); });

  std::vector<SubspaceFamily> out;
  for (std::size_t g : order) {
    SubspaceFamily fam;
    fam.label = "hat";
    fam.index = S.t_cap_h * keys[g];
    fam.planes = members[g];
    std::vector<Eigen::VectorXd> gv;
    if (g == 0)
      for (int k = 0; k < S.cartan.rank(); ++k) gv.push_back(S.cartan.t_basis.col(k));
    for (int j : members[g]) {
      gv.push_back(S.cartan.planes[j].p);
      gv.push_back(S.cartan.planes[j].q);
    }
    fam.basis_g = orthonormalize(L, gv);
    std::vector<Eigen::VectorXd> hv, mv;
    for (int c = 0; c < fam.basis_g.cols(); ++c) {
      Eigen::VectorXd x = fam.basis_g.col(c);
      Eigen::VectorXd xh = S.project_h(x);
      hv.push_back(xh);
      mv.push_back(x - xh);
    }
    fam.basis_h = orthonormalize(L, hv, 1e-8);
    fam.basis = orthonormalize(L, mv, 1e-8);
    if (fam.basis_h.cols() + fam.basis.cols() != fam.basis_g.cols())
      throw DecompositionError("hat family does not split along h + m");
    out.push_back(fam);
  }
  return out;
}

std::vector<SubspaceFamily> hathat_decomposition(const CosetDecomposition& S, const Eigen::VectorXd& alpha_prime) {
  const LieAlgebra& L = *S.algebra;
  const double tol = 1e-8;
  if (alpha_prime.size() != L.dim()) throw ParameterError("alpha' must be given in g coordinates");
  Eigen::VectorXd ac = S.t_cap_h.transpose() * (L.metric() * alpha_prime);
  if (ac.norm() <= tol) throw ParameterError("alpha' must be a nonzero vector of t∩h");
  if (L.norm(alpha_prime - S.t_cap_h * ac) > 1e-8 * std::max(1.0, ac.norm()))
    throw ParameterError("alpha' does not lie in t∩h");
  Eigen::VectorXd ahat = ac / ac.norm();
  auto hat = hat_decomposition(S);
  std::vector<Eigen::VectorXd> keys;
  std::vector<std::vector<std::size_t>> members;
  keys.push_back(Eigen::VectorXd::Zero(ac.size()));
  members.push_back({});
  for (std::size_t i = 0; i < hat.size(); ++i) {
    Eigen::VectorXd gc = S.t_cap_h.transpose() * (L.metric() * hat[i].index);
    Eigen::VectorXd g2 = gc - gc.dot(ahat) * ahat;
    g2 = canonical_sign(g2, tol);
    if (g2.norm() <= tol) g2.setZero();
    std::size_t g = 0;
    while (g < keys.size() && (keys[g] - g2).norm() > tol) ++g;
    if (g == keys.size()) {
      keys.push_back(g2);
      members.push_back({});
    }
    members[g].push_back(i);
  }
  std::vector<SubspaceFamily> out;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    if (members[g].empty()) continue;
    SubspaceFamily fam;
    fam.label = "hathat";
    fam.index = S.t_cap_h * keys[g];
    std::vector<Eigen::VectorXd> mv;
    for (std::size_t i : members[g]) {
      for (int c = 0; c < hat[i].basis.cols(); ++c) mv.push_back(hat[i].basis.col(c));
      for (int j : hat[i].planes) fam.planes.push_back(j);
    }
    fam.basis = orthonormalize(L, mv, 1e-8);
    out.push_back(fam);
  }
  return out;
}

bool is_h_root(const CosetDecomposition& S, const Eigen::VectorXd& alpha_prime, double tol) {
  const LieAlgebra& L = *S.algebra;
  for (int j : S.h_roots) {
    const auto& a = S.cartan.planes[j].alpha_g;
    if (L.norm(a - alpha_prime) <= tol || L.norm(a + alpha_prime) <= tol) return true;
  }
  return false;
}

}  // namespace flagcurv
