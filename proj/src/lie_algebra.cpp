#include "flagcurv/lie_algebra.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "flagcurv/error.hpp"

namespace flagcurv {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::parameter: return "parameter error";
    case ErrorCode::structure: return "structural error";
    case ErrorCode::decomposition: return "decomposition error";
    case ErrorCode::convexity: return "convexity error";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::precondition: return "precondition error";
    case ErrorCode::numerical: return "numerical failure";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

const char* to_string(Family family) {
  switch (family) {
    case Family::su: return "su";
    case Family::so: return "so";
    case Family::sp: return "sp";
    case Family::abelian: return "abelian";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  if (name == "su") return Family::su;
  if (name == "so") return Family::so;
  if (name == "sp") return Family::sp;
  if (name == "abelian" || name == "R" || name == "u1") return Family::abelian;
  throw ParameterError("unsupported algebra family '" + name + "' (expected su, so, sp or abelian)");
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(s));
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

double default_scale(Family family) { return family == Family::su || family == Family::abelian ? 1.0 : 0.5; }

int classical_dim(Family family, int n) {
  switch (family) {
    case Family::su: return n * n - 1;
    case Family::so: return n * (n - 1) / 2;
    case Family::sp: return n * (2 * n + 1);
    case Family::abelian: return n;
  }
  return 0;
}

namespace {

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

QComplex mul(const QComplex& a, const QComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

using DenseQ = std::map<std::pair<int, int>, QComplex>;

void accumulate_product(DenseQ& out, const QMatrix& a, const QMatrix& b, int sign) {
  for (const auto& x : a.entries)
    for (const auto& y : b.entries) {
      if (x.col != y.row) continue;
      QComplex p = mul(x.value, y.value);
      auto& slot = out[{x.row, y.col}];
      if (sign > 0) {
        slot.re += p.re;
        slot.im += p.im;
      } else {
        slot.re -= p.re;
        slot.im -= p.im;
      }
    }
}

QMatrix commutator(const QMatrix& a, const QMatrix& b) {
  DenseQ acc;
  accumulate_product(acc, a, b, +1);
  accumulate_product(acc, b, a, -1);
  QMatrix out;
  out.size = a.size;
  for (const auto& [key, v] : acc)
    if (!is_zero(v.re) || !is_zero(v.im)) out.entries.push_back({key.first, key.second, v});
  return out;
}

// -Re tr(a b) for sparse a and b.
Rational neg_re_trace(const QMatrix& a, const QMatrix& b) {
  Rational s(0);
  for (const auto& x : a.entries)
    for (const auto& y : b.entries)
      if (x.col == y.row && x.row == y.col) s -= mul(x.value, y.value).re;
  return s;
}

// Exact Gauss-Jordan inverse of a dense rational matrix.
std::vector<Rational> invert(std::vector<Rational> a, int n) {
  std::vector<Rational> inv(n * n, Rational(0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (!is_zero(a[r * n + col])) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw StructureError("degenerate Gram matrix for matrix basis");
    if (pivot != col)
      for (int k = 0; k < n; ++k) {
        std::swap(a[pivot * n + k], a[col * n + k]);
        std::swap(inv[pivot * n + k], inv[col * n + k]);
      }
    Rational p = a[col * n + col];
    for (int k = 0; k < n; ++k) {
      a[col * n + k] /= p;
      inv[col * n + k] /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || is_zero(a[r * n + col])) continue;
      Rational f = a[r * n + col];
      for (int k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[col * n + k];
        inv[r * n + k] -= f * inv[col * n + k];
      }
    }
  }
  return inv;
}

QMatrix single(int size, std::initializer_list<QMatrix::Entry> entries) {
  QMatrix m;
  m.size = size;
  m.entries.assign(entries);
  return m;
}

QComplex re(long long x) { return {Rational(x), Rational(0)}; }
QComplex im(long long x) { return {Rational(0), Rational(x)}; }

struct RawBasis {
  std::vector<QMatrix> matrices;
  std::vector<std::string> labels;
  std::vector<int> cartan;  // indices of the standard Cartan basis
};

std::string idx(int i, int j) { return std::to_string(i + 1) + "," + std::to_string(j + 1); }

RawBasis su_basis(int n) {
  RawBasis b;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      b.matrices.push_back(single(n, {{i, j, re(1)}, {j, i, re(-1)}}));
      b.labels.push_back("A" + idx(i, j));
      b.matrices.push_back(single(n, {{i, j, im(1)}, {j, i, im(1)}}));
      b.labels.push_back("B" + idx(i, j));
    }
  for (int k = 0; k + 1 < n; ++k) {
    b.cartan.push_back(static_cast<int>(b.matrices.size()));
    b.matrices.push_back(single(n, {{k, k, im(1)}, {k + 1, k + 1, im(-1)}}));
    b.labels.push_back("D" + std::to_string(k + 1));
  }
  return b;
}

RawBasis so_basis(int n) {
  RawBasis b;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 && i % 2 == 0) b.cartan.push_back(static_cast<int>(b.matrices.size()));
      b.matrices.push_back(single(n, {{i, j, re(1)}, {j, i, re(-1)}}));
      b.labels.push_back("A" + idx(i, j));
    }
  return b;
}

// sp(n) inside u(2n): [[A, B], [-conj(B), conj(A)]], A in u(n), B symmetric.
RawBasis sp_basis(int n) {
  RawBasis b;
  const int N = 2 * n;
  auto embed_a = [&](std::initializer_list<QMatrix::Entry> a) {
    QMatrix m;
    m.size = N;
    for (const auto& e : a) {
      m.entries.push_back(e);
      m.entries.push_back({e.row + n, e.col + n, {e.value.re, -e.value.im}});
    }
    return m;
  };
  auto embed_b = [&](std::initializer_list<QMatrix::Entry> s) {
    QMatrix m;
    m.size = N;
    for (const auto& e : s) {
      m.entries.push_back({e.row, e.col + n, e.value});
      m.entries.push_back({e.row + n, e.col, {-e.value.re, e.value.im}});
    }
    return m;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      b.matrices.push_back(embed_a({{i, j, re(1)}, {j, i, re(-1)}}));
      b.labels.push_back("A" + idx(i, j));
      b.matrices.push_back(embed_a({{i, j, im(1)}, {j, i, im(1)}}));
      b.labels.push_back("B" + idx(i, j));
    }
  for (int k = 0; k < n; ++k) {
    b.cartan.push_back(static_cast<int>(b.matrices.size()));
    b.matrices.push_back(embed_a({{k, k, im(1)}}));
    b.labels.push_back("H" + std::to_string(k + 1));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i == j) {
        b.matrices.push_back(embed_b({{i, i, re(1)}}));
        b.labels.push_back("S" + idx(i, j));
        b.matrices.push_back(embed_b({{i, i, im(1)}}));
        b.labels.push_back("T" + idx(i, j));
      } else {
        b.matrices.push_back(embed_b({{i, j, re(1)}, {j, i, re(1)}}));
        b.labels.push_back("S" + idx(i, j));
        b.matrices.push_back(embed_b({{i, j, im(1)}, {j, i, im(1)}}));
        b.labels.push_back("T" + idx(i, j));
      }
    }
  return b;
}

}  // namespace

LieAlgebra build_classical(Family family, int n, double scale) {
  if (scale == 0.0) scale = default_scale(family);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("scale must be finite and positive");
  RawBasis raw;
  switch (family) {
    case Family::su:
      if (n < 2) throw ParameterError("su(n) requires n >= 2");
      raw = su_basis(n);
      break;
    case Family::so:
      if (n < 3) throw ParameterError("so(n) requires n >= 3");
      raw = so_basis(n);
      break;
    case Family::sp:
      if (n < 1) throw ParameterError("sp(n) requires n >= 1");
      raw = sp_basis(n);
      break;
    case Family::abelian:
      return build_abelian(n, scale);
  }
  const int d = static_cast<int>(raw.matrices.size());
  LieAlgebra L;
  L.dim_ = d;
  L.labels_ = raw.labels;
  L.factors_.push_back({family, n, scale, 0, d});
  L.realization_ = raw.matrices;

  std::vector<Rational> gram(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) gram[a * d + b] = neg_re_trace(raw.matrices[a], raw.matrices[b]);
  std::vector<Rational> ginv = invert(gram, d);
  L.factor_gram_inverse_.push_back(ginv);
  L.exact_form_ = gram;

  L.metric_.resize(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) L.metric_(a, b) = scale * to_double(gram[a * d + b]);

  std::vector<std::vector<SparseTerm>> exact(d * d);
  L.constants_.assign(static_cast<std::size_t>(d) * d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      if (j < i) {
        for (const auto& t : exact[j * d + i]) exact[i * d + j].push_back({t.index, -t.value});
        continue;
      }
      QMatrix z = commutator(raw.matrices[i], raw.matrices[j]);
      if (z.entries.empty()) continue;
      std::vector<Rational> t(d, Rational(0));
      for (int a = 0; a < d; ++a) t[a] = neg_re_trace(raw.matrices[a], z);
      for (int k = 0; k < d; ++k) {
        Rational c(0);
        for (int a = 0; a < d; ++a)
          if (!is_zero(t[a])) c += ginv[k * d + a] * t[a];
        if (!is_zero(c)) exact[i * d + j].push_back({k, c});
      }
    }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (const auto& t : exact[i * d + j])
        L.constants_[(static_cast<std::size_t>(i) * d + j) * d + t.index] = to_double(t.value);
  L.exact_ = std::move(exact);
  return L;
}

LieAlgebra build_abelian(int n, double scale) {
  if (n < 1) throw ParameterError("abelian algebra requires n >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("scale must be positive");
  LieAlgebra L;
  L.dim_ = n;
  for (int i = 0; i < n; ++i) L.labels_.push_back("Z" + std::to_string(i + 1));
  L.factors_.push_back({Family::abelian, n, scale, 0, n});
  L.constants_.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  L.exact_ = std::vector<std::vector<SparseTerm>>(n * n);
  L.exact_form_.assign(n * n, Rational(0));
  for (int i = 0; i < n; ++i) L.exact_form_[i * n + i] = 1;
  L.metric_ = scale * Eigen::MatrixXd::Identity(n, n);
  L.realization_.assign(n, QMatrix{});
  std::vector<Rational> ginv(n * n, Rational(0));
  for (int i = 0; i < n; ++i) ginv[i * n + i] = 1;
  L.factor_gram_inverse_.push_back(ginv);
  return L;
}

LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts) {
  if (parts.empty()) throw ParameterError("direct_sum requires at least one summand");
  LieAlgebra L;
  int d = 0;
  for (const auto& p : parts) d += p.dim_;
  L.dim_ = d;
  L.constants_.assign(static_cast<std::size_t>(d) * d * d, 0.0);
  L.metric_ = Eigen::MatrixXd::Zero(d, d);
  L.exact_form_.assign(d * d, Rational(0));
  bool all_exact = true;
  for (const auto& p : parts) all_exact = all_exact && p.has_exact();
  std::vector<std::vector<SparseTerm>> exact(all_exact ? d * d : 0);
  int offset = 0;
  int factor_no = 0;
  for (const auto& p : parts) {
    for (const auto& f : p.factors_) {
      FactorInfo g = f;
      g.offset += offset;
      L.factors_.push_back(g);
      ++factor_no;
    }
    for (const auto& gi : p.factor_gram_inverse_) L.factor_gram_inverse_.push_back(gi);
    for (int i = 0; i < p.dim_; ++i) {
      L.labels_.push_back(parts.size() > 1 ? "f" + std::to_string(factor_no) + ":" + p.labels_[i]
                                           : p.labels_[i]);
      L.realization_.push_back(p.realization_[i]);
    }
    const int pd = p.dim_;
    L.metric_.block(offset, offset, pd, pd) = p.metric_;
    for (int i = 0; i < pd; ++i)
      for (int j = 0; j < pd; ++j) {
        L.exact_form_[(offset + i) * d + offset + j] = p.exact_form_[i * pd + j];
        for (int k = 0; k < pd; ++k)
          L.constants_[(static_cast<std::size_t>(offset + i) * d + offset + j) * d + offset + k] =
              p.constant(i, j, k);
        if (all_exact)
          for (const auto& t : p.exact_bracket(i, j))
            exact[(offset + i) * d + offset + j].push_back({t.index + offset, t.value});
      }
    offset += pd;
  }
  // Multi-factor labels were numbered per part; renumber by final factor.
  if (parts.size() > 1) {
    for (std::size_t f = 0; f < L.factors_.size(); ++f) {
      const auto& fi = L.factors_[f];
      for (int i = fi.offset; i < fi.offset + fi.dim; ++i) {
        auto colon = L.labels_[i].find(':');
        std::string base = colon == std::string::npos ? L.labels_[i] : L.labels_[i].substr(colon + 1);
        L.labels_[i] = "f" + std::to_string(f + 1) + ":" + base;
      }
    }
  }
  if (all_exact) L.exact_ = std::move(exact);
  return L;
}

Eigen::VectorXd LieAlgebra::bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw ParameterError("bracket: vector length does not match algebra dimension");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < dim_; ++j) {
      double xy = x[i] * y[j];
      if (xy == 0.0) continue;
      const double* c = &constants_[(static_cast<std::size_t>(i) * dim_ + j) * dim_];
      for (int k = 0; k < dim_; ++k) z[k] += c[k] * xy;
    }
  }
  return z;
}

Eigen::MatrixXd LieAlgebra::ad(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ParameterError("ad: vector length does not match algebra dimension");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) a(k, j) += x[i] * constant(i, j, k);
  }
  return a;
}

double LieAlgebra::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw ParameterError("inner: vector length does not match algebra dimension");
  return x.dot(metric_ * y);
}

double LieAlgebra::norm(const Eigen::VectorXd& x) const { return std::sqrt(inner(x, x)); }

std::vector<Rational> LieAlgebra::exact_coordinates(int factor, const QMatrix& x) const {
  if (factor < 0 || factor >= static_cast<int>(factors_.size()))
    throw ParameterError("coordinates: factor index out of range");
  const auto& f = factors_[factor];
  if (f.family == Family::abelian) throw ParameterError("abelian factors have no matrix realization");
  const auto& ginv = factor_gram_inverse_[factor];
  std::vector<Rational> t(f.dim);
  for (int a = 0; a < f.dim; ++a) t[a] = neg_re_trace(realization_[f.offset + a], x);
  std::vector<Rational> out(dim_, Rational(0));
  for (int k = 0; k < f.dim; ++k) {
    Rational c(0);
    for (int a = 0; a < f.dim; ++a)
      if (!is_zero(t[a])) c += ginv[k * f.dim + a] * t[a];
    out[f.offset + k] = c;
  }
  // Reject matrices outside the span.
  std::vector<Rational> recon_check(0);
  QMatrix r;
  r.size = x.size;
  std::map<std::pair<int, int>, QComplex> acc;
  for (int k = 0; k < f.dim; ++k) {
    Rational c = out[f.offset + k];
    if (is_zero(c)) continue;
    for (const auto& e : realization_[f.offset + k].entries) {
      auto& s = acc[{e.row, e.col}];
      s.re += c * e.value.re;
      s.im += c * e.value.im;
    }
  }
  for (const auto& e : x.entries) {
    auto& s = acc[{e.row, e.col}];
    s.re -= e.value.re;
    s.im -= e.value.im;
  }
  for (const auto& [key, v] : acc)
    if (!is_zero(v.re) || !is_zero(v.im)) throw StructureError("matrix does not lie in the algebra");
  return out;
}

Eigen::VectorXd LieAlgebra::coordinates(int factor, const QMatrix& x) const {
  auto q = exact_coordinates(factor, x);
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = to_double(q[i]);
  return v;
}

std::vector<Eigen::VectorXd> LieAlgebra::standard_cartan() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& f : factors_) {
    auto push = [&](int local) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
      v[f.offset + local] = 1.0;
      out.push_back(v);
    };
    switch (f.family) {
      case Family::su:
        for (int k = 0; k + 1 < f.n; ++k) push(f.n * (f.n - 1) + k);
        break;
      case Family::so: {
        int idx = 0;
        for (int i = 0; i < f.n; ++i)
          for (int j = i + 1; j < f.n; ++j, ++idx)
            if (j == i + 1 && i % 2 == 0) push(idx);
        break;
      }
      case Family::sp:
        for (int k = 0; k < f.n; ++k) push(f.n * (f.n - 1) + k);
        break;
      case Family::abelian:
        for (int k = 0; k < f.n; ++k) push(k);
        break;
    }
  }
  return out;
}

bool AlgebraChecks::ok(double tol) const {
  auto good = [&](const CheckReport& r) { return r.exact_ok && r.max_violation <= tol; };
  return good(antisymmetry) && good(jacobi) && good(ad_invariance);
}

AlgebraChecks LieAlgebra::verify() const {
  AlgebraChecks out;
  const int d = dim_;
  // Floating view.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        out.antisymmetry.max_violation =
            std::max(out.antisymmetry.max_violation, std::abs(constant(i, j, k) + constant(j, i, k)));
  std::vector<std::vector<std::pair<int, double>>> sparse(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        if (constant(i, j, k) != 0.0) sparse[i * d + j].push_back({k, constant(i, j, k)});
  std::vector<double> jac(d, 0.0);
  auto add_nested = [&](int a, int b, int c) {
    for (const auto& [l, x] : sparse[a * d + b])
      for (const auto& [m, y] : sparse[l * d + c]) jac[m] += x * y;
  };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        std::fill(jac.begin(), jac.end(), 0.0);
        add_nested(i, j, k);
        add_nested(j, k, i);
        add_nested(k, i, j);
        for (double v : jac) out.jacobi.max_violation = std::max(out.jacobi.max_violation, std::abs(v));
      }
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd a = ad(Eigen::VectorXd::Unit(d, i));
    // <[x,y],z> + <y,[x,z]> = (a^T M + M a)_{yz}
    Eigen::MatrixXd s = a.transpose() * metric_ + metric_ * a;
    out.ad_invariance.max_violation = std::max(out.ad_invariance.max_violation, s.cwiseAbs().maxCoeff());
  }
  if (!exact_) return out;

  // Exact view.
  out.antisymmetry.exact = out.jacobi.exact = out.ad_invariance.exact = true;
  const auto& ex = *exact_;
  auto coeff = [&](int i, int j, int k) {
    for (const auto& t : ex[i * d + j])
      if (t.index == k) return t.value;
    return Rational(0);
  };
  for (int i = 0; i < d && out.antisymmetry.exact_ok; ++i)
    for (int j = 0; j < d; ++j)
      for (const auto& t : ex[i * d + j])
        if (coeff(j, i, t.index) != -t.value) out.antisymmetry.exact_ok = false;

  std::vector<Rational> acc(d, Rational(0));
  std::vector<int> touched;
  auto add_double = [&](int a, int b, int c) {
    for (const auto& t : ex[a * d + b])
      for (const auto& u : ex[t.index * d + c]) {
        if (is_zero(acc[u.index])) touched.push_back(u.index);
        acc[u.index] += t.value * u.value;
      }
  };
  for (int i = 0; i < d && out.jacobi.exact_ok; ++i)
    for (int j = i + 1; j < d && out.jacobi.exact_ok; ++j)
      for (int k = j + 1; k < d; ++k) {
        add_double(i, j, k);
        add_double(j, k, i);
        add_double(k, i, j);
        for (int t : touched) {
          if (!is_zero(acc[t])) out.jacobi.exact_ok = false;
          acc[t] = 0;
        }
        touched.clear();
        if (!out.jacobi.exact_ok) break;
      }

  for (int i = 0; i < d && out.ad_invariance.exact_ok; ++i)
    for (int j = 0; j < d && out.ad_invariance.exact_ok; ++j)
      for (int k = 0; k < d; ++k) {
        Rational s(0);
        for (const auto& t : ex[i * d + j]) s += t.value * exact_form_[t.index * d + k];
        for (const auto& t : ex[i * d + k]) s += t.value * exact_form_[j * d + t.index];
        if (!is_zero(s)) {
          out.ad_invariance.exact_ok = false;
          break;
        }
      }
  return out;
}

}  // namespace flagcurv
