#include "flagcurv/norms.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "flagcurv/error.hpp"
#include "flagcurv/random.hpp"

namespace flagcurv {

using std::sqrt;
using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

namespace {

Vec<double> to_vec(const Eigen::VectorXd& x) { return Vec<double>(x.data(), x.data() + x.size()); }

template <class S>
S quad(const Eigen::MatrixXd& A, const Vec<S>& y) {
  const int n = static_cast<int>(y.size());
  S s(0.0);
  for (int i = 0; i < n; ++i) {
    S row(0.0);
    for (int j = 0; j < n; ++j) row += A(i, j) * y[j];
    s += y[i] * row;
  }
  return s;
}

template <class S>
Vec<S> matvec_d(const Eigen::MatrixXd& A, const Vec<S>& y) {
  const int n = static_cast<int>(y.size());
  Vec<S> out(n, S(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += A(i, j) * y[j];
  return out;
}

template <class S>
S dot_d(const Eigen::VectorXd& b, const Vec<S>& y) {
  S s(0.0);
  for (int i = 0; i < b.size(); ++i) s += b[i] * y[i];
  return s;
}

template <class S>
S randers_value(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Vec<S>& y) {
  S q = quad(A, y);
  if (value_of(q) <= 0.0) return S(0.0);
  return sqrt(q) + dot_d(b, y);
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients of the C^order smoothstep polynomial, lowest degree first.
std::vector<double> smoothstep_coefficients(int order) {
  std::vector<double> c(2 * order + 2, 0.0);
  for (int j = 0; j <= order; ++j)
    c[order + 1 + j] = binom(order + j, j) * binom(2 * order + 1, order - j) * ((j % 2) ? -1.0 : 1.0);
  return c;
}

template <class S>
S polyval(const std::vector<double>& c, const S& t) {
  S r(0.0);
  for (std::size_t i = c.size(); i-- > 0;) r = r * t + c[i];
  return r;
}

}  // namespace

double smoothstep(double t, int order) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return polyval(smoothstep_coefficients(order), t);
}

void BumpFunction::validate() const {
  if (axis.size() == 0 || std::abs(axis.norm() - 1.0) > 1e-10) throw ParameterError("bump axis must be a unit vector");
  if (!(theta1 > 0.0 && theta1 < theta2 && theta2 < M_PI))
    throw ParameterError("bump cone angles must satisfy 0 < theta1 < theta2 < pi");
  if (order < 1 || order > 12) throw ParameterError("bump order must lie in [1, 12]");
}

template <class S>
S BumpFunction::progress(const Vec<S>& y) const {
  S yy(0.0);
  for (const auto& x : y) yy += x * x;
  S c = dot_d(axis, y) / sqrt(yy);
  const double c1 = std::cos(theta1), c2 = std::cos(theta2);
  return (c1 - c) / (c1 - c2);
}

template <class S>
S BumpFunction::mu(const Vec<S>& y) const {
  S t = progress(y);
  if (value_of(t) <= 0.0) return S(0.0);
  if (value_of(t) >= 1.0) return S(1.0);
  return polyval(smoothstep_coefficients(order), t);
}

double BumpFunction::mu(const Eigen::VectorXd& y) const { return mu<double>(to_vec(y)); }

MinkowskiNorm MinkowskiNorm::inner_product(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw ParameterError("inner product matrix must be square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
    throw ParameterError("inner product matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw ConvexityError("inner product matrix is not positive definite");
  auto n = std::make_shared<NormNode>();
  n->kind = Kind::inner_product;
  n->dim = static_cast<int>(A.rows());
  n->A = 0.5 * (A + A.transpose());
  n->b = Eigen::VectorXd::Zero(n->dim);
  return MinkowskiNorm(n);
}

MinkowskiNorm MinkowskiNorm::randers(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  MinkowskiNorm ip = inner_product(A);
  if (b.size() != A.rows()) throw ParameterError("Randers covector has wrong length");
  auto n = std::make_shared<NormNode>(ip.node());
  n->kind = Kind::randers;
  n->b = b;
  return MinkowskiNorm(n);
}

MinkowskiNorm::Kind MinkowskiNorm::kind() const { return node_->kind; }
int MinkowskiNorm::dim() const { return node_ ? node_->dim : 0; }

bool MinkowskiNorm::reversible() const {
  switch (kind()) {
    case Kind::inner_product: return true;
    case Kind::randers: return node_->b.norm() == 0.0;
    case Kind::navigated: return node_->v.norm() == 0.0 && node_->base.reversible();
    case Kind::glued: return false;
  }
  return false;
}

bool MinkowskiNorm::riemannian() const {
  switch (kind()) {
    case Kind::inner_product: return true;
    case Kind::randers: return node_->b.norm() == 0.0;
    case Kind::navigated: return node_->v.norm() == 0.0 && node_->base.riemannian();
    case Kind::glued: return false;
  }
  return false;
}

const Eigen::MatrixXd& MinkowskiNorm::matrix() const {
  if (!(kind() == Kind::inner_product || kind() == Kind::randers || has_randers_form()))
    throw ParameterError("norm has no matrix form");
  return node_->A;
}

const Eigen::VectorXd& MinkowskiNorm::covector() const {
  if (!(kind() == Kind::randers || has_randers_form() || kind() == Kind::inner_product))
    throw ParameterError("norm has no Randers covector");
  return node_->b;
}

bool MinkowskiNorm::has_randers_form() const { return kind() == Kind::navigated && node_->has_closed_form; }

const MinkowskiNorm& MinkowskiNorm::base() const {
  if (kind() != Kind::navigated) throw ParameterError("norm is not navigated");
  return node_->base;
}
const Eigen::VectorXd& MinkowskiNorm::wind() const {
  if (kind() != Kind::navigated) throw ParameterError("norm is not navigated");
  return node_->v;
}
const MinkowskiNorm& MinkowskiNorm::first() const {
  if (kind() != Kind::glued) throw ParameterError("norm is not glued");
  return node_->first;
}
const MinkowskiNorm& MinkowskiNorm::second() const {
  if (kind() != Kind::glued) throw ParameterError("norm is not glued");
  return node_->second;
}
const BumpFunction& MinkowskiNorm::bump() const {
  if (kind() != Kind::glued) throw ParameterError("norm is not glued");
  return node_->bump;
}

bool has_analytic_derivatives(const MinkowskiNorm& F) {
  return F.kind() == MinkowskiNorm::Kind::inner_product || F.kind() == MinkowskiNorm::Kind::randers ||
         F.has_randers_form();
}

namespace {

// F(y - t v) at a double point, with its t-derivative.
std::pair<double, double> nav_residual(const MinkowskiNorm& base, const Eigen::VectorXd& v, const Vec<double>& y,
                                       double t) {
  const std::size_t n = y.size();
  Vec<D1> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = D1(y[i] - t * v[i], -v[i]);
  D1 f = evaluate(base, z);
  return {f.v - t, f.d - 1.0};
}

double nav_solve(const MinkowskiNorm& base, const Eigen::VectorXd& v, const Vec<double>& y) {
  double f0 = evaluate(base, y);
  if (f0 == 0.0) return 0.0;
  Vec<double> mv(v.size());
  for (int i = 0; i < v.size(); ++i) mv[i] = -v[i];
  double fmv = evaluate(base, mv);
  double lo = 0.0, hi = f0 / std::max(1.0 - fmv, 1e-300);
  double t = f0 / (1.0 + evaluate(base, to_vec(v)));
  for (int it = 0; it < 200; ++it) {
    auto [g, gp] = nav_residual(base, v, y, t);
    if (g > 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
    if (std::abs(g) <= 1e-15 * std::max(1.0, f0)) return t;
    double next = (gp < 0.0) ? t - g / gp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-12 * std::max(1.0, t) * 1e-3) return next;
    t = next;
    if (hi - lo <= 1e-15 * std::max(1.0, t)) return t;
  }
  auto [g, gp] = nav_residual(base, v, y, t);
  (void)gp;
  if (std::abs(g) > 1e-12 * std::max(1.0, f0)) throw NumericalError("navigation solve did not converge");
  return t;
}

}  // namespace

double navigation_solve(const MinkowskiNorm& base, const Eigen::VectorXd& v, const Eigen::VectorXd& ytilde) {
  if (ytilde.size() != base.dim() || v.size() != base.dim()) throw ParameterError("navigation_solve: dimension mismatch");
  return nav_solve(base, v, to_vec(ytilde));
}

template <class S>
S evaluate(const MinkowskiNorm& F, const Vec<S>& y) {
  const NormNode& n = F.node();
  switch (n.kind) {
    case MinkowskiNorm::Kind::inner_product: {
      S q = quad(n.A, y);
      if (value_of(q) <= 0.0) return S(0.0);
      return sqrt(q);
    }
    case MinkowskiNorm::Kind::randers:
      return randers_value(n.A, n.b, y);
    case MinkowskiNorm::Kind::navigated: {
      if (n.has_closed_form) return randers_value(n.A, n.b, y);
      Vec<double> y0(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) y0[i] = value_of(y[i]);
      double t0 = nav_solve(n.base, n.v, y0);
      if constexpr (std::is_same_v<S, double>) {
        return t0;
      } else {
        if (t0 == 0.0) return S(0.0);
        double gp = nav_residual(n.base, n.v, y0, t0).second;
        S t(t0);
        Vec<S> z(y.size());
        for (int it = 0; it < 6; ++it) {
          for (std::size_t i = 0; i < y.size(); ++i) z[i] = y[i] - t * n.v[i];
          t = t - (evaluate(n.base, z) - t) / gp;
        }
        return t;
      }
    }
    case MinkowskiNorm::Kind::glued: {
      S yy(0.0);
      for (const auto& x : y) yy += x * x;
      if (value_of(yy) == 0.0) return S(0.0);
      S t = n.bump.progress(y);
      if (value_of(t) <= 0.0) return evaluate(n.second, y);
      if (value_of(t) >= 1.0) return evaluate(n.first, y);
      S mu = polyval(smoothstep_coefficients(n.bump.order), t);
      return mu * evaluate(n.first, y) + (1.0 - mu) * evaluate(n.second, y);
    }
  }
  throw Error(ErrorCode::internal, "unknown norm kind");
}

double evaluate(const MinkowskiNorm& F, const Eigen::VectorXd& y) {
  if (!F.valid()) throw ParameterError("norm is empty");
  if (y.size() != F.dim()) throw ParameterError("evaluate: vector length does not match norm dimension");
  return evaluate<double>(F, to_vec(y));
}

double evaluate_implicit(const MinkowskiNorm& F, const Eigen::VectorXd& y) {
  if (F.kind() != MinkowskiNorm::Kind::navigated) return evaluate(F, y);
  return nav_solve(F.base(), F.wind(), to_vec(y));
}

namespace {

template <class T>
Vec<Dual<T>> lift(const Vec<T>& base, const Vec<T>& dir) {
  Vec<Dual<T>> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = Dual<T>(base[i], dir[i]);
  return out;
}

template <class T, class S>
Vec<T> embed_vec(const Vec<S>& x) {
  Vec<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = embed<T>(x[i]);
  return out;
}

template <class S>
Vec<S> unit_vec(std::size_t n, std::size_t i) {
  Vec<S> e(n, S(0.0));
  e[i] = S(1.0);
  return e;
}

// Randers Hessian g = (F/alpha) P + q q^T with P = A - l l^T, l = A y / alpha, q = l + b.
template <class S>
Mat<S> randers_hessian(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Vec<S>& y) {
  const std::size_t n = y.size();
  Vec<S> Ay = matvec_d(A, y);
  S alpha = sqrt(dot(y, Ay));
  S F = alpha + dot_d(b, y);
  S r = F / alpha;
  Vec<S> l(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = Ay[i] / alpha;
    q[i] = l[i] + b[i];
  }
  Mat<S> g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = r * (A(i, j) - l[i] * l[j]) + q[i] * q[j];
  return g;
}

// C(., ., w) = 1/2 d_w g for a Randers norm.
template <class S>
Mat<S> randers_cartan(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Vec<S>& y, const Vec<S>& w) {
  const std::size_t n = y.size();
  Vec<S> Ay = matvec_d(A, y);
  S alpha = sqrt(dot(y, Ay));
  S F = alpha + dot_d(b, y);
  Vec<S> l(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = Ay[i] / alpha;
    q[i] = l[i] + b[i];
  }
  S lw = dot(l, w), qw = dot(q, w);
  Vec<S> Aw = matvec_d(A, w);
  Vec<S> Pw(n);
  for (std::size_t i = 0; i < n; ++i) Pw[i] = Aw[i] - l[i] * lw;
  S dr = qw / alpha - F * lw / (alpha * alpha);
  S c1 = F / (alpha * alpha);
  Mat<S> c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      S dg = dr * (A(i, j) - l[i] * l[j]) - c1 * (Pw[i] * l[j] + l[i] * Pw[j]) + (Pw[i] * q[j] + q[i] * Pw[j]) / alpha;
      c(i, j) = 0.5 * dg;
    }
  return c;
}

// Outside the transition band a glued norm is one of its pieces on an open
// cone, so derivatives come from that piece's own code path.
template <class S>
const MinkowskiNorm* active_piece(const NormNode& nd, const Vec<S>& y) {
  if (nd.kind != MinkowskiNorm::Kind::glued) return nullptr;
  double t = value_of(nd.bump.progress(y));
  if (t >= 1.0) return &nd.first;
  if (t <= 0.0) return &nd.second;
  return nullptr;
}

}  // namespace

template <class S>
Mat<S> hessian_t(const MinkowskiNorm& F, const Vec<S>& y) {
  const NormNode& nd = F.node();
  const std::size_t n = y.size();
  if (nd.kind == MinkowskiNorm::Kind::inner_product) {
    Mat<S> g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = S(nd.A(i, j));
    return g;
  }
  if (nd.kind == MinkowskiNorm::Kind::randers || F.has_randers_form()) return randers_hessian(nd.A, nd.b, y);
  if (const MinkowskiNorm* piece = active_piece(nd, y)) return hessian_t<S>(*piece, y);
  Mat<S> g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec<Dual<S>> yi = lift(y, unit_vec<S>(n, i));
    for (std::size_t j = i; j < n; ++j) {
      Vec<Dual<S>> ej = unit_vec<Dual<S>>(n, j);
      Vec<Dual<Dual<S>>> Y = lift(yi, ej);
      Dual<Dual<S>> f = evaluate(F, Y);
      Dual<Dual<S>> f2 = f * f;
      g(i, j) = 0.5 * f2.d.d;
      g(j, i) = g(i, j);
    }
  }
  return g;
}

template <class S>
Mat<S> cartan_matrix_t(const MinkowskiNorm& F, const Vec<S>& y, const Vec<S>& z) {
  const NormNode& nd = F.node();
  const std::size_t n = y.size();
  if (nd.kind == MinkowskiNorm::Kind::inner_product) return Mat<S>(n, n);
  if (nd.kind == MinkowskiNorm::Kind::randers || F.has_randers_form()) return randers_cartan(nd.A, nd.b, y, z);
  if (const MinkowskiNorm* piece = active_piece(nd, y)) return cartan_matrix_t<S>(*piece, y, z);
  Mat<S> c(n, n);
  // Innermost level carries z so it is shared across (i, j).
  Vec<Dual<S>> yz = lift(y, z);
  for (std::size_t i = 0; i < n; ++i) {
    Vec<Dual<Dual<S>>> yi = lift(yz, unit_vec<Dual<S>>(n, i));
    for (std::size_t j = i; j < n; ++j) {
      Vec<Dual<Dual<Dual<S>>>> Y = lift(yi, unit_vec<Dual<Dual<S>>>(n, j));
      auto f = evaluate(F, Y);
      auto f2 = f * f;
      c(i, j) = 0.25 * f2.d.d.d;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

namespace {

Eigen::MatrixXd to_eigen(const Mat<double>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

void require_nonzero(const MinkowskiNorm& F, const Eigen::VectorXd& y) {
  if (!F.valid()) throw ParameterError("norm is empty");
  if (y.size() != F.dim()) throw ParameterError("vector length does not match norm dimension");
  if (y.norm() == 0.0 || !y.allFinite()) throw DomainError("derivatives of a Minkowski norm require y != 0");
}

}  // namespace

Eigen::MatrixXd hessian(const MinkowskiNorm& F, const Eigen::VectorXd& y) {
  require_nonzero(F, y);
  Eigen::MatrixXd g = to_eigen(hessian_t<double>(F, to_vec(y)));
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (!g.allFinite() || llt.info() != Eigen::Success) throw ConvexityError("g_y is not positive definite");
  return g;
}

double inner(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  if (u.size() != F.dim() || w.size() != F.dim()) throw ParameterError("inner: dimension mismatch");
  return u.dot(hessian(F, y) * w);
}

Eigen::MatrixXd cartan_matrix(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  require_nonzero(F, y);
  if (z.size() != F.dim()) throw ParameterError("cartan: dimension mismatch");
  return to_eigen(cartan_matrix_t<double>(F, to_vec(y), to_vec(z)));
}

double cartan_tensor(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  if (u.size() != F.dim() || v.size() != F.dim()) throw ParameterError("cartan: dimension mismatch");
  return u.dot(cartan_matrix(F, y, w) * v);
}

Eigen::MatrixXd hessian_numeric(const MinkowskiNorm& F, const Eigen::VectorXd& y, double step) {
  require_nonzero(F, y);
  const int n = F.dim();
  if (step <= 0.0) step = F.derivative_step;
  auto f = [&](const Eigen::VectorXd& x) {
    double v = evaluate(F, x);
    return v * v;
  };
  auto stencil = [&](double h) {
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Eigen::VectorXd ei = h * Eigen::VectorXd::Unit(n, i), ej = h * Eigen::VectorXd::Unit(n, j);
        double v = (f(y + ei + ej) - f(y + ei - ej) - f(y - ei + ej) + f(y - ei - ej)) / (4.0 * h * h);
        D(i, j) = D(j, i) = v;
      }
    return D;
  };
  double h = step * y.norm();
  return 0.5 * (4.0 * stencil(0.5 * h) - stencil(h)) / 3.0;
}

double cartan_numeric(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v, const Eigen::VectorXd& w, double step) {
  require_nonzero(F, y);
  if (step <= 0.0) step = 1e-2;
  double nu = u.norm(), nv = v.norm(), nw = w.norm();
  if (nu == 0.0 || nv == 0.0 || nw == 0.0) return 0.0;
  Eigen::VectorXd a = u / nu, b = v / nv, c = w / nw;
  auto f = [&](const Eigen::VectorXd& x) {
    double val = evaluate(F, x);
    return val * val;
  };
  auto stencil = [&](double h) {
    double s = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
      double s1 = (mask & 1) ? -1.0 : 1.0, s2 = (mask & 2) ? -1.0 : 1.0, s3 = (mask & 4) ? -1.0 : 1.0;
      s += s1 * s2 * s3 * f(y + h * (s1 * a + s2 * b + s3 * c));
    }
    return s / (8.0 * h * h * h);
  };
  double h = step * y.norm();
  return 0.25 * (4.0 * stencil(0.5 * h) - stencil(h)) / 3.0 * nu * nv * nw;
}

Eigen::MatrixXd cartan_matrix_numeric(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                                      double step) {
  const int n = F.dim();
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      c(i, j) = c(j, i) = cartan_numeric(F, y, Eigen::VectorXd::Unit(n, i), Eigen::VectorXd::Unit(n, j), z, step);
  return c;
}

MinkowskiNorm navigate(const MinkowskiNorm& F, const Eigen::VectorXd& v) {
  if (!F.valid()) throw ParameterError("norm is empty");
  if (v.size() != F.dim()) throw ParameterError("navigate: wind has wrong length");
  double fv = evaluate(F, v), fmv = evaluate(F, Eigen::VectorXd(-v));
  if (!(fv < 1.0) || !(fmv < 1.0))
    throw DomainError("navigation inadmissible: F(v) = " + std::to_string(fv) + ", F(-v) = " + std::to_string(fmv) +
                      " (both must be < 1)");
  auto n = std::make_shared<NormNode>();
  n->kind = MinkowskiNorm::Kind::navigated;
  n->dim = F.dim();
  n->base = F;
  n->v = v;
  if (F.kind() == MinkowskiNorm::Kind::inner_product) {
    const Eigen::MatrixXd& A = F.matrix();
    Eigen::VectorXd Av = A * v;
    double lambda = 1.0 - v.dot(Av);
    n->A = (lambda * A + Av * Av.transpose()) / (lambda * lambda);
    n->b = -Av / lambda;
    n->has_closed_form = true;
  }
  MinkowskiNorm out(n);
  out.derivative_step = F.derivative_step;
  if (n->has_closed_form) {
    Rng rng(0x4e41u + static_cast<std::uint64_t>(F.dim()));
    for (int k = 0; k < 8; ++k) {
      Eigen::VectorXd y = rng.normal_vector(F.dim());
      double a = evaluate(out, y), b = evaluate_implicit(out, y);
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(b)))
        throw NumericalError("closed Randers form disagrees with the implicit navigation solve");
    }
  }
  return out;
}

MinkowskiNorm glue(const MinkowskiNorm& F1, const MinkowskiNorm& F2, const BumpFunction& bump) {
  if (!F1.valid() || !F2.valid()) throw ParameterError("norm is empty");
  if (F1.dim() != F2.dim()) throw ParameterError("glue: norms have different dimensions");
  if (bump.axis.size() != F1.dim()) throw ParameterError("glue: bump axis has wrong length");
  bump.validate();
  auto n = std::make_shared<NormNode>();
  n->kind = MinkowskiNorm::Kind::glued;
  n->dim = F1.dim();
  n->first = F1;
  n->second = F2;
  n->bump = bump;
  MinkowskiNorm out(n);
  out.derivative_step = F1.derivative_step;
  return out;
}

double randers_b_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  return std::sqrt(std::max(0.0, b.dot(A.ldlt().solve(b))));
}

NormReport validate_norm(const MinkowskiNorm& F, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ParameterError("validate_norm requires n_samples >= 1");
  const int n = F.dim();
  NormReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  if (F.kind() == MinkowskiNorm::Kind::randers || F.has_randers_form())
    rep.randers_b_norm = randers_b_norm(F.matrix(), F.covector());
  Rng rng(seed);
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < n_samples; ++i) dirs.push_back(rng.unit_vector(n));
  if (F.kind() == MinkowskiNorm::Kind::glued && n > 1) {
    const BumpFunction& b = F.bump();
    for (double th : {b.theta1, 0.5 * (b.theta1 + b.theta2), b.theta2})
      for (int k = 0; k < 16; ++k) {
        Eigen::VectorXd w = rng.normal_vector(n);
        w -= w.dot(b.axis) * b.axis;
        if (w.norm() == 0.0) continue;
        w /= w.norm();
        dirs.push_back(std::cos(th) * b.axis + std::sin(th) * w);
      }
  }
  for (const auto& y : dirs) {
    ++rep.n_samples;
    double f = evaluate(F, y);
    if (!(f > 0.0)) {
      ++rep.positivity_violations;
      continue;
    }
    double hv = std::abs(evaluate(F, Eigen::VectorXd(2.5 * y)) - 2.5 * f) / (2.5 * f);
    rep.max_homogeneity_violation = std::max(rep.max_homogeneity_violation, hv);
    Eigen::MatrixXd g = to_eigen(hessian_t<double>(F, to_vec(y)));
    if (!g.allFinite()) {
      ++rep.convexity_failures;
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    double m = es.eigenvalues()[0];
    if (m <= 0.0) ++rep.convexity_failures;
    if (m < rep.min_eigenvalue) {
      rep.min_eigenvalue = m;
      rep.worst_direction = y;
    }
  }
  if (!std::isfinite(rep.min_eigenvalue)) rep.min_eigenvalue = 0.0;
  return rep;
}

namespace {

nlohmann::json mat_json(const Eigen::MatrixXd& A) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < A.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < A.cols(); ++k) row.push_back(A(i, k));
    j.push_back(row);
  }
  return j;
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::MatrixXd json_mat(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ParameterError("matrix must be a non-empty array of rows");
  const int r = static_cast<int>(j.size()), c = static_cast<int>(j[0].size());
  Eigen::MatrixXd A(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(j[i].size()) != c) throw ParameterError("matrix rows have different lengths");
    for (int k = 0; k < c; ++k) A(i, k) = j[i][k].get<double>();
  }
  return A;
}

Eigen::VectorXd json_vec(const nlohmann::json& j) {
  if (!j.is_array()) throw ParameterError("vector must be an array");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

nlohmann::json to_json(const MinkowskiNorm& F) {
  nlohmann::json j;
  switch (F.kind()) {
    case MinkowskiNorm::Kind::inner_product:
      j["kind"] = "inner_product";
      j["A"] = mat_json(F.matrix());
      break;
    case MinkowskiNorm::Kind::randers:
      j["kind"] = "randers";
      j["A"] = mat_json(F.matrix());
      j["b"] = vec_json(F.covector());
      break;
    case MinkowskiNorm::Kind::navigated:
      j["kind"] = "navigated";
      j["base"] = to_json(F.base());
      j["v"] = vec_json(F.wind());
      if (F.has_randers_form()) j["randers"] = {{"A", mat_json(F.matrix())}, {"b", vec_json(F.covector())}};
      break;
    case MinkowskiNorm::Kind::glued:
      j["kind"] = "glued";
      j["first"] = to_json(F.first());
      j["second"] = to_json(F.second());
      j["bump"] = {{"axis", vec_json(F.bump().axis)},
                   {"theta1", F.bump().theta1},
                   {"theta2", F.bump().theta2},
                   {"order", F.bump().order}};
      break;
  }
  j["derivative_step"] = F.derivative_step;
  return j;
}

MinkowskiNorm norm_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    MinkowskiNorm F;
    if (kind == "inner_product") {
      F = MinkowskiNorm::inner_product(json_mat(j.at("A")));
    } else if (kind == "randers") {
      F = MinkowskiNorm::randers(json_mat(j.at("A")), json_vec(j.at("b")));
    } else if (kind == "navigated") {
      F = navigate(norm_from_json(j.at("base")), json_vec(j.at("v")));
    } else if (kind == "glued") {
      BumpFunction b;
      const auto& jb = j.at("bump");
      b.axis = json_vec(jb.at("axis"));
      b.theta1 = jb.value("theta1", 0.2);
      b.theta2 = jb.value("theta2", 0.4);
      b.order = jb.value("order", 4);
      F = glue(norm_from_json(j.at("first")), norm_from_json(j.at("second")), b);
    } else {
      throw ParameterError("unknown norm kind '" + kind + "'");
    }
    if (j.contains("derivative_step")) F.derivative_step = j["derivative_step"].get<double>();
    if (!(F.derivative_step > 0.0)) throw ParameterError("derivative_step must be positive");
    return F;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed norm specification: ") + e.what());
  }
}

void write_sphere_csv(const MinkowskiNorm& F, int n_samples, std::uint64_t seed, std::ostream& out) {
  const int n = F.dim();
  for (int i = 0; i < n; ++i) out << "y" << i << ',';
  out << "F,min_eig\n";
  Rng rng(seed);
  out.precision(17);
  for (int s = 0; s < n_samples; ++s) {
    Eigen::VectorXd y = rng.unit_vector(n);
    double m = std::nan("");
    try {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(hessian_t<double>(F, to_vec(y))),
                                                        Eigen::EigenvaluesOnly);
      m = es.eigenvalues()[0];
    } catch (const Error&) {
    }
    for (int i = 0; i < n; ++i) out << y[i] << ',';
    out << evaluate(F, y) << ',' << m << '\n';
  }
}

template double evaluate<double>(const MinkowskiNorm&, const Vec<double>&);
template D1 evaluate<D1>(const MinkowskiNorm&, const Vec<D1>&);
template D2 evaluate<D2>(const MinkowskiNorm&, const Vec<D2>&);
template D3 evaluate<D3>(const MinkowskiNorm&, const Vec<D3>&);
template D4 evaluate<D4>(const MinkowskiNorm&, const Vec<D4>&);
template Mat<double> hessian_t<double>(const MinkowskiNorm&, const Vec<double>&);
template Mat<D1> hessian_t<D1>(const MinkowskiNorm&, const Vec<D1>&);
template Mat<double> cartan_matrix_t<double>(const MinkowskiNorm&, const Vec<double>&, const Vec<double>&);
template Mat<D1> cartan_matrix_t<D1>(const MinkowskiNorm&, const Vec<D1>&, const Vec<D1>&);
template double BumpFunction::mu<double>(const Vec<double>&) const;

}  // namespace flagcurv
