#include "flagcurv/curvature.hpp"

#include <cmath>

#include "flagcurv/error.hpp"

namespace flagcurv {

namespace {

using D1 = Dual<double>;

Vec<double> to_vec(const Eigen::VectorXd& x) { return Vec<double>(x.data(), x.data() + x.size()); }

Eigen::VectorXd to_eigen(const Vec<double>& x) { return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()); }

Eigen::MatrixXd to_eigen(const Mat<double>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

Mat<double> from_eigen(const Eigen::MatrixXd& m) {
  Mat<double> out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

template <class S>
Vec<S> mat_col(const Mat<S>& m, std::size_t j) {
  Vec<S> c(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) c[i] = m(i, j);
  return c;
}

// [a,b]_m in the m frame.
template <class S, class T>
Vec<S> bracket_m(const CosetDecomposition& X, const Vec<S>& a, const Vec<T>& b) {
  const int n = X.dim_m();
  Vec<S> out(n, S(0.0));
  for (int i = 0; i < n; ++i) {
    if (value_of(a[i]) == 0.0 && !is_dual<S>::value) continue;
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < n; ++c) {
        double k = X.cm(i, j, c);
        if (k != 0.0) out[c] += k * (a[i] * b[j]);
      }
  }
  return out;
}

// The matrix W with columns [m_k, u]_m.
template <class S>
Mat<S> bracket_matrix(const CosetDecomposition& X, const Vec<S>& u) {
  const int n = X.dim_m();
  Mat<S> W(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < n; ++c) {
        double s = X.cm(k, j, c);
        if (s != 0.0) W(c, k) += s * u[j];
      }
  return W;
}

template <class S>
Mat<S> transpose_times(const Mat<S>& A, const Mat<S>& B) {  // A^T B
  Mat<S> out(A.cols(), B.cols());
  for (std::size_t i = 0; i < A.cols(); ++i)
    for (std::size_t j = 0; j < B.cols(); ++j) {
      S s(0.0);
      for (std::size_t k = 0; k < A.rows(); ++k) s += A(k, i) * B(k, j);
      out(i, j) = s;
    }
  return out;
}

template <class S>
Mat<S> times(const Mat<S>& A, const Mat<S>& B) {
  Mat<S> out(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k)
      for (std::size_t j = 0; j < B.cols(); ++j) out(i, j) += A(i, k) * B(k, j);
  return out;
}

// Norm derivatives at u; either dual-number or closed/finite-difference data.
struct DerivativeSource {
  const MinkowskiNorm& F;
  const CurvatureOptions& opt;

  template <class S>
  Mat<S> g(const Vec<S>& u) const {
    if constexpr (std::is_same_v<S, double>) {
      if (opt.mode == DerivativeMode::finite && !has_analytic_derivatives(F))
        return from_eigen(hessian_numeric(F, to_eigen(u), opt.hessian_step));
    }
    return hessian_t<S>(F, u);
  }

  template <class S>
  Mat<S> cartan(const Vec<S>& u, const Vec<S>& z) const {
    if constexpr (std::is_same_v<S, double>) {
      if (opt.mode == DerivativeMode::finite && !has_analytic_derivatives(F))
        return from_eigen(cartan_matrix_numeric(F, to_eigen(u), to_eigen(z), opt.cartan_step));
    }
    return cartan_matrix_t<S>(F, u, z);
  }
};

template <class S>
struct Connection {
  Mat<S> g, L;  // g_u and its Cholesky factor
  Vec<S> gu;
  Mat<S> W;
  Vec<S> eta;
  Mat<S> N;  // columns N(u, m_b)
};

template <class S>
Vec<S> spray(const Mat<S>& L, const Mat<S>& W, const Vec<S>& gu) {
  const std::size_t n = gu.size();
  Vec<S> r(n, S(0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c) r[a] += W(c, a) * gu[c];
  return cholesky_solve(L, r);
}

template <class S>
Connection<S> connection(const CosetDecomposition& X, const DerivativeSource& src, const Vec<S>& u, bool with_N) {
  const int n = X.dim_m();
  Connection<S> c;
  c.g = src.g(u);
  c.L = cholesky(c.g);
  c.gu = matvec(c.g, u);
  c.W = bracket_matrix(X, u);
  c.eta = spray(c.L, c.W, c.gu);
  if (!with_N) return c;
  Mat<S> gW = times(c.g, c.W);
  Mat<S> C = src.cartan(u, c.eta);
  c.N = Mat<S>(n, n);
  for (int b = 0; b < n; ++b) {
    Vec<S> s(n, S(0.0));
    for (int a = 0; a < n; ++a) {
      S t1(0.0);
      for (int k = 0; k < n; ++k) {
        double cc = X.cm(a, b, k);
        if (cc != 0.0) t1 += cc * c.gu[k];
      }
      // <[m_a,m_b]_m,u> + <[m_a,u]_m,m_b> + <[m_b,u]_m,m_a>, halved, minus C(m_b,m_a,eta).
      s[a] = 0.5 * (t1 + gW(b, a) + gW(a, b)) - C(b, a);
    }
    Vec<S> col = cholesky_solve(c.L, s);
    for (int a = 0; a < n; ++a) c.N(a, b) = col[a];
  }
  return c;
}

void check_vector(const CosetDecomposition& X, const MinkowskiNorm& F, const Eigen::VectorXd& u) {
  if (!F.valid()) throw ParameterError("norm is empty");
  if (F.dim() != X.dim_m()) throw ParameterError("norm dimension does not match dim m");
  if (u.size() != X.dim_m()) throw ParameterError("vector length does not match dim m");
  if (!u.allFinite()) throw ParameterError("vector has non-finite entries");
  if (u.norm() == 0.0) throw DomainError("pole must be nonzero");
}

struct Quadratic {
  double value = 0.0;
  double eta_norm = 0.0;
  bool eta_skipped = false;
  Mat<double> g;
};

Quadratic quadratic(const CosetDecomposition& X, const MinkowskiNorm& F, const Eigen::VectorXd& ue,
                    const Eigen::VectorXd& ve, const CurvatureOptions& opt) {
  const int n = X.dim_m();
  DerivativeSource src{F, opt};
  Vec<double> u = to_vec(ue), v = to_vec(ve);
  Connection<double> c0 = connection(X, src, u, opt.mode == DerivativeMode::finite);
  Quadratic q;
  double unorm = ue.norm();
  double enorm = to_eigen(c0.eta).norm();
  q.eta_norm = enorm;
  q.eta_skipped = enorm <= opt.eta_zero_tol * unorm;
  Mat<double> N(n, n), dN(n, n);
  if (opt.mode == DerivativeMode::automatic) {
    if (q.eta_skipped) {
      N = connection(X, src, u, true).N;
    } else {
      Vec<D1> ud(n);
      for (int i = 0; i < n; ++i) ud[i] = D1(u[i], c0.eta[i]);
      Connection<D1> cd = connection(X, src, ud, true);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          N(i, j) = cd.N(i, j).v;
          dN(i, j) = cd.N(i, j).d;
        }
    }
  } else {
    N = c0.N;
    if (!q.eta_skipped) {
      double s = opt.eta_step * unorm / enorm;
      Vec<double> up(n), um(n);
      for (int i = 0; i < n; ++i) {
        up[i] = u[i] + s * c0.eta[i];
        um[i] = u[i] - s * c0.eta[i];
      }
      Mat<double> Np = connection(X, src, up, true).N, Nm = connection(X, src, um, true).N;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dN(i, j) = (Np(i, j) - Nm(i, j)) / (2.0 * s);
    }
  }
  const Mat<double>& g = c0.g;
  Vec<double> Nv = matvec(N, v);
  Vec<double> uv = bracket_m(X, u, v);
  Vec<double> NNv = matvec(N, Nv);
  Vec<double> Nuv = matvec(N, uv);
  Vec<double> uNv = bracket_m(X, u, Nv);
  Vec<double> dNv = matvec(dN, v);
  Vec<double> Rv(n);
  for (int i = 0; i < n; ++i) Rv[i] = dNv[i] - NNv[i] + Nuv[i] - uNv[i];
  // [[v,u]_h, v] through the h frame.
  const int nh = X.dim_h();
  Vec<double> vu_h(nh, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (v[i] != 0.0 && u[j] != 0.0)
        for (int k = 0; k < nh; ++k) vu_h[k] += X.ch(i, j, k) * v[i] * u[j];
  Vec<double> hv(n, 0.0);
  for (int k = 0; k < nh; ++k)
    if (vu_h[k] != 0.0)
      for (int a = 0; a < n; ++a)
        for (int cidx = 0; cidx < n; ++cidx) hv[cidx] += X.chm(k, a, cidx) * vu_h[k] * v[a];
  q.value = dot(matvec(g, hv), u) + dot(matvec(g, Rv), v);
  q.g = g;
  return q;
}

}  // namespace

void validate_flag(const CosetDecomposition& space, const Flag& flag) {
  if (flag.pole.size() != space.dim_m() || flag.wing.size() != space.dim_m())
    throw ParameterError("flag vectors must have length dim m");
  if (!flag.pole.allFinite() || !flag.wing.allFinite()) throw ParameterError("flag has non-finite entries");
  double gram = flag.pole.squaredNorm() * flag.wing.squaredNorm() - std::pow(flag.pole.dot(flag.wing), 2);
  if (!(gram > 1e-12)) throw DomainError("degenerate flag: pole and wing are linearly dependent");
}

Eigen::VectorXd spray_eta(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                          const CurvatureOptions& opt) {
  check_vector(space, F, u);
  DerivativeSource src{F, opt};
  return to_eigen(connection(space, src, to_vec(u), false).eta);
}

Eigen::VectorXd connection_N(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& w, const CurvatureOptions& opt) {
  check_vector(space, F, u);
  if (w.size() != space.dim_m()) throw ParameterError("vector length does not match dim m");
  DerivativeSource src{F, opt};
  return to_eigen(matvec(connection(space, src, to_vec(u), true).N, to_vec(w)));
}

double riemann_quadratic(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v, const CurvatureOptions& opt) {
  check_vector(space, F, u);
  if (v.size() != space.dim_m()) throw ParameterError("vector length does not match dim m");
  return quadratic(space, F, u, v, opt).value;
}

CurvatureResult flag_curvature_detailed(const CosetDecomposition& space, const MinkowskiNorm& F, const Flag& flag,
                                        const CurvatureOptions& opt) {
  check_vector(space, F, flag.pole);
  validate_flag(space, flag);
  Quadratic q = quadratic(space, F, flag.pole, flag.wing, opt);
  Eigen::MatrixXd g = to_eigen(q.g);
  const Eigen::VectorXd& u = flag.pole;
  const Eigen::VectorXd& w = flag.wing;
  CurvatureResult r;
  r.numerator = q.value;
  r.denominator = w.dot(g * w) * u.dot(g * u) - std::pow(u.dot(g * w), 2);
  if (!(r.denominator > 0.0)) throw NumericalError("flag area under g_u is not positive");
  r.K = r.numerator / r.denominator;
  r.eta_norm = q.eta_norm;
  r.eta_skipped = q.eta_skipped;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  r.condition_number = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  return r;
}

double flag_curvature(const CosetDecomposition& space, const MinkowskiNorm& F, const Flag& flag,
                      const CurvatureOptions& opt) {
  return flag_curvature_detailed(space, F, flag, opt).K;
}

Eigen::VectorXd commuting_U(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v) {
  check_vector(space, F, u);
  const int n = space.dim_m();
  CurvatureOptions opt;
  DerivativeSource src{F, opt};
  Vec<double> uu = to_vec(u), vv = to_vec(v);
  Mat<double> g = src.g(uu), L = cholesky(g);
  Vec<double> gu = matvec(g, uu), gv = matvec(g, vv);
  Mat<double> Wu = bracket_matrix(space, uu), Wv = bracket_matrix(space, vv);
  Vec<double> rhs(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) rhs[a] += 0.5 * (Wu(c, a) * gv[c] + Wv(c, a) * gu[c]);
  return to_eigen(cholesky_solve(L, rhs));
}

double flag_curvature_commuting(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v) {
  check_vector(space, F, u);
  validate_flag(space, Flag{u, v});
  Eigen::VectorXd br = space.bracket(space.from_m(u), space.from_m(v));
  double scale = u.norm() * v.norm();
  if (br.norm() > 1e-10 * std::max(1.0, scale))
    throw PreconditionError("flag_curvature_commuting: [u,v] != 0 (|[u,v]| = " + std::to_string(br.norm()) + ")");
  Eigen::MatrixXd g = hessian(F, u);
  Vec<double> uu = to_vec(u);
  Mat<double> W = bracket_matrix(space, uu);
  Eigen::VectorXd r = to_eigen(W).transpose() * (g * u);
  if (r.norm() > 1e-10 * std::max(1.0, u.squaredNorm() * g.norm()))
    throw PreconditionError("flag_curvature_commuting: <[u,m],u>_u != 0 (residual " + std::to_string(r.norm()) + ")");
  Eigen::VectorXd U = commuting_U(space, F, u, v);
  double area = u.dot(g * u) * v.dot(g * v) - std::pow(u.dot(g * v), 2);
  return U.dot(g * U) / area;
}

double sectional_oracle_normal(const CosetDecomposition& space, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != space.dim_m() || v.size() != space.dim_m()) throw ParameterError("vector length does not match dim m");
  double area = u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2);
  if (!(area > 1e-12)) throw DomainError("degenerate pair: u and v are linearly dependent");
  Eigen::VectorXd bm = space.bracket_mm(u, v);
  Eigen::VectorXd bh = space.bracket_mh(u, v);
  return (0.25 * bm.squaredNorm() + bh.squaredNorm()) / area;
}

bool curvature_close(double a, double b, double rel, double abs) {
  double d = std::abs(a - b);
  return d <= abs || d <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace flagcurv
