#pragma once

// Small dense linear algebra over an arbitrary scalar (double or Dual<...>).
// Eigen is used for the double-only spectral work; these kernels carry the
// derivative-propagating paths.

#include <cstddef>
#include <vector>

#include "flagcurv/dual.hpp"
#include "flagcurv/error.hpp"

namespace flagcurv {

template <class T>
using Vec = std::vector<T>;

template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, T(0.0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> a_;
};

template <class T, class U>
T dot(const Vec<T>& x, const Vec<U>& y) {
  T s(0.0);
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

template <class T, class U>
Vec<T> matvec(const Mat<U>& a, const Vec<T>& x) {
  Vec<T> y(a.rows(), T(0.0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T s(0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) s += x[j] * a(i, j);
    y[i] = s;
  }
  return y;
}

// In-place lower Cholesky factor. Throws ConvexityError when the matrix is not
// numerically positive definite.
template <class T>
Mat<T> cholesky(const Mat<T>& a) {
  using std::sqrt;
  const std::size_t n = a.rows();
  Mat<T> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    T diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(value_of(diag) > 0.0))
      throw ConvexityError("matrix is not positive definite (Cholesky pivot " +
                           std::to_string(value_of(diag)) + ")");
    T ljj = sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      T s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

template <class T>
Vec<T> cholesky_solve(const Mat<T>& l, Vec<T> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    T s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    T s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
    b[ii] = s / l(ii, ii);
  }
  return b;
}

}  // namespace flagcurv
