#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <optional>
#include <string>
#include <vector>

namespace flagcurv {

using Rational = boost::rational<long long>;

// Comparing boost::rational against integer literals recurses under C++20
// rewritten comparisons; test the numerator instead.
inline bool is_zero(const Rational& r) { return r.numerator() == 0; }

// Complex number with rational real and imaginary parts.
struct QComplex {
  Rational re{0};
  Rational im{0};
};

// Sparse square matrix with Gaussian-rational entries.
struct QMatrix {
  struct Entry {
    int row;
    int col;
    QComplex value;
  };
  int size = 0;
  std::vector<Entry> entries;
};

enum class Family { su, so, sp, abelian };

const char* to_string(Family family);
Family family_from_string(const std::string& name);

struct FactorInfo {
  Family family;
  int n;
  double scale;
  int offset;  // first basis index of this factor in the direct sum
  int dim;
};

struct SparseTerm {
  int index;
  Rational value;
};

struct CheckReport {
  bool exact = false;      // true when the exact rational check ran
  double max_violation = 0.0;  // floating view
  bool exact_ok = true;
};

struct AlgebraChecks {
  CheckReport antisymmetry;
  CheckReport jacobi;
  CheckReport ad_invariance;
  bool ok(double tol = 1e-12) const;
};

// A compact matrix Lie algebra with a bi-invariant inner product.
//
// Coordinates are with respect to an integral matrix basis (not orthonormal);
// the inner product is metric(). Where the basis brackets are rational the
// exact structure constants are kept alongside the floating view.
class LieAlgebra {
 public:
  int dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<FactorInfo>& factors() const { return factors_; }
  const Eigen::MatrixXd& metric() const { return metric_; }

  // c[i][j][k]: coefficient of e_k in [e_i, e_j].
  double constant(int i, int j, int k) const { return constants_[(i * dim_ + j) * dim_ + k]; }
  bool has_exact() const { return exact_.has_value(); }
  const std::vector<SparseTerm>& exact_bracket(int i, int j) const { return (*exact_)[i * dim_ + j]; }
  // Unscaled rational form -Re tr(xy), block diagonal over factors.
  Rational exact_form(int i, int j) const { return exact_form_[i * dim_ + j]; }

  Eigen::VectorXd bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Eigen::MatrixXd ad(const Eigen::VectorXd& x) const;
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  double norm(const Eigen::VectorXd& x) const;

  // Matrix realization of basis element i inside its factor (empty for
  // abelian factors).
  const QMatrix& realization(int i) const { return realization_[i]; }
  // Exact coordinates of a matrix belonging to factor `factor`.
  Eigen::VectorXd coordinates(int factor, const QMatrix& x) const;
  std::vector<Rational> exact_coordinates(int factor, const QMatrix& x) const;

  // Diagonal (or block-diagonal rotation) Cartan subalgebra of each factor.
  std::vector<Eigen::VectorXd> standard_cartan() const;

  AlgebraChecks verify() const;

  friend LieAlgebra build_classical(Family family, int n, double scale);
  friend LieAlgebra build_abelian(int n, double scale);
  friend LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts);

 private:
  int dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<FactorInfo> factors_;
  std::vector<double> constants_;
  std::optional<std::vector<std::vector<SparseTerm>>> exact_;
  std::vector<Rational> exact_form_;
  Eigen::MatrixXd metric_;
  std::vector<QMatrix> realization_;
  // Per factor: inverse of the exact Gram matrix of the factor's basis.
  std::vector<std::vector<Rational>> factor_gram_inverse_;
};

// Compact real forms as skew-hermitian (su), real skew-symmetric (so) and
// quaternionic skew-hermitian (sp, as 2n x 2n complex) matrices with
// <x,y> = -scale Re tr(xy). scale == 0 selects the default normalization in
// which short roots have length sqrt(2).
LieAlgebra build_classical(Family family, int n, double scale = 0.0);
LieAlgebra build_abelian(int n, double scale = 1.0);
LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts);

double default_scale(Family family);

// Dimension of the compact classical algebra.
int classical_dim(Family family, int n);

std::string to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

}  // namespace flagcurv
