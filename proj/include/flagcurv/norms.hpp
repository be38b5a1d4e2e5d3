#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flagcurv/dense.hpp"
#include "json.hpp"

namespace flagcurv {

// Degree-0 homogeneous cut-off around an axis. With c the cosine of the angle
// between y and the axis, mu = 0 for angle <= theta1, mu = 1 for
// angle >= theta2, and a C^order smoothstep in between.
struct BumpFunction {
  Eigen::VectorXd axis;  // unit vector
  double theta1 = 0.2;
  double theta2 = 0.4;
  int order = 4;  // smoothstep polynomial of degree 2*order + 1

  void validate() const;
  // Progress variable in [0,1]: 0 inside the theta1 cone, 1 outside theta2.
  template <class S>
  S progress(const Vec<S>& y) const;
  template <class S>
  S mu(const Vec<S>& y) const;
  double mu(const Eigen::VectorXd& y) const;
};

// Smoothstep of C^order regularity on [0,1].
double smoothstep(double t, int order);

struct NormNode;

// Minkowski norm on R^n given as a variant tree.
class MinkowskiNorm {
 public:
  enum class Kind { inner_product, randers, navigated, glued };

  MinkowskiNorm() = default;
  static MinkowskiNorm inner_product(const Eigen::MatrixXd& A);
  static MinkowskiNorm euclidean(int n) { return inner_product(Eigen::MatrixXd::Identity(n, n)); }
  static MinkowskiNorm randers(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

  Kind kind() const;
  int dim() const;
  bool valid() const { return node_ != nullptr; }
  bool reversible() const;  // F(-y) = F(y)
  bool riemannian() const;  // inner product, or a navigation of one with zero wind

  // Inner product and Randers data (Randers also for navigated norms with a
  // closed form).
  const Eigen::MatrixXd& matrix() const;
  const Eigen::VectorXd& covector() const;
  bool has_randers_form() const;

  // Navigated data.
  const MinkowskiNorm& base() const;
  const Eigen::VectorXd& wind() const;

  // Glued data.
  const MinkowskiNorm& first() const;
  const MinkowskiNorm& second() const;
  const BumpFunction& bump() const;

  double derivative_step = 1e-4;  // relative step of the numeric Hessian

  const NormNode& node() const { return *node_; }
  explicit MinkowskiNorm(std::shared_ptr<const NormNode> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const NormNode> node_;
};

struct NormNode {
  MinkowskiNorm::Kind kind;
  int dim = 0;
  Eigen::MatrixXd A;  // inner product / Randers (closed form for navigated)
  Eigen::VectorXd b;
  bool has_closed_form = false;
  MinkowskiNorm base;  // navigated
  Eigen::VectorXd v;
  MinkowskiNorm first, second;  // glued
  BumpFunction bump;
};

// Templated evaluation; instantiated for double and nested duals up to depth 4.
template <class S>
S evaluate(const MinkowskiNorm& F, const Vec<S>& y);

double evaluate(const MinkowskiNorm& F, const Eigen::VectorXd& y);

// g_y = 1/2 Hess(F^2) at y: analytic for inner product and Randers forms,
// forward-mode automatic differentiation otherwise. Throws DomainError at
// y = 0 and ConvexityError when g_y is not positive definite.
Eigen::MatrixXd hessian(const MinkowskiNorm& F, const Eigen::VectorXd& y);
double inner(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& u, const Eigen::VectorXd& w);
// C_y(u,v,w) = 1/4 d^3/dr ds dt F^2(y + r u + s v + t w).
double cartan_tensor(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& v, const Eigen::VectorXd& w);
// The matrix C_y(., ., z).
Eigen::MatrixXd cartan_matrix(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& z);

// Scalar-generic versions used by the curvature code; closed forms are used
// where they exist.
template <class S>
Mat<S> hessian_t(const MinkowskiNorm& F, const Vec<S>& y);
template <class S>
Mat<S> cartan_matrix_t(const MinkowskiNorm& F, const Vec<S>& y, const Vec<S>& z);

// Finite-difference versions: central differences at h and h/2 with one
// Richardson step. h is relative to |y|; step <= 0 selects the defaults
// (F.derivative_step for the Hessian, 1e-2 for the Cartan tensor).
Eigen::MatrixXd hessian_numeric(const MinkowskiNorm& F, const Eigen::VectorXd& y, double step = 0.0);
double cartan_numeric(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v, const Eigen::VectorXd& w, double step = 0.0);
Eigen::MatrixXd cartan_matrix_numeric(const MinkowskiNorm& F, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                                      double step = 0.0);
// Analytic forms are available for inner products, Randers norms and
// navigations of inner products.
bool has_analytic_derivatives(const MinkowskiNorm& F);

// Zermelo navigation: F~(y + F(y) v) = F(y). Requires F(v) < 1 and F(-v) < 1.
MinkowskiNorm navigate(const MinkowskiNorm& F, const Eigen::VectorXd& v);
// The implicit solve behind a navigated norm: returns t = F~(y~) with
// t = F(y~ - t v) (Newton with bisection fallback, tolerance 1e-12).
double navigation_solve(const MinkowskiNorm& base, const Eigen::VectorXd& v, const Eigen::VectorXd& ytilde);
// Evaluates a navigated norm through the implicit solve even when a closed
// form is attached.
double evaluate_implicit(const MinkowskiNorm& navigated, const Eigen::VectorXd& y);

MinkowskiNorm glue(const MinkowskiNorm& F1, const MinkowskiNorm& F2, const BumpFunction& bump);

struct NormReport {
  int n_samples = 0;
  double min_eigenvalue = 0.0;  // smallest eigenvalue of g_y over sampled unit y
  Eigen::VectorXd worst_direction;
  double max_homogeneity_violation = 0.0;  // relative
  int positivity_violations = 0;
  int convexity_failures = 0;
  double randers_b_norm = 0.0;  // dual norm of b for Randers forms, else 0
  bool ok() const { return min_eigenvalue > 0.0 && positivity_violations == 0 && convexity_failures == 0 &&
                           max_homogeneity_violation <= 1e-10; }
};

// Sphere samples are seeded Gaussian directions plus, for glued norms, the
// cone-boundary directions of the bump.
NormReport validate_norm(const MinkowskiNorm& F, int n_samples, std::uint64_t seed = 1);

// Dual A-norm of b: sqrt(b^T A^{-1} b).
double randers_b_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

nlohmann::json to_json(const MinkowskiNorm& F);
MinkowskiNorm norm_from_json(const nlohmann::json& j);

// CSV of sphere samples: direction components, F, min eigenvalue of g_y.
void write_sphere_csv(const MinkowskiNorm& F, int n_samples, std::uint64_t seed, std::ostream& out);

}  // namespace flagcurv
