#pragma once

#include <Eigen/Dense>
#include <string>

#include "flagcurv/coset_space.hpp"
#include "flagcurv/norms.hpp"

namespace flagcurv {

// All vectors are m-frame coordinates (see CosetDecomposition); the norm acts
// on R^{dim m} through the same frame.

enum class DerivativeMode {
  automatic,  // forward-mode dual numbers for g_u, C_u and D_eta N
  finite,     // closed forms where available, central differences otherwise
};

struct CurvatureOptions {
  DerivativeMode mode = DerivativeMode::automatic;
  double eta_step = 1e-5;      // finite mode: s |eta| = eta_step |u| for D_eta N
  double hessian_step = 0.0;   // finite mode, 0 selects the norm default
  double cartan_step = 0.0;    // finite mode, 0 selects the default
  double eta_zero_tol = 1e-12; // D_eta N is skipped when |eta| <= tol |u|
};

struct Flag {
  Eigen::VectorXd pole;
  Eigen::VectorXd wing;
};

// Throws ParameterError on wrong lengths and DomainError when the Gram
// determinant of (pole, wing) is <= 1e-12.
void validate_flag(const CosetDecomposition& space, const Flag& flag);

Eigen::VectorXd spray_eta(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                          const CurvatureOptions& opt = {});

Eigen::VectorXd connection_N(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& w, const CurvatureOptions& opt = {});

// <R_u v, v>_u.
double riemann_quadratic(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v, const CurvatureOptions& opt = {});

struct CurvatureResult {
  double K = 0.0;
  double numerator = 0.0;    // <R_u w, w>_u
  double denominator = 0.0;  // area form under g_u
  double eta_norm = 0.0;     // bi-invariant length of eta(u)
  double condition_number = 0.0;  // of g_u
  bool eta_skipped = false;  // D_eta N contributed exactly zero
  bool ill_conditioned() const { return condition_number > 1e10; }
};

CurvatureResult flag_curvature_detailed(const CosetDecomposition& space, const MinkowskiNorm& F, const Flag& flag,
                                        const CurvatureOptions& opt = {});
double flag_curvature(const CosetDecomposition& space, const MinkowskiNorm& F, const Flag& flag,
                      const CurvatureOptions& opt = {});

// Closed formula for a commuting pair with <[u,m],u>_u = 0. Throws
// PreconditionError naming the failed hypothesis.
double flag_curvature_commuting(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v);
// The vector U(u,v) of the commuting formula.
Eigen::VectorXd commuting_U(const CosetDecomposition& space, const MinkowskiNorm& F, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v);

// Sectional curvature of the normal homogeneous metric induced by the
// bi-invariant inner product.
double sectional_oracle_normal(const CosetDecomposition& space, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// True iff |a - b| <= rel * max(|a|,|b|) or |a - b| <= abs.
bool curvature_close(double a, double b, double rel = 1e-6, double abs = 1e-8);

}  // namespace flagcurv
