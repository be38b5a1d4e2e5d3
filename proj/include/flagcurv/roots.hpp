#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flagcurv/lie_algebra.hpp"

namespace flagcurv {

// Roots as coordinate vectors in a Euclidean space. For computed systems the
// space is t with an orthonormal frame; for abstract systems it is the
// standard ambient space of the classical coordinate lists (A_r lives in
// R^{r+1}).
struct RootSystem {
  int rank = 0;  // dimension of the ambient space
  std::vector<Eigen::VectorXd> roots;
  std::string family;  // A, B, C, D, E6, E7, product or computed
  std::vector<double> scale;

  bool negation_closed(double tol = 1e-9) const;
  bool has_zero_root(double tol = 1e-12) const;
  // Index of the root equal to x, or -1.
  int find(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

// One root plane g_{+-alpha}. For h in t, ad(h) p = <alpha,h> q and
// ad(h) q = -<alpha,h> p.
struct RootPlane {
  Eigen::VectorXd alpha;    // coordinates in the orthonormal frame of t
  Eigen::VectorXd alpha_g;  // the same root as an element of t (g coordinates)
  Eigen::VectorXd p;        // g coordinates, bi-invariant unit vectors
  Eigen::VectorXd q;
};

struct CartanData {
  Eigen::MatrixXd t_basis;  // columns: bi-invariant orthonormal basis of t
  std::vector<RootPlane> planes;  // one per +-pair, lexicographically positive

  int rank() const { return static_cast<int>(t_basis.cols()); }
  // Both signs of every root, in t-frame coordinates.
  RootSystem root_system() const;
  // Largest deviation of ad(t_k) from its rotation blocks over all planes.
  double block_residual(const LieAlgebra& L) const;
};

// Bi-invariant Gram-Schmidt; vectors with residual norm below pivot_tol are
// dropped.
Eigen::MatrixXd orthonormalize(const LieAlgebra& L, const std::vector<Eigen::VectorXd>& vectors,
                               double pivot_tol = 1e-10);
Eigen::MatrixXd orthonormalize(const LieAlgebra& L, const Eigen::MatrixXd& columns,
                               double pivot_tol = 1e-10);

// Simultaneous block diagonalization of ad(t). seed fixes the generic element.
CartanData root_decomposition(const LieAlgebra& L, const std::vector<Eigen::VectorXd>& cartan_basis,
                              std::uint64_t seed = 0x5eed);

enum class RootFamily { A, B, C, D, E6, E7 };

RootFamily root_family_from_string(const std::string& name);
const char* to_string(RootFamily family);

// Coordinate lists: A_r {e_i - e_j} in R^{r+1}; B_r {+-e_i, +-e_i+-e_j};
// C_r {+-2e_i, +-e_i+-e_j}; D_r {+-e_i+-e_j}; E6 and E7 in their standard
// half-integer coordinates with sqrt(3)/2 and sqrt(2) entries.
RootSystem abstract_root_system(RootFamily family, int rank);

// Orthogonal direct sum of systems (block coordinates).
RootSystem product_root_system(const std::vector<RootSystem>& parts);

// Distinct root lengths, ascending.
std::vector<double> root_lengths(const RootSystem& rs, double tol = 1e-9);

struct IsometryConstraint {
  Eigen::VectorXd from;  // vector in the source space
  Eigen::VectorXd to;    // must map to +-to (sign_free) or to exactly
  bool sign_free = true;
};

struct Isometry {
  Eigen::MatrixXd Q;         // target_rank x source_rank, orthonormal columns
  std::vector<int> mapping;  // source root index -> target root index
  double residual = 0.0;     // max |Q a - b| after the Procrustes refit
};

// Linear isometric embedding of `from` into the span of `to` mapping the root
// set onto the root set. Optional labels must be preserved and constraints
// satisfied.
std::optional<Isometry> find_isometry(const RootSystem& from, const RootSystem& to,
                                      const std::vector<int>& from_labels = {},
                                      const std::vector<int>& to_labels = {},
                                      const std::vector<IsometryConstraint>& constraints = {},
                                      double tol = 1e-8);

// Orthogonal Procrustes fit Q (orthonormal columns) minimizing |Q X - Y|.
Eigen::MatrixXd procrustes(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

}  // namespace flagcurv
