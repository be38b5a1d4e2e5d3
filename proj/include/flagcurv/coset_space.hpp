#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flagcurv/lie_algebra.hpp"
#include "flagcurv/roots.hpp"

namespace flagcurv {

enum class PlaneLocation { in_h, in_m, mixed };

// Reductive decomposition g = h + m with a fundamental Cartan subalgebra.
//
// Vectors of g are in the basis coordinates of the algebra. Curvature and
// norm code works in m-frame coordinates: components along the columns of
// m_basis, which is bi-invariant orthonormal. The first dim(t∩m) frame
// vectors span t∩m.
class CosetDecomposition {
 public:
  std::shared_ptr<const LieAlgebra> algebra;
  std::string name;
  Eigen::MatrixXd h_basis;  // columns, bi-invariant orthonormal
  Eigen::MatrixXd m_basis;
  CartanData cartan;        // fundamental Cartan subalgebra of g
  Eigen::MatrixXd t_cap_h;  // columns spanning t∩h (orthonormal)
  Eigen::MatrixXd t_cap_m;
  std::vector<PlaneLocation> plane_location;  // per cartan.planes entry
  std::vector<int> h_roots;                   // indices into cartan.planes with plane inside h
  std::optional<Eigen::VectorXd> navigation_v;  // m0 = R v for S^1-bundles (g coordinates)

  int dim_g() const { return algebra->dim(); }
  int dim_h() const { return static_cast<int>(h_basis.cols()); }
  int dim_m() const { return static_cast<int>(m_basis.cols()); }
  int rank_g() const { return cartan.rank(); }
  int rank_h() const { return static_cast<int>(t_cap_h.cols()); }

  // Orthogonal projections (g coordinates in and out).
  Eigen::VectorXd project_h(const Eigen::VectorXd& x) const;
  Eigen::VectorXd project_m(const Eigen::VectorXd& x) const;
  Eigen::VectorXd bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Eigen::VectorXd bracket_m(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Eigen::VectorXd bracket_h(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  // Conversions between g coordinates and m-frame / h-frame coordinates.
  Eigen::VectorXd to_m(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_m(const Eigen::VectorXd& c) const;
  Eigen::VectorXd to_h(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_h(const Eigen::VectorXd& c) const;

  // Frame structure constants.
  // cm(a,b,c) = <[m_a,m_b], m_c>, ch(a,b,k) = <[m_a,m_b], h_k>,
  // chm(k,a,c) = <[h_k,m_a], m_c>.
  double cm(int a, int b, int c) const { return cm_[(a * dim_m() + b) * dim_m() + c]; }
  double ch(int a, int b, int k) const { return ch_[(a * dim_m() + b) * dim_h() + k]; }
  double chm(int k, int a, int c) const { return chm_[(k * dim_m() + a) * dim_m() + c]; }
  const std::vector<double>& cm_data() const { return cm_; }

  // m-frame brackets.
  Eigen::VectorXd bracket_mm(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;  // [a,b]_m
  Eigen::VectorXd bracket_mh(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;  // [a,b]_h in h frame
  Eigen::VectorXd act_h(const Eigen::VectorXd& hk, const Eigen::VectorXd& b) const;     // [h,b] for h in h frame

  struct Checks {
    double orthogonality = 0.0;  // max |<h_i, m_j>|
    double subalgebra = 0.0;     // max |pr_m [h_i,h_j]|
    double reductivity = 0.0;    // max |pr_h [h_i,m_j]|
    bool dimension_ok = false;
    bool fundamental_ok = false;
  };
  Checks checks;

  void finalize_frame();  // fills the frame structure constants

 private:
  std::vector<double> cm_, ch_, chm_;
};

// Builds the orthocomplement m of the subalgebra spanned by h_basis and a
// fundamental Cartan subalgebra. Seed directions (g coordinates, inside the
// centralizer of t∩h and in m) are used first when extending t∩h.
CosetDecomposition build_coset(std::shared_ptr<const LieAlgebra> L, const std::vector<Eigen::VectorXd>& h_basis,
                               const std::vector<Eigen::VectorXd>& seed_directions = {},
                               std::uint64_t seed = 0x5eed);

// Irreducible Hermitian symmetric pair g_i / (h_i + R v_i).
struct HermitianFactorSpec {
  std::string type;  // A, Q, C, D, E6, E7
  int p = 0;         // A(p,q): p, q; other types use n = p
  int q = 0;
  double scale = 0.0;  // 0 selects the family default
  std::shared_ptr<const LieAlgebra> algebra;  // empty for E6, E7
  std::vector<Eigen::VectorXd> h_basis;
  Eigen::VectorXd v;  // centre of k_i, bi-invariant length sqrt(2)

  std::string label() const;
  bool rank_one() const;  // the A(1,1) = su(2)/u(1) pair
};

// A(p,q): su(p+q)/s(u(p)+u(q)); Q(n): so(n)/(so(n-2)+so(2)); C(n): sp(n)/u(n);
// D(n): so(2n)/u(n); E6, E7 are accepted as labels only.
HermitianFactorSpec hermitian_factor(const std::string& type, int p, int q = 0, double scale = 0.0);
// Parses "A(3,2)", "Q(4)", "C(5)", "D(5)", "E6", "E7".
HermitianFactorSpec hermitian_factor_from_string(const std::string& label, double scale = 0.0);

// The coset G/(T^{k-1} H) of the S^1-bundle construction with
// v = sum c_i v_i.
CosetDecomposition build_s1_bundle(const std::vector<HermitianFactorSpec>& factors, const std::vector<double>& c);

struct SubspaceFamily {
  std::string label;        // hat or hathat
  Eigen::VectorXd index;    // alpha' (hat) or gamma'' (hathat), g coordinates
  Eigen::MatrixXd basis;    // the m-part: columns in g coordinates
  Eigen::MatrixXd basis_g;  // the full g-family (hat only)
  Eigen::MatrixXd basis_h;  // basis_g ∩ h (hat only)
  std::vector<int> planes;  // cartan.planes entries grouped here
};

std::vector<SubspaceFamily> hat_decomposition(const CosetDecomposition& space);
std::vector<SubspaceFamily> hathat_decomposition(const CosetDecomposition& space, const Eigen::VectorXd& alpha_prime);

// True when alpha' (g coordinates, inside t∩h) is a root of h, i.e. some root
// plane of g inside h carries +-alpha'.
bool is_h_root(const CosetDecomposition& space, const Eigen::VectorXd& alpha_prime, double tol = 1e-8);

}  // namespace flagcurv
