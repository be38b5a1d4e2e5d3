#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "flagcurv/coset_space.hpp"
#include "flagcurv/curvature.hpp"
#include "flagcurv/error.hpp"
#include "flagcurv/norms.hpp"
#include "json.hpp"

namespace flagcurv {

inline constexpr double kPositivityThreshold = 1e-8;

// Vectors are m-frame coordinates unless noted.

struct NavigationConditions {
  bool condition1 = false;  // [v, h] = 0
  bool condition2 = false;  // <v, alpha> != 0 for every root plane in m, v in t∩m
  double max_h_bracket = 0.0;
  std::string h_witness;          // label of the worst h basis vector
  std::vector<int> failing_roots;  // indices into cartan.planes
  double min_root_pairing = 0.0;  // min |<v, alpha>| over root planes in m
  std::string detail;
  bool ok() const { return condition1 && condition2; }
};

NavigationConditions verify_navigation_conditions(const CosetDecomposition& space, const Eigen::VectorXd& v);

// Killing navigation of the normal homogeneous metric by v rescaled to
// bi-invariant length `speed` in [0, 1).
MinkowskiNorm build_fp_metric(const CosetDecomposition& space, const Eigen::VectorXd& v, double speed);

enum class CertificateTag { commuting, non_commuting, numeric };
std::string to_string(CertificateTag t);

struct PoleCertificate {
  Eigen::VectorXd pole;
  Eigen::VectorXd wing;
  double curvature = 0.0;  // certificate value (oracle unless numeric)
  CertificateTag tag = CertificateTag::numeric;
  bool ok = false;  // curvature > positivity threshold
  std::string detail;
};

// Pole certificate for a navigated normal homogeneous metric; falls back to a
// pole sweep of n_poles directions.
PoleCertificate fp_pole_certificate(const CosetDecomposition& space, const MinkowskiNorm& F_nav,
                                    const Eigen::VectorXd& p1, const Eigen::VectorXd& p2, int n_poles = 64);

// Largest |K^F(y, y∧w) - K^F~(y~, y~∧w)| over n random pairs with
// <w, y>_y^F = 0, where F is the base of the navigated norm.
struct NavigationCheck {
  int n_pairs = 0;
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  int failures = 0;  // pairs with diff > tol (abs and rel)
};
NavigationCheck navigation_identity_check(const CosetDecomposition& space, const MinkowskiNorm& F_nav, int n_pairs,
                                          std::uint64_t seed, double tol = 1e-5);

struct GluedOptions {
  double theta1 = 0.2;
  double theta2 = 0.4;
  int order = 4;
  std::uint64_t seed = 0x91ced;
  int validate_samples = 10000;
};

struct GluedMetric {
  std::shared_ptr<const CosetDecomposition> space;  // the group itself: h = 0
  MinkowskiNorm norm;
  MinkowskiNorm first, second;  // F~1 (wind eps v1) and F~2 (wind eps v2)
  Eigen::VectorXd v1, v2;       // generic unit vectors of t1, t2
  Eigen::MatrixXd t1, t2;       // orthonormal columns
  Eigen::VectorXd axis;         // bump axis in t1
  double epsilon = 0.0;
  NormReport report;
};

class EpsilonTooLarge : public ConvexityError {
 public:
  EpsilonTooLarge(const std::string& what, double margin) : ConvexityError(what), margin(margin) {}
  double margin;  // measured minimum eigenvalue of g_y
};

// Rank-2 compact algebra with h = 0. Throws EpsilonTooLarge when the glued
// norm fails validation.
GluedMetric build_rank2_glued(std::shared_ptr<const LieAlgebra> L, double epsilon, const GluedOptions& opt = {});

struct EpsilonSearch {
  double epsilon = 0.0;    // chosen value (bisection bound times safety)
  double boundary = 0.0;   // largest validated epsilon found by bisection
  int iterations = 0;
};
// Bisection on validate_norm over (0, hi]; the result is boundary * safety.
EpsilonSearch find_glue_epsilon(std::shared_ptr<const LieAlgebra> L, const GluedOptions& opt = {}, double hi = 0.5,
                                int iterations = 20, double safety = 0.5, int samples = 2000);

struct PlaneRecord {
  int id = 0;
  std::string kind;  // random or structured label
  Eigen::VectorXd a, b;  // orthonormal basis of the plane
  Eigen::VectorXd best_pole;
  double best_curvature = -std::numeric_limits<double>::infinity();
  double min_curvature = std::numeric_limits<double>::infinity();
  CertificateTag tag = CertificateTag::numeric;
  double best_angle = 0.0;  // sweep angle of the best pole (NaN for extra poles)
  std::vector<double> sweep;  // curvature at angle k * step, k < n_poles
  double sweep_step = 0.0;
  int n_flags = 0;
  int errors = 0;
  bool certificate_failed = false;
};

struct FPReport {
  std::string space_id;
  nlohmann::json metric;
  int n_planes = 0;
  int n_poles = 0;
  std::uint64_t seed = 0;
  std::vector<PlaneRecord> planes;
  double positivity = kPositivityThreshold;
  double min_curvature_observed = std::numeric_limits<double>::infinity();
  double max_condition_number = 0.0;
  long long n_flags = 0;
  int certificate_failures = 0;
  int evaluation_errors = 0;
  bool fp_verified = false;
  std::vector<std::string> warnings;
};

struct ScanOptions {
  int threads = 1;
  bool structured = true;    // add the structured planes
  bool certificates = true;  // oracle certificates for navigated normal metrics
  double positivity = kPositivityThreshold;  // a plane passes when its best pole exceeds this
  std::vector<Eigen::VectorXd> extra_planes;  // pairs a0,b0,a1,b1,... (labelled "extra")
  std::vector<Eigen::VectorXd> axes;          // projected onto each plane as extra poles
  CurvatureOptions curvature;
};

FPReport fp_scan(const CosetDecomposition& space, const MinkowskiNorm& F, int n_planes, int n_poles,
                 std::uint64_t seed, const ScanOptions& opt = {});

// Structured planes: pairs in t∩m, t∩m with each root-plane vector, root
// planes in m, and commuting pairs of frame vectors.
std::vector<std::pair<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>>> structured_planes(
    const CosetDecomposition& space);

nlohmann::json to_json(const FPReport& r);
void write_csv(const FPReport& r, std::ostream& out);
nlohmann::json to_json(const NavigationConditions& r);

}  // namespace flagcurv
