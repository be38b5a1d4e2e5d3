#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "flagcurv/coset_space.hpp"
#include "flagcurv/roots.hpp"

namespace flagcurv {

using Rational = boost::rational<long long>;
using RationalVector = std::vector<Rational>;

constexpr double kRootPlaneTolerance = 1e-9;

// Root data of g with a fundamental Cartan subalgebra t, the roots of h and
// the unit vector u0 spanning t∩m.
struct CriterionInstance {
  RootSystem root_system;
  std::vector<int> h_roots;  // indices into root_system.roots, ascending
  Eigen::VectorXd u0;
  std::string name;
  std::string family;  // A, C, D, Q, E6, E7, product, computed
  int p = 0;
  int q = 0;
  bool listed = false;  // parameters inside the listed exclusion ranges
  std::string note;

  // Exact copies of roots and of a (non-normalized) u0 direction when every
  // coordinate is rational; membership tests are then exact.
  bool exact = false;
  std::vector<RationalVector> exact_roots;
  RationalVector exact_u0;

  bool is_h_root(int index) const;
  // Throws ParameterError when x is not a root.
  int root_index(const Eigen::VectorXd& x, const std::string& what = "vector") const;
};

// Checks the invariants and fills the exact copies when possible.
void finalize_instance(CriterionInstance& inst, const Eigen::VectorXd& u0_direction);

enum class Condition3Reading {
  corrected,  // beta + R alpha + t∩m
  literal,    // beta + R alpha + t∩g (never satisfiable)
};

struct RootPairCheck {
  bool ok = false;
  bool independent = false;
  bool condition1 = false;
  bool condition2 = false;
  bool condition3 = false;
  std::vector<int> condition2_extra;  // roots in R alpha + R u0 other than +-alpha
  std::vector<int> condition3_extra;  // roots in beta + R alpha + R u0 other than beta
  int alpha = -1;
  int beta = -1;
};

RootPairCheck check_root_pair(const CriterionInstance& inst, const Eigen::VectorXd& alpha,
                              const Eigen::VectorXd& beta,
                              Condition3Reading reading = Condition3Reading::corrected);
RootPairCheck check_root_pair(const CriterionInstance& inst, int alpha, int beta,
                              Condition3Reading reading = Condition3Reading::corrected);

struct RootPair {
  int alpha = -1;
  int beta = -1;
};

// Ordered pairs of +- classes, each class represented by the root whose first
// nonzero coordinate is positive. Ordered by (alpha, beta) index.
std::vector<RootPair> enumerate_root_pairs(const CriterionInstance& inst, int threads = 1,
                                           Condition3Reading reading = Condition3Reading::corrected);

// True when some pair in the list equals (+-alpha, +-beta).
bool contains_pair(const CriterionInstance& inst, const std::vector<RootPair>& pairs,
                   const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);

// A(p,q), C(n), D(n), Q(n), E6, E7, or a product "F1+F2+...@c1,c2,...".
CriterionInstance catalog_case(const std::string& name);

// Instance read from a computed coset with dim t∩m = 1, in t-frame coordinates.
CriterionInstance criterion_instance(const CosetDecomposition& space);

// Reference witness pair of an irreducible catalog case.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> catalog_witness(const std::string& name);

struct FactorLabel {
  std::string type;  // A, C, D, Q, E6, E7
  int p = 0;
  int q = 0;
  std::string label() const;
  bool rank_one() const;  // A(1,1)
};

FactorLabel parse_factor_label(const std::string& label);

struct ProductSpec {
  std::vector<FactorLabel> factors;
  std::vector<double> c;
};

ProductSpec parse_product_spec(const std::string& spec);

// Root-level instance of G/(T^{k-1} H): block roots, v_i the factor's u0 of
// length sqrt(2) and u0 along sum c_i v_i.
CriterionInstance product_instance(const ProductSpec& spec);

struct ExceptionalSet {
  int alpha = -1;             // candidate root of g1 (product index)
  std::vector<double> values;  // c1/c2 where c v1 + R alpha meets the roots of g1
};

struct ProductVerdict {
  bool excluded = false;
  std::string rule;       // decision-tree branch
  std::string predicate;  // set when the verdict comes from a predicate
  std::optional<RootPair> witness;
  std::optional<RootPairCheck> witness_check;
  std::vector<ExceptionalSet> exceptional;  // k = 2 mixed case
  std::vector<int> order;                   // factor order used by the rule
  std::string note;
};

ProductVerdict product_case_check(const ProductSpec& spec);

// True iff c1 is not in {+-c2, +-c2/2, +-2 c2}.
bool ratio_exclusion(double c1, double c2);
bool ratio_exclusion(const Rational& c1, const Rational& c2);

struct CriterionRow {
  std::string name;
  bool listed = false;
  bool excluded = false;
  int n_roots = 0;
  int n_pairs = 0;
  std::optional<RootPair> first_pair;
  std::optional<bool> witness_found;  // catalog witness among the ok pairs
  std::string rule;
  std::string note;
};

CriterionRow criterion_row(const std::string& name, int threads = 1);

std::string format_vector(const Eigen::VectorXd& v);

void to_json(nlohmann::json& j, const CriterionInstance& inst);
void to_json(nlohmann::json& j, const RootPairCheck& check);
nlohmann::json pairs_to_json(const CriterionInstance& inst, const std::vector<RootPair>& pairs);
nlohmann::json verdict_to_json(const ProductSpec& spec, const ProductVerdict& verdict);
nlohmann::json row_to_json(const CriterionRow& row);
std::string rows_to_text(const std::vector<CriterionRow>& rows);

}  // namespace flagcurv
