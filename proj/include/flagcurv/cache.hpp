#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "flagcurv/lie_algebra.hpp"
#include "json.hpp"

namespace flagcurv {

inline constexpr const char* kAlgebraCacheSchema = "flagcurv.algebra_cache/1";

// Structure constants and root decomposition of one classical algebra,
// addressed by family, n and the effective scale.
struct AlgebraCacheEntry {
  Family family = Family::su;
  int n = 0;
  double scale = 0.0;
  int dim = 0;
  std::vector<std::string> labels;
  struct Constant {
    int i, j, k;
    double value;  // c_ij^k for i < j
  };
  std::vector<Constant> constants;
  Eigen::MatrixXd metric;
  Eigen::MatrixXd t_basis;
  std::vector<Eigen::VectorXd> roots;  // one per +- pair, t-frame coordinates
};

// For example "su-3-3ff0000000000000" (scale as IEEE-754 bits).
std::string algebra_cache_key(Family family, int n, double scale = 0.0);
AlgebraCacheEntry make_cache_entry(Family family, int n, double scale = 0.0);
nlohmann::json to_json(const AlgebraCacheEntry& e);
// Throws IoError on schema or content mismatch.
AlgebraCacheEntry cache_entry_from_json(const nlohmann::json& j);
// Max deviation between the cached constants and a freshly built algebra.
double cache_deviation(const AlgebraCacheEntry& e, const LieAlgebra& L);

struct CacheLookup {
  AlgebraCacheEntry entry;
  std::string path;
  bool regenerated = false;
};

// Reads dir/<key>.json, rebuilding and rewriting it when absent, unreadable,
// of another schema version or for another algebra.
CacheLookup load_or_build_cache(const std::string& dir, Family family, int n, double scale = 0.0);

}  // namespace flagcurv
