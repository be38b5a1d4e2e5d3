#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flagcurv/constructions.hpp"
#include "flagcurv/coset_space.hpp"
#include "flagcurv/curvature.hpp"
#include "flagcurv/norms.hpp"
#include "json.hpp"

namespace flagcurv {

inline constexpr const char* kConfigSchema = "flagcurv.config/1";
inline constexpr const char* kReportSchema = "flagcurv.report/1";

// Space specification, either a catalog entry or an inline JSON object:
//   group:      {"kind":"group", "factors":[{"family":"su","n":2,"scale":0}, ...]}
//   coset:      {"kind":"coset", "factors":[...], "h_labels":["A1,2", ...]}
//   bundle:     {"kind":"bundle", "factors":[{"label":"A(3,2)","scale":0}, ...], "c":[...]}
//   root_level: {"kind":"root_level", "criterion":"E6"}   (criterion module only)
struct SpaceEntry {
  std::string name;
  std::string kind;
  std::string description;
  nlohmann::json spec;
};

// The shipped catalog, embedded at build time.
const nlohmann::json& catalog_document();
const std::vector<SpaceEntry>& space_catalog();
std::vector<std::string> space_names();
const SpaceEntry* find_space(const std::string& name);

// Accepts a catalog name, a path to a JSON space file, or an inline JSON
// object. Unknown names raise ParameterError listing the catalog.
nlohmann::json resolve_space_spec(const std::string& text);
std::shared_ptr<const CosetDecomposition> build_space(const nlohmann::json& spec, const std::string& name = "");
std::shared_ptr<const CosetDecomposition> build_space(const std::string& text);
inline std::shared_ptr<const CosetDecomposition> build_space(const char* text) { return build_space(std::string(text)); }

struct MetricConfig {
  std::string kind = "normal";  // normal, navigated, glued
  double speed = 0.5;
  std::optional<double> epsilon;  // glued; empty selects bisection
  GluedOptions glue;
  std::vector<double> direction;  // navigated; empty selects the bundle generator v
};

struct ScanConfig {
  int planes = 500;
  int poles = 64;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 selects the available parallelism
  bool structured = true;
  bool certificates = true;
};

struct ToleranceConfig {
  DerivativeMode mode = DerivativeMode::automatic;
  double eta_step = 1e-5;
  double hessian_step = 1e-4;
  double cartan_step = 1e-2;
  double eta_zero = 1e-12;
  double positivity = 1e-8;
};

struct OutputConfig {
  std::string path;  // empty writes to stdout
  std::string format = "json";  // json, text, csv
};

struct RunConfig {
  std::string space = "so4/so2";
  MetricConfig metric;
  ScanConfig scan;
  ToleranceConfig tolerances;
  OutputConfig output;
};

// Defaults come from the embedded catalog document.
RunConfig default_config();
// Overlays the keys present in j onto base; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base = default_config());
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);
// Throws ParameterError on non-positive tolerances or bad enumerations.
void validate_config(const RunConfig& cfg);

CurvatureOptions curvature_options(const RunConfig& cfg);
int effective_threads(int requested);

struct BuiltMetric {
  MinkowskiNorm norm;
  std::shared_ptr<const CosetDecomposition> space;  // replaced for glued metrics (same group)
  std::optional<GluedMetric> glued;
  nlohmann::json info;
};

BuiltMetric build_metric(std::shared_ptr<const CosetDecomposition> space, const RunConfig& cfg);

// Dimensions, rank data, root counts and hat-decomposition sizes.
nlohmann::json describe_space(const CosetDecomposition& space);
std::string describe_text(const nlohmann::json& description);

// Single-flag evaluation with diagnostics. Adds the Riemannian sectional
// curvature for normal metrics and the commuting formula when it applies.
nlohmann::json curvature_report(const BuiltMetric& metric, const Flag& flag, const RunConfig& cfg);

// fp_scan with the configured options; glued metrics also scan the t1 plane
// with the bump axis as an extra pole.
FPReport check_fp(const BuiltMetric& metric, const RunConfig& cfg);
bool fp_exit_ok(const FPReport& r);  // verified and min >= -threshold
std::string fp_text(const FPReport& r);

}  // namespace flagcurv
