#include "flagcurv/catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "flagcurv/criterion.hpp"
#include "flagcurv/error.hpp"

namespace flagcurv {

namespace detail {
extern const char* const kCatalogJson;
}

namespace {

using nlohmann::json;

std::string catalog_listing() {
  std::ostringstream os;
  auto names = space_names();
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
  return os.str();
}

// Typed field access with ParameterError on mismatches.
template <class T>
T field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(where + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ParameterError("unknown key '" + where + "." + it.key() + "'");
}

template <class T>
void overlay(const json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = field<T>(j, key, where);
}

std::shared_ptr<const LieAlgebra> algebra_from(const json& spec, const std::string& where) {
  if (!spec.contains("factors") || !spec["factors"].is_array() || spec["factors"].empty())
    throw ParameterError(where + " needs a nonempty 'factors' array");
  std::vector<LieAlgebra> parts;
  for (const auto& f : spec["factors"]) {
    reject_unknown(f, {"family", "n", "scale"}, where + ".factors[]");
    Family fam = family_from_string(field<std::string>(f, "family", where));
    int n = field<int>(f, "n", where);
    double scale = f.contains("scale") ? field<double>(f, "scale", where) : 0.0;
    if (fam == Family::abelian)
      parts.push_back(build_abelian(n, scale > 0.0 ? scale : 1.0));
    else
      parts.push_back(build_classical(fam, n, scale));
  }
  if (parts.size() == 1) return std::make_shared<LieAlgebra>(std::move(parts.front()));
  return std::make_shared<LieAlgebra>(direct_sum(parts));
}

DerivativeMode mode_from_string(const std::string& s) {
  if (s == "automatic") return DerivativeMode::automatic;
  if (s == "finite") return DerivativeMode::finite;
  throw ParameterError("derivative_mode must be 'automatic' or 'finite', got '" + s + "'");
}

const char* to_string(DerivativeMode m) { return m == DerivativeMode::automatic ? "automatic" : "finite"; }

}  // namespace

const nlohmann::json& catalog_document() {
  static const json doc = json::parse(detail::kCatalogJson);
  return doc;
}

const std::vector<SpaceEntry>& space_catalog() {
  static const std::vector<SpaceEntry> entries = [] {
    std::vector<SpaceEntry> out;
    for (const auto& e : catalog_document().at("spaces"))
      out.push_back({e.at("name").get<std::string>(), e.at("kind").get<std::string>(),
                     e.value("description", std::string()), e});
    return out;
  }();
  return entries;
}

std::vector<std::string> space_names() {
  std::vector<std::string> out;
  for (const auto& e : space_catalog()) out.push_back(e.name);
  return out;
}

const SpaceEntry* find_space(const std::string& name) {
  for (const auto& e : space_catalog())
    if (e.name == name) return &e;
  return nullptr;
}

nlohmann::json resolve_space_spec(const std::string& text) {
  if (const SpaceEntry* e = find_space(text)) return e->spec;
  if (!text.empty() && text.front() == '{') {
    try {
      return json::parse(text);
    } catch (const json::exception& ex) {
      throw ParameterError(std::string("bad inline space JSON: ") + ex.what());
    }
  }
  if (text.rfind("bundle:", 0) == 0) {
    ProductSpec ps = parse_product_spec(text.substr(7));
    json j = {{"kind", "bundle"}, {"name", text}, {"c", ps.c}, {"factors", json::array()}};
    for (const auto& f : ps.factors) j["factors"].push_back({{"label", f.label()}});
    return j;
  }
  std::error_code ec;
  if (std::filesystem::is_regular_file(text, ec)) {
    std::ifstream in(text);
    try {
      return json::parse(in);
    } catch (const json::exception& ex) {
      throw IoError("cannot parse space file '" + text + "': " + ex.what());
    }
  }
  throw ParameterError("unknown space '" + text + "'; catalog: " + catalog_listing() +
                       "; or use bundle:<factors>@<c>, a JSON object or a JSON file");
}

std::shared_ptr<const CosetDecomposition> build_space(const nlohmann::json& spec, const std::string& name) {
  if (!spec.is_object()) throw ParameterError("space spec must be a JSON object");
  const std::string kind = field<std::string>(spec, "kind", "space");
  const std::string label = !name.empty() ? name : spec.value("name", kind);
  CosetDecomposition out;
  if (kind == "group") {
    reject_unknown(spec, {"name", "kind", "description", "factors"}, "space");
    out = build_coset(algebra_from(spec, "space"), {});
  } else if (kind == "coset") {
    reject_unknown(spec, {"name", "kind", "description", "factors", "h_labels"}, "space");
    auto L = algebra_from(spec, "space");
    std::vector<Eigen::VectorXd> h;
    for (const auto& l : field<std::vector<std::string>>(spec, "h_labels", "space")) {
      auto it = std::find(L->labels().begin(), L->labels().end(), l);
      if (it == L->labels().end()) throw ParameterError("unknown basis label '" + l + "'");
      h.push_back(Eigen::VectorXd::Unit(L->dim(), static_cast<int>(it - L->labels().begin())));
    }
    out = build_coset(L, h);
  } else if (kind == "bundle") {
    reject_unknown(spec, {"name", "kind", "description", "factors", "c"}, "space");
    std::vector<HermitianFactorSpec> factors;
    if (!spec.contains("factors") || !spec["factors"].is_array()) throw ParameterError("bundle needs 'factors'");
    for (const auto& f : spec["factors"]) {
      reject_unknown(f, {"label", "scale"}, "space.factors[]");
      factors.push_back(hermitian_factor_from_string(field<std::string>(f, "label", "space.factors[]"),
                                                     f.contains("scale") ? field<double>(f, "scale", "space") : 0.0));
    }
    std::vector<double> c = spec.contains("c") ? field<std::vector<double>>(spec, "c", "space")
                                               : std::vector<double>(factors.size(), 1.0);
    out = build_s1_bundle(factors, c);
  } else if (kind == "root_level") {
    throw ParameterError("space '" + label + "' exists at root level only; use the criterion command with " +
                         spec.value("criterion", std::string("its label")));
  } else {
    throw ParameterError("unknown space kind '" + kind + "' (group, coset, bundle, root_level)");
  }
  out.name = label;
  return std::make_shared<const CosetDecomposition>(std::move(out));
}

std::shared_ptr<const CosetDecomposition> build_space(const std::string& text) {
  json spec = resolve_space_spec(text);
  return build_space(spec, find_space(text) ? text : spec.value("name", text));
}

RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base) {
  RunConfig c = base;
  reject_unknown(j, {"schema", "space", "metric", "scan", "tolerances", "output"}, "config");
  if (j.contains("schema") && j["schema"] != kConfigSchema)
    throw ParameterError("config schema must be '" + std::string(kConfigSchema) + "'");
  if (j.contains("space")) {
    if (j["space"].is_string())
      c.space = j["space"].get<std::string>();
    else
      c.space = j["space"].dump();
  }
  if (j.contains("metric")) {
    const json& m = j["metric"];
    reject_unknown(m, {"kind", "speed", "epsilon", "theta1", "theta2", "order", "glue_seed", "validate_samples",
                       "direction"},
                   "metric");
    overlay(m, "kind", c.metric.kind, "metric");
    overlay(m, "speed", c.metric.speed, "metric");
    if (m.contains("epsilon")) {
      if (m["epsilon"].is_null())
        c.metric.epsilon.reset();
      else
        c.metric.epsilon = field<double>(m, "epsilon", "metric");
    }
    overlay(m, "theta1", c.metric.glue.theta1, "metric");
    overlay(m, "theta2", c.metric.glue.theta2, "metric");
    overlay(m, "order", c.metric.glue.order, "metric");
    overlay(m, "glue_seed", c.metric.glue.seed, "metric");
    overlay(m, "validate_samples", c.metric.glue.validate_samples, "metric");
    overlay(m, "direction", c.metric.direction, "metric");
  }
  if (j.contains("scan")) {
    const json& s = j["scan"];
    reject_unknown(s, {"planes", "poles", "seed", "threads", "structured", "certificates"}, "scan");
    overlay(s, "planes", c.scan.planes, "scan");
    overlay(s, "poles", c.scan.poles, "scan");
    overlay(s, "seed", c.scan.seed, "scan");
    overlay(s, "threads", c.scan.threads, "scan");
    overlay(s, "structured", c.scan.structured, "scan");
    overlay(s, "certificates", c.scan.certificates, "scan");
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    reject_unknown(t, {"derivative_mode", "eta_step", "hessian_step", "cartan_step", "eta_zero", "positivity"},
                   "tolerances");
    if (t.contains("derivative_mode"))
      c.tolerances.mode = mode_from_string(field<std::string>(t, "derivative_mode", "tolerances"));
    overlay(t, "eta_step", c.tolerances.eta_step, "tolerances");
    overlay(t, "hessian_step", c.tolerances.hessian_step, "tolerances");
    overlay(t, "cartan_step", c.tolerances.cartan_step, "tolerances");
    overlay(t, "eta_zero", c.tolerances.eta_zero, "tolerances");
    overlay(t, "positivity", c.tolerances.positivity, "tolerances");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, {"path", "format"}, "output");
    overlay(o, "path", c.output.path, "output");
    overlay(o, "format", c.output.format, "output");
  }
  validate_config(c);
  return c;
}

RunConfig default_config() {
  static const RunConfig d = [] {
    RunConfig base;
    return config_from_json(catalog_document().at("defaults"), base);
  }();
  return d;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParameterError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
  json eps = c.metric.epsilon ? json(*c.metric.epsilon) : json(nullptr);
  return {{"schema", kConfigSchema},
          {"space", c.space},
          {"metric",
           {{"kind", c.metric.kind},
            {"speed", c.metric.speed},
            {"epsilon", eps},
            {"theta1", c.metric.glue.theta1},
            {"theta2", c.metric.glue.theta2},
            {"order", c.metric.glue.order},
            {"glue_seed", c.metric.glue.seed},
            {"validate_samples", c.metric.glue.validate_samples},
            {"direction", c.metric.direction}}},
          {"scan",
           {{"planes", c.scan.planes},
            {"poles", c.scan.poles},
            {"seed", c.scan.seed},
            {"threads", c.scan.threads},
            {"structured", c.scan.structured},
            {"certificates", c.scan.certificates}}},
          {"tolerances",
           {{"derivative_mode", to_string(c.tolerances.mode)},
            {"eta_step", c.tolerances.eta_step},
            {"hessian_step", c.tolerances.hessian_step},
            {"cartan_step", c.tolerances.cartan_step},
            {"eta_zero", c.tolerances.eta_zero},
            {"positivity", c.tolerances.positivity}}},
          {"output", {{"path", c.output.path}, {"format", c.output.format}}}};
}

void validate_config(const RunConfig& c) {
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string(what) + " must be positive");
  };
  positive(c.tolerances.eta_step, "tolerances.eta_step");
  positive(c.tolerances.hessian_step, "tolerances.hessian_step");
  positive(c.tolerances.cartan_step, "tolerances.cartan_step");
  positive(c.tolerances.eta_zero, "tolerances.eta_zero");
  positive(c.tolerances.positivity, "tolerances.positivity");
  if (c.metric.kind != "normal" && c.metric.kind != "navigated" && c.metric.kind != "glued")
    throw ParameterError("metric.kind must be normal, navigated or glued");
  if (!(c.metric.speed >= 0.0 && c.metric.speed < 1.0)) throw ParameterError("metric.speed must lie in [0, 1)");
  if (c.metric.epsilon && !(*c.metric.epsilon >= 0.0 && *c.metric.epsilon < 1.0))
    throw ParameterError("metric.epsilon must lie in [0, 1)");
  if (!(0.0 < c.metric.glue.theta1 && c.metric.glue.theta1 < c.metric.glue.theta2))
    throw ParameterError("metric cones need 0 < theta1 < theta2");
  if (c.metric.glue.order < 1) throw ParameterError("metric.order must be >= 1");
  if (c.metric.glue.validate_samples < 1) throw ParameterError("metric.validate_samples must be >= 1");
  if (c.scan.planes < 0 || c.scan.poles < 1) throw ParameterError("scan needs planes >= 0 and poles >= 1");
  if (c.scan.threads < 0) throw ParameterError("scan.threads must be >= 0");
  if (c.output.format != "json" && c.output.format != "text" && c.output.format != "csv")
    throw ParameterError("output.format must be json, text or csv");
}

CurvatureOptions curvature_options(const RunConfig& c) {
  CurvatureOptions o;
  o.mode = c.tolerances.mode;
  o.eta_step = c.tolerances.eta_step;
  o.hessian_step = c.tolerances.hessian_step;
  o.cartan_step = c.tolerances.cartan_step;
  o.eta_zero_tol = c.tolerances.eta_zero;
  return o;
}

int effective_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

BuiltMetric build_metric(std::shared_ptr<const CosetDecomposition> space, const RunConfig& cfg) {
  validate_config(cfg);
  const int n = space->dim_m();
  BuiltMetric out{MinkowskiNorm::euclidean(n), space, std::nullopt, json::object()};
  const std::string& kind = cfg.metric.kind;
  out.info["kind"] = kind;
  if (kind == "normal") {
    // bi-invariant restriction: the identity in the m frame
  } else if (kind == "navigated") {
    Eigen::VectorXd v;
    if (!cfg.metric.direction.empty()) {
      if (static_cast<int>(cfg.metric.direction.size()) != n)
        throw ParameterError("metric.direction needs " + std::to_string(n) + " m-frame coordinates");
      v = Eigen::Map<const Eigen::VectorXd>(cfg.metric.direction.data(), n);
    } else if (space->navigation_v) {
      v = space->to_m(*space->navigation_v);
    } else {
      throw ParameterError("navigated metric needs metric.direction (space has no bundle generator)");
    }
    if (!(v.norm() > 0.0)) throw ParameterError("navigation direction must be nonzero");
    v.normalize();
    out.norm = build_fp_metric(*space, v, cfg.metric.speed);
    out.info["speed"] = cfg.metric.speed;
    out.info["direction"] = std::vector<double>(v.data(), v.data() + v.size());
  } else {
    if (space->dim_h() != 0) throw ParameterError("glued metrics are left-invariant metrics on a group (h = 0)");
    GluedOptions opt = cfg.metric.glue;
    double eps;
    if (cfg.metric.epsilon) {
      eps = *cfg.metric.epsilon;
      out.info["epsilon_source"] = "config";
    } else {
      EpsilonSearch es = find_glue_epsilon(space->algebra, opt);
      eps = es.epsilon;
      out.info["epsilon_source"] = "bisection";
      out.info["epsilon_boundary"] = es.boundary;
    }
    GluedMetric g = build_rank2_glued(space->algebra, eps, opt);
    auto glued_space = std::make_shared<CosetDecomposition>(*g.space);
    glued_space->name = space->name;
    g.space = glued_space;
    out.space = glued_space;
    out.norm = g.norm;
    out.info["epsilon"] = eps;
    out.info["theta1"] = opt.theta1;
    out.info["theta2"] = opt.theta2;
    out.info["order"] = opt.order;
    out.info["validated_min_eigenvalue"] = g.report.min_eigenvalue;
    out.glued = std::move(g);
  }
  out.norm.derivative_step = cfg.tolerances.hessian_step;
  return out;
}


nlohmann::json describe_space(const CosetDecomposition& S) {
  int in_h = 0, in_m = 0, mixed = 0;
  for (auto loc : S.plane_location) {
    if (loc == PlaneLocation::in_h) ++in_h;
    else if (loc == PlaneLocation::in_m) ++in_m;
    else ++mixed;
  }
  json hats = json::array();
  for (const auto& f : hat_decomposition(S))
    hats.push_back({{"index", std::vector<double>(f.index.data(), f.index.data() + f.index.size())},
                    {"dim_m", f.basis.cols()},
                    {"dim_g", f.basis_g.cols()},
                    {"dim_h", f.basis_h.cols()},
                    {"root_planes", f.planes.size()}});
  json factors = json::array();
  for (const auto& f : S.algebra->factors())
    factors.push_back({{"family", to_string(f.family)}, {"n", f.n}, {"scale", f.scale}, {"dim", f.dim}});
  return {{"schema", kReportSchema},
          {"report", "describe"},
          {"space", S.name},
          {"factors", factors},
          {"dim_g", S.dim_g()},
          {"dim_h", S.dim_h()},
          {"dim_m", S.dim_m()},
          {"rank_g", S.rank_g()},
          {"rank_h", S.rank_h()},
          {"dim_t_cap_m", S.t_cap_m.cols()},
          {"roots", {{"total", 2 * S.cartan.planes.size()},
                     {"in_h", 2 * in_h},
                     {"in_m", 2 * in_m},
                     {"mixed", 2 * mixed}}},
          {"hat_families", hats},
          {"bundle", S.navigation_v.has_value()},
          {"checks", {{"orthogonality", S.checks.orthogonality},
                      {"subalgebra", S.checks.subalgebra},
                      {"reductivity", S.checks.reductivity},
                      {"dimension_ok", S.checks.dimension_ok},
                      {"fundamental_ok", S.checks.fundamental_ok}}}};
}

std::string describe_text(const nlohmann::json& d) {
  std::ostringstream os;
  os << "space      " << d.at("space").get<std::string>() << "\n"
     << "dim g      " << d.at("dim_g") << "\n"
     << "dim h      " << d.at("dim_h") << "\n"
     << "dim m      " << d.at("dim_m") << "\n"
     << "rk g       " << d.at("rank_g") << "\n"
     << "rk h       " << d.at("rank_h") << "\n"
     << "dim t∩m    " << d.at("dim_t_cap_m") << "\n"
     << "roots      " << d.at("roots").at("total") << " (h " << d.at("roots").at("in_h") << ", m "
     << d.at("roots").at("in_m") << ", mixed " << d.at("roots").at("mixed") << ")\n"
     << "hat sizes ";
  for (const auto& h : d.at("hat_families")) os << " " << h.at("dim_m");
  os << "\n";
  return os.str();
}

nlohmann::json curvature_report(const BuiltMetric& M, const Flag& flag, const RunConfig& cfg) {
  const CosetDecomposition& S = *M.space;
  CurvatureResult r = flag_curvature_detailed(S, M.norm, flag, curvature_options(cfg));
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j = {{"schema", kReportSchema},
            {"report", "curvature"},
            {"space", S.name},
            {"metric", M.info},
            {"pole", vec(flag.pole)},
            {"wing", vec(flag.wing)},
            {"K", r.K},
            {"numerator", r.numerator},
            {"denominator", r.denominator},
            {"eta_norm", r.eta_norm},
            {"condition_number", r.condition_number},
            {"ill_conditioned", r.ill_conditioned()},
            {"eta_skipped", r.eta_skipped}};
  j["oracle"] = cfg.metric.kind == "normal" ? json(sectional_oracle_normal(S, flag.pole, flag.wing)) : json(nullptr);
  try {
    j["commuting"] = flag_curvature_commuting(S, M.norm, flag.pole, flag.wing);
  } catch (const PreconditionError& e) {
    j["commuting"] = nullptr;
    j["commuting_reason"] = e.what();
  }
  return j;
}

FPReport check_fp(const BuiltMetric& M, const RunConfig& cfg) {
  ScanOptions o;
  o.threads = effective_threads(cfg.scan.threads);
  o.structured = cfg.scan.structured;
  o.certificates = cfg.scan.certificates;
  o.positivity = cfg.tolerances.positivity;
  o.curvature = curvature_options(cfg);
  if (M.glued) {
    o.axes = {M.glued->axis};
    o.extra_planes = {M.glued->t1.col(0), M.glued->t1.col(1)};
  }
  FPReport r = fp_scan(*M.space, M.norm, cfg.scan.planes, cfg.scan.poles, cfg.scan.seed, o);
  r.metric = M.info;
  return r;
}

bool fp_exit_ok(const FPReport& r) { return r.fp_verified && r.min_curvature_observed >= -r.positivity; }

std::string fp_text(const FPReport& r) {
  std::ostringstream os;
  os << "space        " << r.space_id << "\n"
     << "planes       " << r.planes.size() << " x " << r.n_poles << " poles, " << r.n_flags << " flags\n"
     << "min K        " << r.min_curvature_observed << "\n"
     << "certificates " << r.certificate_failures << " failures\n"
     << "errors       " << r.evaluation_errors << "\n"
     << "verified     " << (r.fp_verified ? "yes" : "no") << "\n";
  for (const auto& w : r.warnings) os << "warning      " << w << "\n";
  for (const auto& p : r.planes)
    if (!(p.best_curvature > r.positivity)) os << "plane " << p.id << " (" << p.kind << ") best " << p.best_curvature << "\n";
  return os.str();
}

}  // namespace flagcurv
