// Command-line front end over the C API.
// Exit codes: 0 success or verified, 1 verified false, 2 usage, 3 numerical.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flagcurv.h"
#include "json.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFalse = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(fc_status s) {
  return s == FC_ERR_PARAMETER || s == FC_ERR_IO ? kExitUsage : kExitNumerical;
}

void check(fc_status s) {
  if (s != FC_OK) throw Failure{exit_code_for(s), std::string(fc_status_name(s)) + ": " + fc_last_error()};
}

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  fc_string_free(s);
  return out;
}

struct SpaceHandle {
  fc_space* p = nullptr;
  ~SpaceHandle() { fc_space_free(p); }
};

struct MetricHandle {
  fc_metric* p = nullptr;
  ~MetricHandle() { fc_metric_free(p); }
};

struct Options {
  std::string config_path;
  std::optional<std::string> space, metric, format, out, pole, wing, tags;
  std::optional<double> speed, epsilon;
  std::optional<int> planes, poles, threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Options& o, bool scan) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--space", o.space, "catalog name, bundle:<factors>@<c>, JSON object or JSON file");
  cmd->add_option("--metric", o.metric, "normal, navigated or glued");
  cmd->add_option("--speed", o.speed, "navigation speed in [0,1)");
  cmd->add_option("--epsilon", o.epsilon, "glue strength (default: bisection)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out, "output file (default stdout)");
  cmd->add_option("--format", o.format, "json, text or csv");
  if (scan) {
    cmd->add_option("--planes", o.planes, "random planes");
    cmd->add_option("--poles", o.poles, "poles per plane");
    cmd->add_option("--threads", o.threads, "worker threads (0: available parallelism)");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kExitUsage, "cannot read '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config file overlaid with the command-line flags, validated by the library.
json resolved_config(const Options& o) {
  json j = json::object();
  if (!o.config_path.empty()) {
    try {
      j = json::parse(read_file(o.config_path));
    } catch (const json::exception& e) {
      throw Failure{kExitUsage, "config '" + o.config_path + "' is not valid JSON: " + e.what()};
    }
  }
  if (o.space) j["space"] = *o.space;
  if (o.metric) j["metric"]["kind"] = *o.metric;
  if (o.speed) j["metric"]["speed"] = *o.speed;
  if (o.epsilon) j["metric"]["epsilon"] = *o.epsilon;
  if (o.planes) j["scan"]["planes"] = *o.planes;
  if (o.poles) j["scan"]["poles"] = *o.poles;
  if (o.seed) j["scan"]["seed"] = *o.seed;
  if (o.threads) j["scan"]["threads"] = *o.threads;
  if (o.format) j["output"]["format"] = *o.format;
  if (o.out) j["output"]["path"] = *o.out;
  char* s = nullptr;
  check(fc_config_resolve(j.dump().c_str(), &s));
  return json::parse(take(s));
}

void emit(const json& cfg, const std::string& text) {
  const std::string path = cfg["output"]["path"].get<std::string>();
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw Failure{kExitUsage, "cannot write '" + path + "'"};
  os << text;
}

std::string space_spec(const json& cfg) { return cfg["space"].get<std::string>(); }

std::vector<double> parse_vector(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{kExitUsage, "bad coordinate '" + item + "' in '" + s + "'"};
    }
  }
  return v;
}

std::vector<double> random_vector(std::mt19937_64& eng, int n) {
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * static_cast<double>(eng() >> 11) * 0x1.0p-53 - 1.0;
  return v;
}

int cmd_defaults(const Options& o) {
  char* s = nullptr;
  check(fc_defaults_json(&s));
  json cfg = resolved_config(o);
  emit(cfg, take(s));
  return kExitOk;
}

int cmd_describe(const Options& o) {
  json cfg = resolved_config(o);
  SpaceHandle sp;
  check(fc_space_open(space_spec(cfg).c_str(), &sp.p));
  char* s = nullptr;
  check(fc_space_describe(sp.p, cfg["output"]["format"].get<std::string>().c_str(), &s));
  emit(cfg, take(s));
  return kExitOk;
}

int cmd_curvature(const Options& o) {
  json cfg = resolved_config(o);
  const std::string format = cfg["output"]["format"];
  if (format != "json") throw Failure{kExitUsage, "curvature writes JSON only"};
  SpaceHandle sp;
  check(fc_space_open(space_spec(cfg).c_str(), &sp.p));
  MetricHandle m;
  check(fc_metric_build(sp.p, cfg.dump().c_str(), &m.p));
  const int n = fc_metric_dim(m.p);
  std::mt19937_64 eng(cfg["scan"]["seed"].get<std::uint64_t>());
  std::vector<double> pole = o.pole ? parse_vector(*o.pole) : random_vector(eng, n);
  std::vector<double> wing = o.wing ? parse_vector(*o.wing) : random_vector(eng, n);
  if (static_cast<int>(pole.size()) != n || static_cast<int>(wing.size()) != n)
    throw Failure{kExitUsage, "pole and wing need " + std::to_string(n) + " m-frame coordinates"};
  char* s = nullptr;
  check(fc_curvature_report(m.p, pole.data(), wing.data(), n, &s));
  emit(cfg, take(s));
  return kExitOk;
}

int cmd_check_fp(const Options& o) {
  json cfg = resolved_config(o);
  SpaceHandle sp;
  check(fc_space_open(space_spec(cfg).c_str(), &sp.p));
  MetricHandle m;
  check(fc_metric_build(sp.p, cfg.dump().c_str(), &m.p));
  char* s = nullptr;
  int verified = 0;
  check(fc_check_fp(m.p, cfg["output"]["format"].get<std::string>().c_str(), &s, &verified));
  emit(cfg, take(s));
  return verified ? kExitOk : kExitFalse;
}

int cmd_criterion(const Options& o, const std::string& spec) {
  json cfg = resolved_config(o);
  char* s = nullptr;
  check(fc_criterion(spec.c_str(), cfg["scan"]["threads"].get<int>(), cfg["output"]["format"].get<std::string>().c_str(),
                     &s));
  emit(cfg, take(s));
  return kExitOk;
}

int cmd_reproduce(const Options& o) {
  json cfg = resolved_config(o);
  char* s = nullptr;
  int acceptable = 0, all_pass = 0;
  check(fc_reproduce(o.tags ? o.tags->c_str() : "", cfg["scan"]["seed"].get<std::uint64_t>(),
                     cfg["scan"]["threads"].get<int>(), cfg["output"]["format"].get<std::string>().c_str(), &s,
                     &acceptable, &all_pass));
  emit(cfg, take(s));
  return acceptable ? kExitOk : kExitFalse;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flag curvature of homogeneous Finsler spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fc_version());
  Options o;
  std::string criterion_spec = "table";

  auto* defaults = app.add_subcommand("defaults", "print the default configuration");
  defaults->add_option("--out", o.out, "output file (default stdout)");
  auto* describe = app.add_subcommand("describe", "dimensions, ranks and root data of a space");
  add_common(describe, o, false);
  auto* curvature = app.add_subcommand("curvature", "flag curvature of a single flag");
  add_common(curvature, o, false);
  curvature->add_option("--pole", o.pole, "comma-separated m-frame coordinates (default random)");
  curvature->add_option("--wing", o.wing, "comma-separated m-frame coordinates (default random)");
  auto* check_fp = app.add_subcommand("check-fp", "scan planes for a positively curved flag");
  add_common(check_fp, o, true);
  auto* criterion = app.add_subcommand("criterion", "root-pair exclusion test");
  criterion->add_option("case", criterion_spec, "A(p,q), C(n), D(n), Q(n), E6, E7, F1+F2+...@c1,c2,... or table");
  criterion->add_option("--threads", o.threads, "worker threads");
  criterion->add_option("--format", o.format, "json or text");
  criterion->add_option("--out", o.out, "output file (default stdout)");
  auto* repro = app.add_subcommand("reproduce", "run the acceptance suite");
  repro->add_option("--tags", o.tags, "comma-separated subset: algebra, oracle, navigation, fp-scan, glued, "
                                      "criterion, determinism");
  repro->add_option("--seed", o.seed, "random seed");
  repro->add_option("--threads", o.threads, "worker threads");
  repro->add_option("--format", o.format, "json or text");
  repro->add_option("--out", o.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (*defaults) return cmd_defaults(o);
    if (*describe) return cmd_describe(o);
    if (*curvature) return cmd_curvature(o);
    if (*check_fp) return cmd_check_fp(o);
    if (*criterion) return cmd_criterion(o, criterion_spec);
    if (*repro) return cmd_reproduce(o);
  } catch (const Failure& f) {
    std::cerr << "flagcurv: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "flagcurv: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
