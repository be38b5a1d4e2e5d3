#include "flagcurv.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "flagcurv/catalog.hpp"
#include "flagcurv/criterion.hpp"
#include "flagcurv/error.hpp"
#include "flagcurv/reproduce.hpp"

using namespace flagcurv;
using nlohmann::json;

struct fc_space {
  std::shared_ptr<const CosetDecomposition> space;
};

struct fc_metric {
  BuiltMetric built;
  RunConfig config;
};

namespace {

thread_local std::string last_error;

fc_status fail(ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<fc_status>(code);
}

template <class F>
fc_status guard(F&& body) {
  try {
    last_error.clear();
    body();
    return FC_OK;
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const json::exception& e) {
    return fail(ErrorCode::parameter, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ErrorCode::internal, "out of memory");
  } catch (const std::exception& e) {
    return fail(ErrorCode::internal, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw ParameterError(std::string(what) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string format_or(const char* format, const char* fallback) { return format && *format ? format : fallback; }

RunConfig resolve(const char* config_json) {
  if (!config_json || !*config_json) return default_config();
  json j;
  try {
    j = json::parse(config_json);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

Eigen::VectorXd vector_arg(const double* p, int n, int expected, const char* what) {
  require(p, what);
  if (n != expected)
    throw ParameterError(std::string(what) + " needs " + std::to_string(expected) + " coordinates, got " +
                         std::to_string(n));
  return Eigen::Map<const Eigen::VectorXd>(p, n);
}

const std::vector<std::string>& table_cases() {
  static const std::vector<std::string> c = {"A(3,2)", "A(4,4)", "C(5)", "D(5)", "E6",
                                             "E7",     "A(1,1)", "A(2,1)", "A(3,1)"};
  return c;
}

}  // namespace

extern "C" {

const char* fc_version(void) { return "1.0.0"; }

const char* fc_last_error(void) { return last_error.c_str(); }

const char* fc_status_name(fc_status status) { return to_string(static_cast<ErrorCode>(status)); }

void fc_string_free(char* s) { std::free(s); }

fc_status fc_catalog_json(char** out) {
  return guard([&] {
    require(out, "out");
    *out = copy_string(dump(catalog_document()));
  });
}

fc_status fc_defaults_json(char** out) {
  return guard([&] {
    require(out, "out");
    *out = copy_string(dump(to_json(default_config())));
  });
}

fc_status fc_config_resolve(const char* config_json, char** out) {
  return guard([&] {
    require(out, "out");
    *out = copy_string(dump(to_json(resolve(config_json))));
  });
}

fc_status fc_space_open(const char* spec, fc_space** out) {
  return guard([&] {
    require(spec, "spec");
    require(out, "out");
    *out = nullptr;
    auto s = std::make_unique<fc_space>();
    s->space = build_space(std::string(spec));
    *out = s.release();
  });
}

void fc_space_free(fc_space* space) { delete space; }

int fc_space_dim_m(const fc_space* space) { return space ? space->space->dim_m() : -1; }

fc_status fc_space_describe(const fc_space* space, const char* format, char** out) {
  return guard([&] {
    require(space, "space");
    require(out, "out");
    json d = describe_space(*space->space);
    const std::string f = format_or(format, "json");
    if (f == "json") *out = copy_string(dump(d));
    else if (f == "text") *out = copy_string(describe_text(d));
    else throw ParameterError("describe supports json and text output");
  });
}

fc_status fc_metric_build(const fc_space* space, const char* config_json, fc_metric** out) {
  return guard([&] {
    require(space, "space");
    require(out, "out");
    *out = nullptr;
    RunConfig cfg = resolve(config_json);
    auto m = std::unique_ptr<fc_metric>(new fc_metric{build_metric(space->space, cfg), cfg});
    *out = m.release();
  });
}

void fc_metric_free(fc_metric* metric) { delete metric; }

int fc_metric_dim(const fc_metric* metric) { return metric ? metric->built.norm.dim() : -1; }

fc_status fc_metric_info(const fc_metric* metric, char** out) {
  return guard([&] {
    require(metric, "metric");
    require(out, "out");
    *out = copy_string(dump(metric->built.info));
  });
}

fc_status fc_metric_norm(const fc_metric* metric, const double* y, int n, double* value) {
  return guard([&] {
    require(metric, "metric");
    require(value, "value");
    *value = evaluate(metric->built.norm, vector_arg(y, n, metric->built.norm.dim(), "y"));
  });
}

fc_status fc_flag_curvature(const fc_metric* metric, const double* pole, const double* wing, int n, double* value) {
  return guard([&] {
    require(metric, "metric");
    require(value, "value");
    const int d = metric->built.norm.dim();
    Flag f{vector_arg(pole, n, d, "pole"), vector_arg(wing, n, d, "wing")};
    *value = flag_curvature(*metric->built.space, metric->built.norm, f, curvature_options(metric->config));
  });
}

fc_status fc_curvature_report(const fc_metric* metric, const double* pole, const double* wing, int n, char** out) {
  return guard([&] {
    require(metric, "metric");
    require(out, "out");
    const int d = metric->built.norm.dim();
    Flag f{vector_arg(pole, n, d, "pole"), vector_arg(wing, n, d, "wing")};
    *out = copy_string(dump(curvature_report(metric->built, f, metric->config)));
  });
}

fc_status fc_check_fp(const fc_metric* metric, const char* format, char** out, int* verified) {
  return guard([&] {
    require(metric, "metric");
    require(out, "out");
    const std::string f = format_or(format, "json");
    if (f != "json" && f != "text" && f != "csv") throw ParameterError("check-fp supports json, text and csv output");
    FPReport r = check_fp(metric->built, metric->config);
    if (verified) *verified = fp_exit_ok(r) ? 1 : 0;
    if (f == "json") {
      json j = to_json(r);
      j["schema"] = kReportSchema;
      j["report"] = "check-fp";
      *out = copy_string(dump(j));
    } else if (f == "text") {
      *out = copy_string(fp_text(r));
    } else {
      std::ostringstream os;
      write_csv(r, os);
      *out = copy_string(os.str());
    }
  });
}

fc_status fc_criterion(const char* spec, int threads, const char* format, char** out) {
  return guard([&] {
    require(spec, "spec");
    require(out, "out");
    const std::string f = format_or(format, "json");
    if (f != "json" && f != "text") throw ParameterError("criterion supports json and text output");
    const std::string s = spec;
    const int t = effective_threads(threads);
    std::vector<CriterionRow> rows;
    json j = {{"schema", kReportSchema}, {"report", "criterion"}};
    if (s == "table") {
      json arr = json::array();
      for (const auto& c : table_cases()) {
        rows.push_back(criterion_row(c, t));
        arr.push_back(row_to_json(rows.back()));
      }
      j["rows"] = arr;
    } else if (s.find('@') != std::string::npos || s.find('+') != std::string::npos) {
      ProductSpec ps = parse_product_spec(s);
      rows.push_back(criterion_row(s, t));
      j["rows"] = json::array({row_to_json(rows.back())});
      j["verdict"] = verdict_to_json(ps, product_case_check(ps));
    } else {
      CriterionInstance inst = catalog_case(s);
      rows.push_back(criterion_row(s, t));
      j["rows"] = json::array({row_to_json(rows.back())});
      j["instance"] = inst;
      j["pairs"] = pairs_to_json(inst, enumerate_root_pairs(inst, t));
    }
    *out = copy_string(f == "json" ? dump(j) : rows_to_text(rows));
  });
}

fc_status fc_reproduce(const char* tags, uint64_t seed, int threads, const char* format, char** out, int* acceptable,
                       int* all_pass) {
  return guard([&] {
    require(out, "out");
    const std::string f = format_or(format, "json");
    if (f != "json" && f != "text") throw ParameterError("reproduce supports json and text output");
    ReproduceOptions opt;
    opt.seed = seed;
    opt.threads = effective_threads(threads);
    if (tags && *tags) {
      std::stringstream ss(tags);
      std::string t;
      while (std::getline(ss, t, ','))
        if (!t.empty()) opt.tags.push_back(t);
    }
    ReproduceReport r = reproduce(opt);
    if (acceptable) *acceptable = r.acceptable() ? 1 : 0;
    if (all_pass) *all_pass = r.all_pass() ? 1 : 0;
    *out = copy_string(f == "json" ? dump(to_json(r)) : to_text(r));
  });
}

}  // extern "C"
