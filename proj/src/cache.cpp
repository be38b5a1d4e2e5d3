#include "flagcurv/cache.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flagcurv/error.hpp"
#include "flagcurv/roots.hpp"

namespace flagcurv {

namespace {

using nlohmann::json;

double effective_scale(Family family, double scale) { return scale == 0.0 ? default_scale(family) : scale; }

LieAlgebra build(Family family, int n, double scale) {
  return family == Family::abelian ? build_abelian(n, scale) : build_classical(family, n, scale);
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, int rows, int cols) {
  Eigen::MatrixXd M(rows, cols);
  if (!j.is_array() || static_cast<int>(j.size()) != rows) throw IoError("cache matrix has wrong shape");
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) throw IoError("cache matrix has wrong shape");
    for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

}  // namespace

std::string algebra_cache_key(Family family, int n, double scale) {
  std::ostringstream os;
  os << to_string(family) << "-" << n << "-" << std::hex << std::setw(16) << std::setfill('0')
     << std::bit_cast<std::uint64_t>(effective_scale(family, scale));
  return os.str();
}

AlgebraCacheEntry make_cache_entry(Family family, int n, double scale) {
  scale = effective_scale(family, scale);
  LieAlgebra L = build(family, n, scale);
  AlgebraCacheEntry e;
  e.family = family;
  e.n = n;
  e.scale = scale;
  e.dim = L.dim();
  e.labels = L.labels();
  for (int i = 0; i < e.dim; ++i)
    for (int j = i + 1; j < e.dim; ++j)
      for (int k = 0; k < e.dim; ++k)
        if (double c = L.constant(i, j, k); c != 0.0) e.constants.push_back({i, j, k, c});
  e.metric = L.metric();
  CartanData cd = root_decomposition(L, L.standard_cartan());
  e.t_basis = cd.t_basis;
  for (const auto& p : cd.planes) e.roots.push_back(p.alpha);
  return e;
}

nlohmann::json to_json(const AlgebraCacheEntry& e) {
  json constants = json::array();
  for (const auto& c : e.constants) constants.push_back({c.i, c.j, c.k, c.value});
  json roots = json::array();
  for (const auto& r : e.roots) roots.push_back(std::vector<double>(r.data(), r.data() + r.size()));
  return {{"schema", kAlgebraCacheSchema},
          {"key", algebra_cache_key(e.family, e.n, e.scale)},
          {"family", to_string(e.family)},
          {"n", e.n},
          {"scale", e.scale},
          {"dim", e.dim},
          {"labels", e.labels},
          {"constants", constants},
          {"metric", matrix_json(e.metric)},
          {"rank", e.t_basis.cols()},
          {"t_basis", matrix_json(e.t_basis)},
          {"roots", roots}};
}

AlgebraCacheEntry cache_entry_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema") != kAlgebraCacheSchema) throw IoError("cache schema mismatch");
    AlgebraCacheEntry e;
    e.family = family_from_string(j.at("family").get<std::string>());
    e.n = j.at("n").get<int>();
    e.scale = j.at("scale").get<double>();
    e.dim = j.at("dim").get<int>();
    if (j.at("key") != algebra_cache_key(e.family, e.n, e.scale)) throw IoError("cache key mismatch");
    e.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& c : j.at("constants"))
      e.constants.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>(), c.at(3).get<double>()});
    e.metric = matrix_from(j.at("metric"), e.dim, e.dim);
    const int rank = j.at("rank").get<int>();
    e.t_basis = matrix_from(j.at("t_basis"), e.dim, rank);
    for (const auto& r : j.at("roots")) {
      auto v = r.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != rank) throw IoError("cache root has wrong length");
      e.roots.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), rank));
    }
    return e;
  } catch (const json::exception& ex) {
    throw IoError(std::string("malformed algebra cache: ") + ex.what());
  } catch (const ParameterError& ex) {
    throw IoError(std::string("malformed algebra cache: ") + ex.what());
  }
}

double cache_deviation(const AlgebraCacheEntry& e, const LieAlgebra& L) {
  if (L.dim() != e.dim) return INFINITY;
  std::vector<double> dense(static_cast<std::size_t>(e.dim) * e.dim * e.dim, 0.0);
  for (const auto& c : e.constants) {
    if (c.i < 0 || c.j < 0 || c.k < 0 || c.i >= e.dim || c.j >= e.dim || c.k >= e.dim) return INFINITY;
    dense[(static_cast<std::size_t>(c.i) * e.dim + c.j) * e.dim + c.k] = c.value;
  }
  double dev = (e.metric - L.metric()).cwiseAbs().maxCoeff();
  for (int i = 0; i < e.dim; ++i)
    for (int j = i + 1; j < e.dim; ++j)
      for (int k = 0; k < e.dim; ++k)
        dev = std::max(dev, std::abs(dense[(static_cast<std::size_t>(i) * e.dim + j) * e.dim + k] - L.constant(i, j, k)));
  return dev;
}

CacheLookup load_or_build_cache(const std::string& dir, Family family, int n, double scale) {
  namespace fs = std::filesystem;
  CacheLookup out;
  out.path = (fs::path(dir) / (algebra_cache_key(family, n, scale) + ".json")).string();
  std::error_code ec;
  if (fs::is_regular_file(out.path, ec)) {
    std::ifstream in(out.path);
    try {
      json j = json::parse(in);
      out.entry = cache_entry_from_json(j);
      if (out.entry.family == family && out.entry.n == n && out.entry.scale == effective_scale(family, scale))
        return out;
    } catch (const std::exception&) {
      // stale or corrupt: rebuilt below
    }
  }
  out.entry = make_cache_entry(family, n, scale);
  out.regenerated = true;
  fs::create_directories(dir, ec);
  const std::string tmp = out.path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw IoError("cannot write algebra cache '" + tmp + "'");
    os << to_json(out.entry).dump(1) << "\n";
  }
  fs::rename(tmp, out.path, ec);
  if (ec) throw IoError("cannot move algebra cache into place: " + ec.message());
  return out;
}

}  // namespace flagcurv
