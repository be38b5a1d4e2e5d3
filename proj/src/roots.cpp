#include "flagcurv/roots.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "flagcurv/error.hpp"
#include "flagcurv/random.hpp"

namespace flagcurv {

bool RootSystem::negation_closed(double tol) const {
  for (const auto& r : roots)
    if (find(-r, tol) < 0) return false;
  return true;
}

bool RootSystem::has_zero_root(double tol) const {
  for (const auto& r : roots)
    if (r.norm() <= tol) return true;
  return false;
}

int RootSystem::find(const Eigen::VectorXd& x, double tol) const {
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (roots[i].size() == x.size() && (roots[i] - x).norm() <= tol) return static_cast<int>(i);
  return -1;
}

namespace {

bool lex_positive(const Eigen::VectorXd& x, double tol = 1e-9) {
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] > tol) return true;
    if (x[i] < -tol) return false;
  }
  return false;
}

// Lexicographic comparison with tolerance, descending.
bool lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol = 1e-9) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] > b[i] + tol) return true;
    if (a[i] < b[i] - tol) return false;
  }
  return false;
}

}  // namespace

Eigen::MatrixXd orthonormalize(const LieAlgebra& L, const std::vector<Eigen::VectorXd>& vectors,
                               double pivot_tol) {
  Eigen::MatrixXd cols(L.dim(), static_cast<int>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != L.dim()) throw ParameterError("vector length does not match algebra dimension");
    cols.col(static_cast<int>(i)) = vectors[i];
  }
  return orthonormalize(L, cols, pivot_tol);
}

Eigen::MatrixXd orthonormalize(const LieAlgebra& L, const Eigen::MatrixXd& columns, double pivot_tol) {
  const Eigen::MatrixXd& G = L.metric();
  std::vector<Eigen::VectorXd> out;
  for (int c = 0; c < columns.cols(); ++c) {
    Eigen::VectorXd v = columns.col(c);
    double scale = std::sqrt(std::max(v.dot(G * v), 0.0));
    if (scale <= pivot_tol) continue;
    v /= scale;
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : out) v -= e.dot(G * v) * e;
    double n = std::sqrt(std::max(v.dot(G * v), 0.0));
    if (n <= pivot_tol) continue;
    out.push_back(v / n);
  }
  Eigen::MatrixXd res(L.dim(), static_cast<int>(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) res.col(static_cast<int>(i)) = out[i];
  return res;
}

RootSystem CartanData::root_system() const {
  RootSystem rs;
  rs.rank = rank();
  rs.family = "computed";
  for (const auto& p : planes) {
    rs.roots.push_back(p.alpha);
    rs.roots.push_back(-p.alpha);
  }
  return rs;
}

double CartanData::block_residual(const LieAlgebra& L) const {
  double worst = 0.0;
  for (int k = 0; k < rank(); ++k) {
    Eigen::VectorXd h = t_basis.col(k);
    for (const auto& pl : planes) {
      double a = pl.alpha[k];
      worst = std::max(worst, L.norm(L.bracket(h, pl.p) - a * pl.q));
      worst = std::max(worst, L.norm(L.bracket(h, pl.q) + a * pl.p));
    }
  }
  return worst;
}

CartanData root_decomposition(const LieAlgebra& L, const std::vector<Eigen::VectorXd>& cartan_basis,
                              std::uint64_t seed) {
  const int d = L.dim();
  for (const auto& x : cartan_basis)
    if (x.size() != d) throw ParameterError("cartan basis vector has wrong length");
  CartanData out;
  out.t_basis = orthonormalize(L, cartan_basis);
  const int r = static_cast<int>(out.t_basis.cols());
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      double c = L.norm(L.bracket(out.t_basis.col(i), out.t_basis.col(j)));
      if (c > 1e-10)
        throw PreconditionError("cartan basis vectors " + std::to_string(i) + " and " + std::to_string(j) +
                                " do not commute (|[x,y]| = " + std::to_string(c) + ")");
    }
  if (r == d) return out;
  if (r == 0) throw DecompositionError("empty cartan basis of a non-abelian algebra is not maximal abelian");

  // Orthonormal frame Q of g: Q^T G Q = I.
  Eigen::LLT<Eigen::MatrixXd> llt(L.metric());
  Eigen::MatrixXd Lt = llt.matrixU();
  Eigen::MatrixXd Q = Lt.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(d, d));

  Rng rng(seed);
  std::string last_problem;
  for (int attempt = 0; attempt < 32; ++attempt) {
    Eigen::VectorXd h0 = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < r; ++k) h0 += (0.5 + rng.uniform()) * out.t_basis.col(k) * (k % 2 == 0 ? 1.0 : -1.0);
    Eigen::MatrixXd A0 = Lt * L.ad(h0) * Q;
    A0 = 0.5 * (A0 - A0.transpose()).eval();
    Eigen::MatrixXd S = -(A0 * A0);
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const Eigen::VectorXd& lam = es.eigenvalues();
    double lmax = std::max(lam.maxCoeff(), 1e-300);
    int zeros = 0;
    while (zeros < d && lam[zeros] < 1e-9 * lmax) ++zeros;
    if (zeros != r) {
      last_problem = "centralizer of a generic element has dimension " + std::to_string(zeros) +
                     " but the cartan basis has dimension " + std::to_string(r);
      continue;
    }
    // Group the nonzero eigenvalues; each group must be one root plane.
    std::vector<std::pair<int, int>> groups;
    for (int i = zeros; i < d;) {
      int j = i + 1;
      while (j < d && std::sqrt(lam[j]) - std::sqrt(lam[i]) <= 1e-6 * std::sqrt(lmax)) ++j;
      groups.push_back({i, j});
      i = j;
    }
    bool collision = false;
    for (auto [a, b] : groups)
      if (b - a != 2) collision = true;
    if (collision) {
      last_problem = "root planes could not be separated";
      continue;
    }
    out.planes.clear();
    for (auto [a, b] : groups) {
      Eigen::VectorXd po = es.eigenvectors().col(a);
      double theta = std::sqrt(lam[a]);
      Eigen::VectorXd qo = A0 * po / theta;
      qo /= qo.norm();
      RootPlane pl;
      pl.p = Q * po;
      pl.q = Q * qo;
      pl.alpha.resize(r);
      for (int k = 0; k < r; ++k) pl.alpha[k] = L.inner(L.bracket(out.t_basis.col(k), pl.p), pl.q);
      if (!lex_positive(pl.alpha)) {
        pl.alpha = -pl.alpha;
        pl.q = -pl.q;
      }
      pl.alpha_g = out.t_basis * pl.alpha;
      out.planes.push_back(pl);
    }
    std::stable_sort(out.planes.begin(), out.planes.end(),
                     [](const RootPlane& x, const RootPlane& y) { return lex_greater(x.alpha, y.alpha); });
    double res = out.block_residual(L);
    if (res > 1e-8)
      throw DecompositionError("off-block residual " + std::to_string(res) +
                               " exceeds 1e-8; the cartan basis is not maximal abelian");
    return out;
  }
  throw DecompositionError(last_problem + "; the cartan basis is not maximal abelian");
}

RootFamily root_family_from_string(const std::string& name) {
  if (name == "A") return RootFamily::A;
  if (name == "B") return RootFamily::B;
  if (name == "C") return RootFamily::C;
  if (name == "D") return RootFamily::D;
  if (name == "E6") return RootFamily::E6;
  if (name == "E7") return RootFamily::E7;
  throw ParameterError("unknown root system family '" + name + "'");
}

const char* to_string(RootFamily family) {
  switch (family) {
    case RootFamily::A: return "A";
    case RootFamily::B: return "B";
    case RootFamily::C: return "C";
    case RootFamily::D: return "D";
    case RootFamily::E6: return "E6";
    case RootFamily::E7: return "E7";
  }
  return "?";
}

RootSystem abstract_root_system(RootFamily family, int rank) {
  RootSystem rs;
  rs.family = to_string(family);
  rs.scale = {1.0};
  auto e = [](int n, int i) { return Eigen::VectorXd::Unit(n, i); };
  auto pm_pairs = [&](int n, int upto) {
    for (int i = 0; i < upto; ++i)
      for (int j = i + 1; j < upto; ++j)
        for (int si : {1, -1})
          for (int sj : {1, -1}) rs.roots.push_back(si * e(n, i) + sj * e(n, j));
  };
  switch (family) {
    case RootFamily::A:
      if (rank < 1) throw ParameterError("A_r requires r >= 1");
      rs.rank = rank + 1;
      for (int i = 0; i <= rank; ++i)
        for (int j = 0; j <= rank; ++j)
          if (i != j) rs.roots.push_back(e(rank + 1, i) - e(rank + 1, j));
      break;
    case RootFamily::B:
      if (rank < 2) throw ParameterError("B_r requires r >= 2");
      rs.rank = rank;
      for (int i = 0; i < rank; ++i) {
        rs.roots.push_back(e(rank, i));
        rs.roots.push_back(-e(rank, i));
      }
      pm_pairs(rank, rank);
      break;
    case RootFamily::C:
      if (rank < 1) throw ParameterError("C_r requires r >= 1");
      rs.rank = rank;
      for (int i = 0; i < rank; ++i) {
        rs.roots.push_back(2.0 * e(rank, i));
        rs.roots.push_back(-2.0 * e(rank, i));
      }
      pm_pairs(rank, rank);
      break;
    case RootFamily::D:
      if (rank < 2) throw ParameterError("D_r requires r >= 2");
      rs.rank = rank;
      pm_pairs(rank, rank);
      break;
    case RootFamily::E6: {
      if (rank != 6) throw ParameterError("E6 has rank 6");
      rs.rank = 6;
      pm_pairs(6, 5);
      const double s3 = std::sqrt(3.0) / 2.0;
      for (int mask = 0; mask < 64; ++mask) {
        int plus = __builtin_popcount(mask);
        if (plus % 2 == 0) continue;
        Eigen::VectorXd v(6);
        for (int i = 0; i < 5; ++i) v[i] = (mask >> i & 1) ? 0.5 : -0.5;
        v[5] = (mask >> 5 & 1) ? s3 : -s3;
        rs.roots.push_back(v);
      }
      break;
    }
    case RootFamily::E7: {
      if (rank != 7) throw ParameterError("E7 has rank 7");
      rs.rank = 7;
      pm_pairs(7, 6);
      const double s2 = std::sqrt(2.0);
      rs.roots.push_back(s2 * e(7, 6));
      rs.roots.push_back(-s2 * e(7, 6));
      for (int mask = 0; mask < 128; ++mask) {
        int plus = __builtin_popcount(mask & 63);
        if (plus % 2 == 0) continue;
        Eigen::VectorXd v(7);
        for (int i = 0; i < 6; ++i) v[i] = (mask >> i & 1) ? 0.5 : -0.5;
        v[6] = (mask >> 6 & 1) ? s2 / 2.0 : -s2 / 2.0;
        rs.roots.push_back(v);
      }
      break;
    }
  }
  return rs;
}

RootSystem product_root_system(const std::vector<RootSystem>& parts) {
  if (parts.empty()) throw ParameterError("product of zero root systems");
  RootSystem rs;
  rs.family = "product";
  for (const auto& p : parts) rs.rank += p.rank;
  int off = 0;
  for (const auto& p : parts) {
    for (const auto& r : p.roots) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(rs.rank);
      v.segment(off, p.rank) = r;
      rs.roots.push_back(v);
    }
    for (double s : p.scale) rs.scale.push_back(s);
    off += p.rank;
  }
  return rs;
}

std::vector<double> root_lengths(const RootSystem& rs, double tol) {
  std::vector<double> out;
  for (const auto& r : rs.roots) {
    double n = r.norm();
    bool seen = false;
    for (double x : out)
      if (std::abs(x - n) <= tol) seen = true;
    if (!seen) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd procrustes(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y * X.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

std::optional<Isometry> find_isometry(const RootSystem& from, const RootSystem& to,
                                      const std::vector<int>& from_labels, const std::vector<int>& to_labels,
                                      const std::vector<IsometryConstraint>& constraints, double tol) {
  const int n = static_cast<int>(from.roots.size());
  if (n != static_cast<int>(to.roots.size())) return std::nullopt;
  if (n == 0) {
    Isometry iso;
    iso.Q = Eigen::MatrixXd::Zero(to.rank, from.rank);
    return iso;
  }
  auto label_ok = [&](int a, int b) {
    if (from_labels.empty() || to_labels.empty()) return true;
    return from_labels[a] == to_labels[b];
  };
  // Greedy basis of independent source roots.
  std::vector<int> basis;
  {
    Eigen::MatrixXd M(from.rank, 0);
    for (int i = 0; i < n && static_cast<int>(basis.size()) < from.rank; ++i) {
      Eigen::MatrixXd T(from.rank, M.cols() + 1);
      T << M, from.roots[i];
      Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
      lu.setThreshold(1e-9);
      if (lu.rank() == T.cols()) {
        M = T;
        basis.push_back(i);
      }
    }
  }
  const int k = static_cast<int>(basis.size());
  Eigen::MatrixXd B(from.rank, k);
  for (int i = 0; i < k; ++i) B.col(i) = from.roots[basis[i]];

  std::vector<int> choice(k, -1);
  std::optional<Isometry> result;

  auto try_complete = [&]() -> bool {
    Eigen::MatrixXd C(to.rank, k);
    for (int i = 0; i < k; ++i) C.col(i) = to.roots[choice[i]];
    // Q B = C; B has full column rank k.
    Eigen::MatrixXd Q = C * (B.transpose() * B).ldlt().solve(B.transpose());
    if (k < from.rank) return false;
    if ((Q.transpose() * Q - Eigen::MatrixXd::Identity(from.rank, from.rank)).norm() > tol * 10) return false;
    for (const auto& c : constraints) {
      Eigen::VectorXd img = Q * c.from;
      bool ok = (img - c.to).norm() <= tol * std::max(1.0, c.to.norm()) * 10;
      if (!ok && c.sign_free) ok = (img + c.to).norm() <= tol * std::max(1.0, c.to.norm()) * 10;
      if (!ok) return false;
    }
    std::vector<int> mapping(n, -1);
    std::vector<char> used(n, 0);
    for (int i = 0; i < n; ++i) {
      int j = to.find(Q * from.roots[i], 1e-6);
      if (j < 0 || used[j] || !label_ok(i, j)) return false;
      used[j] = 1;
      mapping[i] = j;
    }
    Eigen::MatrixXd X(from.rank, n), Y(to.rank, n);
    for (int i = 0; i < n; ++i) {
      X.col(i) = from.roots[i];
      Y.col(i) = to.roots[mapping[i]];
    }
    Eigen::MatrixXd Qf = procrustes(X, Y);
    double res = 0.0;
    for (int i = 0; i < n; ++i) res = std::max(res, (Qf * X.col(i) - Y.col(i)).norm());
    if (res > tol) return false;
    result = Isometry{Qf, mapping, res};
    return true;
  };

  std::function<bool(int)> search = [&](int level) -> bool {
    if (level == k) return try_complete();
    const Eigen::VectorXd& a = from.roots[basis[level]];
    for (int j = 0; j < n; ++j) {
      if (!label_ok(basis[level], j)) continue;
      const Eigen::VectorXd& b = to.roots[j];
      if (std::abs(a.squaredNorm() - b.squaredNorm()) > 1e-7) continue;
      bool consistent = true;
      for (int l = 0; l < level && consistent; ++l) {
        if (choice[l] == j) consistent = false;
        double ga = a.dot(from.roots[basis[l]]);
        double gb = b.dot(to.roots[choice[l]]);
        if (std::abs(ga - gb) > 1e-7) consistent = false;
      }
      if (!consistent) continue;
      choice[level] = j;
      if (search(level + 1)) return true;
    }
    choice[level] = -1;
    return false;
  };
  search(0);
  return result;
}

}  // namespace flagcurv
