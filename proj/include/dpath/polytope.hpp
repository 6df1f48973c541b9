#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpath/errors.hpp"
#include "dpath/patterns.hpp"
#include "dpath/system.hpp"

namespace dpath {

inline constexpr double kDefaultTol = 1e-9;

/**
 * M x = b with x >= 0, together with its row reduction. Rows that do not raise
 * the rank are dropped greedily in order; if one of them disagrees with the
 * kept rows the system is inconsistent and the polytope is empty.
 */
struct ConstraintSystem {
  Mat M;
  Vec b;
  int rank = 0;
  double tol = kDefaultTol;
  std::vector<int> kept_rows;
  std::vector<int> redundant_rows;
  bool consistent = true;
  Mat reduced_M;
  Vec reduced_b;

  double scale() const { return 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0); }
};

inline ConstraintSystem make_constraint_system(Mat M, Vec b, double tol = kDefaultTol) {
  if (M.rows() != b.size()) throw InvalidArgument("constraint system: rhs length does not match row count");
  if (!(tol > 0.0)) throw InvalidArgument("constraint system: tolerance must be positive");
  ConstraintSystem cs;
  cs.M = std::move(M);
  cs.b = std::move(b);
  cs.tol = tol;
  const Eigen::Index m = cs.M.cols();
  Mat kept(0, m);
  Vec kept_b(0);
  for (Eigen::Index r = 0; r < cs.M.rows(); ++r) {
    Mat trial(kept.rows() + 1, m);
    trial << kept, cs.M.row(r);
    if (m > 0 && numerical_rank(trial, tol) > kept.rows()) {
      kept = std::move(trial);
      kept_b.conservativeResize(kept_b.size() + 1);
      kept_b[kept_b.size() - 1] = cs.b[r];
      cs.kept_rows.push_back(static_cast<int>(r));
      continue;
    }
    cs.redundant_rows.push_back(static_cast<int>(r));
    // express the dropped row through the kept ones and compare right-hand sides
    double expected = 0.0;
    double weight = 1.0;
    if (kept.rows() > 0) {
      Vec alpha = kept.transpose().completeOrthogonalDecomposition().solve(cs.M.row(r).transpose());
      expected = alpha.dot(kept_b);
      weight += alpha.cwiseAbs().sum();
    }
    if (std::abs(cs.b[r] - expected) > tol * cs.scale() * weight) cs.consistent = false;
  }
  cs.rank = static_cast<int>(kept.rows());
  cs.reduced_M = std::move(kept);
  cs.reduced_b = std::move(kept_b);
  return cs;
}

/**
 * The system of a single pattern in slot coordinates s_0..s_n:
 * rows a_{i,c(0)} .. a_{i,c(n)} for each spatial i, then the all-ones row;
 * b = (q - p, t).
 */
inline ConstraintSystem build_system(const ConstantSystem& sys, const Pattern& c, const Vec& p, const Vec& q,
                                     double t, double tol = kDefaultTol) {
  sys.validate();
  check_point(sys, p, "build_system p");
  check_point(sys, q, "build_system q");
  if (c.field_count() != sys.k) throw InvalidArgument("build_system: pattern field count differs from the system");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("build_system: t must be finite and >= 0");
  const auto n1 = static_cast<Eigen::Index>(c.length());
  Mat M(sys.d + 1, n1);
  for (Eigen::Index s = 0; s < n1; ++s) {
    M.block(0, s, sys.d, 1) = sys.A.col(c[static_cast<std::size_t>(s)] - 1);
    M(sys.d, s) = 1.0;
  }
  Vec b(sys.d + 1);
  b.head(sys.d) = q - p;
  b[sys.d] = t;
  return make_constraint_system(std::move(M), std::move(b), tol);
}

enum class HullStatus { empty, point, positive_dim };

inline const char* to_string(HullStatus s) {
  switch (s) {
    case HullStatus::empty: return "empty";
    case HullStatus::point: return "point";
    case HullStatus::positive_dim: return "positive_dim";
  }
  return "unknown";
}

struct PolytopeHull {
  std::vector<Vec> vertices;
  int affine_dimension = -1;
  HullStatus status = HullStatus::empty;
};

/// Affine dimension of a point set; singular values of the differences above cut count.
inline int affine_dimension(const std::vector<Vec>& pts, const std::vector<int>& idx, double cut) {
  if (idx.empty()) return -1;
  if (idx.size() == 1) return 0;
  const Eigen::Index m = pts[static_cast<std::size_t>(idx[0])].size();
  Mat diff(m, static_cast<Eigen::Index>(idx.size() - 1));
  for (std::size_t i = 1; i < idx.size(); ++i)
    diff.col(static_cast<Eigen::Index>(i - 1)) =
        pts[static_cast<std::size_t>(idx[i])] - pts[static_cast<std::size_t>(idx[0])];
  Eigen::JacobiSVD<Mat> svd(diff);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > cut) ++r;
  return r;
}

namespace detail {

inline void for_each_subset(int m, int r, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == r) {
      fn(cur);
      return;
    }
    for (int j = start; j <= m - (r - static_cast<int>(cur.size())); ++j) {
      cur.push_back(j);
      rec(j + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

}  // namespace detail

/**
 * Basic feasible solutions: every rank-sized column subset with a nonsingular
 * square block is solved, zero padded, and kept when it is nonnegative and
 * satisfies the full system.
 */
inline PolytopeHull enumerate_vertices(const ConstraintSystem& cs) {
  const int m = static_cast<int>(cs.M.cols());
  if (cs.rank == 0) throw DegenerateSystem("enumerate_vertices: constraint matrix has rank 0");
  PolytopeHull hull;
  if (!cs.consistent) return hull;
  const double scale = cs.scale();
  const double feas = cs.tol * scale;
  const double grid = 1e3 * cs.tol * scale;
  std::map<std::vector<long long>, std::size_t> seen;

  detail::for_each_subset(m, cs.rank, [&](const std::vector<int>& I) {
    Mat MI(cs.rank, cs.rank);
    for (int c = 0; c < cs.rank; ++c) MI.col(c) = cs.reduced_M.col(I[static_cast<std::size_t>(c)]);
    Eigen::FullPivLU<Mat> lu(MI);
    lu.setThreshold(cs.tol);
    if (!lu.isInvertible()) return;
    Vec uI = lu.solve(cs.reduced_b);
    Vec u = Vec::Zero(m);
    for (int c = 0; c < cs.rank; ++c) u[I[static_cast<std::size_t>(c)]] = uI[c];
    for (int j = 0; j < m; ++j) {
      if (!std::isfinite(u[j]) || u[j] < -feas) return;
      if (u[j] < 0.0) u[j] = 0.0;
    }
    Vec res = cs.M * u - cs.b;
    if (res.size() && res.cwiseAbs().maxCoeff() > feas) return;
    std::vector<long long> key(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) key[static_cast<std::size_t>(j)] = std::llround(u[j] / grid);
    if (seen.count(key)) return;
    seen.emplace(std::move(key), hull.vertices.size());
    hull.vertices.push_back(std::move(u));
  });

  if (hull.vertices.empty()) return hull;
  std::sort(hull.vertices.begin(), hull.vertices.end(), [](const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  std::vector<int> all(hull.vertices.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  hull.affine_dimension = affine_dimension(hull.vertices, all, grid);
  hull.status = hull.affine_dimension == 0 ? HullStatus::point : HullStatus::positive_dim;
  return hull;
}

/**
 * Triangulates a polytope of the form {x >= 0} ∩ (affine subspace) by pulling
 * the lexicographically smallest vertex. Facets are the maximal faces cut out by
 * a single coordinate hyperplane. Returns index tuples into hull.vertices.
 */
inline std::vector<std::vector<int>> triangulate(const PolytopeHull& hull, double zero_tol) {
  std::vector<std::vector<int>> out;
  if (hull.status == HullStatus::empty) return out;
  const auto& V = hull.vertices;
  const Eigen::Index m = V.front().size();

  std::function<void(const std::vector<int>&, int, std::vector<std::vector<int>>&)> rec =
      [&](const std::vector<int>& face, int dim, std::vector<std::vector<int>>& acc) {
        if (dim == 0) {
          acc.push_back({face.front()});
          return;
        }
        if (static_cast<int>(face.size()) == dim + 1) {
          acc.push_back(face);
          return;
        }
        // vertices are sorted lexicographically, so face.front() is the lexmin one
        const int v0 = face.front();
        std::set<std::vector<int>> facets;
        for (Eigen::Index j = 0; j < m; ++j) {
          std::vector<int> f;
          for (int i : face)
            if (std::abs(V[static_cast<std::size_t>(i)][j]) <= zero_tol) f.push_back(i);
          if (f.empty() || f.front() == v0) continue;
          if (facets.count(f)) continue;
          if (affine_dimension(V, f, zero_tol) != dim - 1) continue;
          facets.insert(f);
        }
        for (const auto& f : facets) {
          std::vector<std::vector<int>> sub;
          rec(f, dim - 1, sub);
          for (auto& s : sub) {
            s.insert(s.begin(), v0);
            acc.push_back(std::move(s));
          }
        }
      };

  std::vector<int> all(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) all[i] = static_cast<int>(i);
  rec(all, hull.affine_dimension, out);
  return out;
}

/**
 * Exact integral of prod_j x_j^{a_j} over the simplex with the given vertices,
 * against its Euclidean (Hausdorff) measure. A single vertex is a point mass.
 */
inline double simplex_monomial_integral(const std::vector<Vec>& vertices, const std::vector<int>& exponents) {
  if (vertices.empty()) throw InvalidArgument("simplex_monomial_integral: no vertices");
  const Eigen::Index m = vertices.front().size();
  if (static_cast<Eigen::Index>(exponents.size()) != m)
    throw InvalidArgument("simplex_monomial_integral: exponent count differs from the ambient dimension");
  for (int a : exponents)
    if (a < 0) throw InvalidArgument("simplex_monomial_integral: negative exponent");
  for (const auto& v : vertices)
    if (v.size() != m) throw InvalidArgument("simplex_monomial_integral: vertices of mixed dimension");
  const int D = static_cast<int>(vertices.size()) - 1;
  if (D > m) throw DegenerateSimplex("simplex_monomial_integral: more vertices than dimensions allow");

  double volume = 1.0;
  if (D > 0) {
    Mat E(m, D);
    for (int i = 0; i < D; ++i) E.col(i) = vertices[static_cast<std::size_t>(i + 1)] - vertices[0];
    Eigen::JacobiSVD<Mat> svd(E);
    const auto& s = svd.singularValues();
    if (s[D - 1] <= 1e-12 * std::max(1.0, s[0]))
      throw DegenerateSimplex("simplex_monomial_integral: affinely dependent vertices");
    double g = 1.0;
    for (int i = 0; i < D; ++i) g *= s[i];
    volume = g / std::tgamma(D + 1.0);
  }

  // expand prod_j (sum_v lambda_v x_v[j])^{a_j} in barycentric monomials
  using Mono = std::vector<int>;
  std::map<Mono, double> poly{{Mono(static_cast<std::size_t>(D + 1), 0), 1.0}};
  for (Eigen::Index j = 0; j < m; ++j) {
    for (int rep = 0; rep < exponents[static_cast<std::size_t>(j)]; ++rep) {
      std::map<Mono, double> next;
      for (const auto& [mono, coef] : poly) {
        for (int v = 0; v <= D; ++v) {
          const double x = vertices[static_cast<std::size_t>(v)][j];
          if (x == 0.0) continue;
          Mono t = mono;
          ++t[static_cast<std::size_t>(v)];
          next[t] += coef * x;
        }
      }
      poly = std::move(next);
    }
  }
  // int_simplex prod lambda^b = vol * D! prod b! / (|b| + D)!
  double total = 0.0;
  for (const auto& [mono, coef] : poly) {
    double lg = std::lgamma(D + 1.0);
    int deg = 0;
    for (int b : mono) {
      lg += std::lgamma(b + 1.0);
      deg += b;
    }
    lg -= std::lgamma(deg + D + 1.0);
    total += coef * std::exp(lg);
  }
  return std::max(0.0, total * volume);
}

struct NormalizedVolume {
  double value = 0.0;
  /// Dimension of the whole piece: base dimension plus the fiber dimensions.
  int dimension = -1;
  int base_dimension = -1;
  HullStatus status = HullStatus::empty;
  /// Set when the base has positive dimension and its normalization is a convention.
  bool base_flagged = false;
  const char* convention = "fibered-sigma";
};

/**
 * Everything the fibered measure needs about one pattern: the distinct fields it
 * uses, their multiplicities, the base polytope in group-sum coordinates and its
 * triangulation.
 */
struct PieceGeometry {
  std::vector<int> fields;
  std::vector<int> multiplicity;
  ConstraintSystem base;
  PolytopeHull hull;
  std::vector<std::vector<int>> simplices;
  /// Base measure is Hausdorff measure times this factor.
  double base_factor = 1.0;
  NormalizedVolume volume;
};

/// prod_j sigma_j^{m_j - 1} / (m_j - 1)!, the fiber volume over a base point.
inline double fiber_volume(const Vec& sigma, const std::vector<int>& multiplicity) {
  double f = 1.0;
  for (std::size_t j = 0; j < multiplicity.size(); ++j) {
    const int e = multiplicity[j] - 1;
    if (e == 0) continue;
    f *= std::pow(sigma[static_cast<Eigen::Index>(j)], e) / std::tgamma(e + 1.0);
  }
  return f;
}

inline PieceGeometry analyze_piece(const ConstantSystem& sys, const Pattern& c, const Vec& p, const Vec& q, double t,
                                   double tol = kDefaultTol) {
  sys.validate();
  check_point(sys, p, "piece p");
  check_point(sys, q, "piece q");
  if (c.field_count() != sys.k) throw InvalidArgument("piece: pattern field count differs from the system");
  if (c.is_identity()) throw InvalidArgument("piece: the identity pattern has no polytope");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("piece: t must be finite and >= 0");

  PieceGeometry g;
  const ContentVector cv = content(c);
  for (int j : cv.support()) {
    g.fields.push_back(j);
    g.multiplicity.push_back(static_cast<int>(cv[j]));
  }
  const auto m = static_cast<Eigen::Index>(g.fields.size());
  Mat M(sys.d + 1, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    M.block(0, j, sys.d, 1) = sys.A.col(g.fields[static_cast<std::size_t>(j)] - 1);
    M(sys.d, j) = 1.0;
  }
  Vec b(sys.d + 1);
  b.head(sys.d) = q - p;
  b[sys.d] = t;
  g.base = make_constraint_system(std::move(M), std::move(b), tol);
  g.hull = enumerate_vertices(g.base);
  g.base_factor = 1.0 / std::sqrt(static_cast<double>(m));

  int fiber_dim = 0;
  for (int mu : g.multiplicity) fiber_dim += mu - 1;
  NormalizedVolume& nv = g.volume;
  nv.status = g.hull.status;
  if (g.hull.status == HullStatus::empty) {
    nv.value = 0.0;
    return g;
  }
  nv.base_dimension = g.hull.affine_dimension;
  nv.dimension = nv.base_dimension + fiber_dim;
  if (g.hull.status == HullStatus::point) {
    nv.value = fiber_volume(g.hull.vertices.front(), g.multiplicity);
    return g;
  }
  nv.base_flagged = true;
  g.simplices = triangulate(g.hull, 1e3 * tol * g.base.scale());
  std::vector<int> exps;
  for (int mu : g.multiplicity) exps.push_back(mu - 1);
  double denom = 1.0;
  for (int e : exps) denom *= std::tgamma(e + 1.0);
  double total = 0.0;
  for (const auto& s : g.simplices) {
    std::vector<Vec> verts;
    for (int i : s) verts.push_back(g.hull.vertices[static_cast<std::size_t>(i)]);
    total += simplex_monomial_integral(verts, exps);
  }
  nv.value = total / denom * g.base_factor;
  return g;
}

/** vol(Γ^c_{p,q}(t)) under the fibered-σ measure. */
inline NormalizedVolume normalized_volume(const ConstantSystem& sys, const Pattern& c, const Vec& p, const Vec& q,
                                          double t, double tol = kDefaultTol) {
  return analyze_piece(sys, c, p, q, t, tol).volume;
}

}  // namespace dpath
