#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpath/constant_fields.hpp"
#include "dpath/errors.hpp"
#include "dpath/flows.hpp"
#include "dpath/functionals.hpp"
#include "dpath/parallel.hpp"
#include "dpath/patterns.hpp"
#include "dpath/polytope.hpp"
#include "dpath/quadrature.hpp"

namespace dpath {

struct KernelOptions {
  std::size_t max_len = 20;
  double tol = kDefaultTol;
  double quad_tol = 1e-10;
  double flow_tol = kDefaultFlowTol;
  /// Grundmann-Moller order on each fiber simplex (degree 2s + 1).
  int fiber_order = 1;
  /// Extra base-rule degree for integrands other than the unit.
  int base_extra_degree = 2;
  std::uint64_t pattern_budget = 2'000'000;
  unsigned threads = 0;
  SolveOptions solve;
};

struct SkippedPiece {
  Pattern pattern;
  std::string reason;
};

struct KernelShell {
  std::size_t length = 0;
  Complex value;
};

struct KernelResult {
  Complex value;
  std::vector<KernelShell> per_length;
  std::vector<SkippedPiece> skipped;
  /// Some piece could not be integrated and the value is a partial sum.
  bool incomplete = false;
  std::size_t pieces = 0;
};

namespace detail {

/// A path of constant fields is affine, so its waypoints are partial sums.
inline DirectedPathSample affine_sample(const ConstantSystem& sys, const Pattern& c, const Vec& p,
                                        const std::vector<double>& s, double t) {
  DirectedPathSample out;
  out.p = p;
  out.timed = TimedPattern(c, s, t);
  out.waypoints.push_back(p);
  for (std::size_t i = 0; i < c.length(); ++i) out.waypoints.push_back(out.waypoints.back() + s[i] * sys.field(c[i]));
  return out;
}

inline FieldSet affine_lift(const ConstantSystem& sys) {
  ConstantSystem lift = sys;
  lift.topology = Topology::affine;
  return FieldSet::constant(lift);
}

}  // namespace detail

/**
 * Integral of a path functional over one constant-field piece: a tensor
 * Grundmann-Moller rule on the triangulated base times one rule per fiber
 * simplex. The base rule is exact for the fiber density, so the unit
 * functional reproduces normalized_volume.
 */
inline Complex kernel_piece(const ConstantSystem& sys, const Pattern& c, const Vec& p, const Vec& q, double t,
                            const PathFunctional& f, const KernelOptions& opt = {}) {
  const PieceGeometry g = analyze_piece(sys, c, p, q, t, opt.tol);
  if (g.hull.status == HullStatus::empty) return 0.0;
  const bool unit = is_unit(f);
  const FieldSet lift = unit ? FieldSet() : detail::affine_lift(sys);

  // slots of each field group
  const std::size_t groups = g.fields.size();
  std::vector<std::vector<std::size_t>> slots(groups);
  for (std::size_t i = 0; i < c.length(); ++i)
    for (std::size_t j = 0; j < groups; ++j)
      if (g.fields[j] == c[i]) slots[j].push_back(i);

  std::vector<SimplexRule> fiber_rules;
  int fiber_degree = 0;
  for (std::size_t j = 0; j < groups; ++j) {
    fiber_rules.push_back(grundmann_moller(g.multiplicity[j] - 1, opt.fiber_order));
    fiber_degree += g.multiplicity[j] - 1;
  }
  double fiber_norm = 1.0;
  for (int mu : g.multiplicity) fiber_norm /= std::tgamma(static_cast<double>(mu));

  // (sigma, weight) pairs of the base rule
  std::vector<std::pair<Vec, double>> base_nodes;
  if (g.hull.status == HullStatus::point) {
    base_nodes.emplace_back(g.hull.vertices.front(), 1.0);
  } else {
    const int D = g.hull.affine_dimension;
    const SimplexRule rule = grundmann_moller(D, gm_order_for_degree(fiber_degree + (unit ? 0 : opt.base_extra_degree)));
    for (const auto& simplex : g.simplices) {
      std::vector<Vec> verts;
      for (int i : simplex) verts.push_back(g.hull.vertices[static_cast<std::size_t>(i)]);
      const double vol = simplex_monomial_integral(verts, std::vector<int>(groups, 0)) * g.base_factor;
      for (std::size_t r = 0; r < rule.points.size(); ++r) {
        Vec sigma = Vec::Zero(static_cast<Eigen::Index>(groups));
        for (std::size_t v = 0; v < verts.size(); ++v) sigma += rule.points[r][v] * verts[v];
        base_nodes.emplace_back(std::move(sigma), rule.weights[r] * vol);
      }
    }
  }

  Complex total = 0.0;
  std::vector<double> s(c.length(), 0.0);
  std::vector<std::size_t> pick(groups, 0);
  for (const auto& [sigma, wb] : base_nodes) {
    double density = fiber_norm;
    for (std::size_t j = 0; j < groups; ++j) {
      const int e = g.multiplicity[j] - 1;
      if (e) density *= std::pow(std::max(0.0, sigma[static_cast<Eigen::Index>(j)]), e);
    }
    if (density == 0.0) continue;
    // walk the tensor product of fiber rules
    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      double w = wb * density;
      for (std::size_t j = 0; j < groups; ++j) {
        const auto& rule = fiber_rules[j];
        const auto& lam = rule.points[pick[j]];
        w *= rule.weights[pick[j]];
        const double sj = std::max(0.0, sigma[static_cast<Eigen::Index>(j)]);
        for (std::size_t r = 0; r < slots[j].size(); ++r) s[slots[j][r]] = sj * lam[r];
      }
      if (unit) {
        total += w;
      } else {
        double sum = 0.0;
        for (double v : s) sum += v;
        const auto sample = detail::affine_sample(sys, c, p, s, sum);
        total += w * evaluate_functional(f, lift, sample, opt.quad_tol, opt.flow_tol);
      }
      std::size_t j = 0;
      for (; j < groups; ++j) {
        if (++pick[j] < fiber_rules[j].points.size()) break;
        pick[j] = 0;
      }
      if (j == groups) break;
    }
  }
  return total;
}

/** k(p, q, t) for constant fields: every pattern up to opt.max_len, every torus lift. */
inline KernelResult kernel(const ConstantSystem& sys, const Vec& p, const Vec& q, double t, const PathFunctional& f,
                           const KernelOptions& opt = {}) {
  sys.validate();
  check_point(sys, p, "kernel p");
  check_point(sys, q, "kernel q");
  if (opt.max_len < 1) throw InvalidArgument("kernel: max_len must be >= 1");
  std::vector<Vec> windings = sys.topology == Topology::torus ? detail::torus_windings(sys, p, q, t)
                                                             : std::vector<Vec>{Vec::Zero(sys.d)};
  long double needed = 0.0L;
  for (std::size_t len = 1; len <= opt.max_len; ++len) needed += static_cast<long double>(pattern_count(len - 1, sys.k));
  needed *= static_cast<long double>(std::max<std::size_t>(windings.size(), 1));
  if (needed > static_cast<long double>(opt.pattern_budget))
    throw ResourceLimit("kernel: pattern count exceeds the budget");

  struct Job {
    Pattern c;
    std::size_t w;
  };
  std::vector<Job> jobs;
  for (std::size_t len = 1; len <= opt.max_len; ++len)
    for (auto& c : enumerate_patterns(len - 1, sys.k))
      for (std::size_t w = 0; w < windings.size(); ++w) jobs.push_back({c, w});
  const auto vals = parallel_map<Complex>(
      jobs.size(), [&](std::size_t i) { return kernel_piece(sys, jobs[i].c, p, q + windings[jobs[i].w], t, f, opt); },
      resolve_threads(opt.threads));

  KernelResult out;
  std::vector<Complex> shells(opt.max_len + 1, 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    shells[jobs[i].c.length()] += vals[i];
    if (vals[i] != 0.0) ++out.pieces;
  }
  for (std::size_t len = 1; len <= opt.max_len; ++len) {
    if (shells[len] != 0.0) out.per_length.push_back({len, shells[len]});
    out.value += shells[len];
  }
  return out;
}

/**
 * k(p, q, t) for general fields. Isolated interior solutions with full rank
 * count once each. Boundary solutions, rank-deficient points and pieces of
 * positive dimension are listed in skipped and make the result incomplete.
 */
inline KernelResult kernel(const FieldSet& fs, const Vec& p, const Vec& q, double t, const PathFunctional& f,
                           const KernelOptions& opt = {}) {
  if (opt.max_len < 1) throw InvalidArgument("kernel: max_len must be >= 1");
  if (p.size() != fs.d() || q.size() != fs.d()) throw InvalidArgument("kernel: endpoint dimension mismatch");
  if (!(t > 0.0)) throw InvalidArgument("kernel: t must be positive");
  long double needed = 0.0L;
  for (std::size_t len = 1; len <= opt.max_len; ++len) needed += static_cast<long double>(pattern_count(len - 1, fs.k()));
  if (needed > static_cast<long double>(opt.pattern_budget)) throw ResourceLimit("kernel: pattern count exceeds the budget");

  std::vector<Pattern> pats;
  for (std::size_t len = 1; len <= opt.max_len; ++len)
    for (auto& c : enumerate_patterns(len - 1, fs.k())) pats.push_back(c);

  struct PieceOut {
    Complex value;
    std::vector<std::string> skipped;
    std::size_t used = 0;
  };
  const auto outs = parallel_map<PieceOut>(
      pats.size(),
      [&](std::size_t i) {
        PieceOut po;
        const Pattern& c = pats[i];
        const std::size_t n = c.length() - 1;
        const auto sols = solve_piece(fs, c, p, q, t, opt.solve);
        if (!sols.boundary.empty()) po.skipped.push_back("boundary solution");
        if (n > static_cast<std::size_t>(fs.d())) {
          if (!sols.interior.empty()) po.skipped.push_back("positive-dimensional piece");
          return po;
        }
        for (const auto& tp : sols.interior) {
          const auto rc = rank_check(fs, c, p, tp.times, opt.flow_tol);
          if (!rc.satisfied || rc.rank != static_cast<int>(n)) {
            po.skipped.push_back("rank condition fails");
            continue;
          }
          const auto sample = iterated_flow(fs, c, p, tp.times, opt.flow_tol);
          po.value += evaluate_functional(f, fs, sample, opt.quad_tol, opt.flow_tol);
          ++po.used;
        }
        return po;
      },
      resolve_threads(opt.threads));

  KernelResult out;
  std::vector<Complex> shells(opt.max_len + 1, 0.0);
  for (std::size_t i = 0; i < pats.size(); ++i) {
    shells[pats[i].length()] += outs[i].value;
    out.pieces += outs[i].used;
    for (const auto& r : outs[i].skipped) out.skipped.push_back({pats[i], r});
  }
  for (std::size_t len = 1; len <= opt.max_len; ++len) {
    if (shells[len] != 0.0) out.per_length.push_back({len, shells[len]});
    out.value += shells[len];
  }
  out.incomplete = !out.skipped.empty();
  return out;
}

/** A parametrization theta in [a, b] -> p of the backward front Γ_q^-(t). */
struct Front {
  double a = 0.0;
  double b = 0.0;
  std::function<Vec(double)> point;
  std::string label;
};

/// Line fields: the points that reach q in time t form [q - t v_max, q - t v_min], in the coordinate y.
inline Front line_front(const ConstantSystem& sys, const Vec& q, double t) {
  if (sys.d != 1) throw InvalidArgument("line_front: system is not one-dimensional");
  const double vmax = sys.A.row(0).maxCoeff();
  const double vmin = sys.A.row(0).minCoeff();
  Front fr;
  fr.a = q[0] - t * vmax;
  fr.b = q[0] - t * vmin;
  fr.point = [](double y) { return Vec(Vec::Constant(1, y)); };
  fr.label = "line";
  return fr;
}

/// Coordinate fields of the plane: p = (q_x - s, q_y - (t - s)), s in [0, t].
inline Front grid2_front(const Vec& q, double t) {
  if (q.size() != 2) throw InvalidArgument("grid2_front: q must be a point of the plane");
  Front fr;
  fr.a = 0.0;
  fr.b = t;
  const Vec qq = q;
  fr.point = [qq, t](double s) {
    Vec p(2);
    p << qq[0] - s, qq[1] - (t - s);
    return p;
  };
  fr.label = "grid2";
  return fr;
}

/// The built-in front for a constant system, when there is one.
inline std::optional<Front> builtin_front(const ConstantSystem& sys, const Vec& q, double t) {
  if (sys.topology != Topology::affine) return std::nullopt;
  if (sys.d == 1) return line_front(sys, q, t);
  if (sys.d == 2 && sys.k == 2 && sys.A == Mat::Identity(2, 2)) return grid2_front(q, t);
  return std::nullopt;
}

struct WaveResult {
  Complex value;
  double error_estimate = 0.0;
  std::size_t kernel_evaluations = 0;
  bool incomplete = false;
  bool converged = true;
};

using Density = std::function<double(const Vec&)>;

/**
 * u(q, t) = int k(p, q, t) f(p) dθ over the front parametrization, by adaptive
 * Gauss-Kronrod. The front endpoints are never evaluated.
 */
template <class System>
WaveResult wave(const System& sys, const Vec& q, double t, const PathFunctional& fnl, const Density& density,
                const std::optional<Front>& front, double quad_tol = 1e-8, const KernelOptions& opt = {}) {
  if (!front || !front->point) throw InvalidArgument("wave: a front parametrization is required");
  if (!density) throw InvalidArgument("wave: a density is required");
  if (!(t > 0.0)) throw InvalidArgument("wave: t must be positive");
  if (!(quad_tol > 0.0)) throw InvalidArgument("wave: quadrature tolerance must be positive");
  WaveResult out;
  auto integrand = [&](double theta) -> Complex {
    const Vec p = front->point(theta);
    const double dens = density(p);
    ++out.kernel_evaluations;
    if (dens == 0.0) return 0.0;
    const auto kr = kernel(sys, p, q, t, fnl, opt);
    if (kr.incomplete) out.incomplete = true;
    return kr.value * dens;
  };
  const auto r = integrate_gk15<Complex>(integrand, front->a, front->b, quad_tol);
  out.value = r.value;
  out.error_estimate = r.error;
  out.converged = r.converged;
  return out;
}

}  // namespace dpath
