#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpath/errors.hpp"
#include "dpath/parallel.hpp"
#include "dpath/patterns.hpp"
#include "dpath/quadrature.hpp"
#include "dpath/system.hpp"

namespace dpath {

using FieldFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

struct VectorField {
  FieldFn eval;
  /// Optional; central differences are used when empty.
  JacobianFn jacobian;
  std::string label;
};

/// One monomial coef * prod x_i^{powers_i} of a polynomial field component.
struct PolyTerm {
  double coef = 0.0;
  std::vector<int> powers;
};

/**
 * k vector fields on R^d. Flows are assumed to exist for all the times asked
 * for; a blow-up shows up as an integration failure.
 */
class FieldSet {
 public:
  FieldSet() = default;
  FieldSet(int d, std::vector<VectorField> fields, bool global_flows = true)
      : d_(d), fields_(std::move(fields)), global_flows_(global_flows) {
    if (d_ < 1) throw InvalidArgument("field set: dimension must be >= 1");
    if (fields_.empty()) throw InvalidArgument("field set: at least one field is required");
    for (const auto& f : fields_)
      if (!f.eval) throw InvalidArgument("field set: field without an evaluator");
  }

  int d() const noexcept { return d_; }
  int k() const noexcept { return static_cast<int>(fields_.size()); }
  bool global_flows() const noexcept { return global_flows_; }
  const VectorField& field(int j) const { return fields_.at(static_cast<std::size_t>(j - 1)); }
  const std::vector<VectorField>& fields() const noexcept { return fields_; }
  bool all_analytic() const {
    return std::all_of(fields_.begin(), fields_.end(), [](const VectorField& f) { return bool(f.jacobian); });
  }

  Vec eval(int j, const Vec& x) const {
    Vec v = field(j).eval(x);
    if (v.size() != d_) throw InvalidArgument("field set: evaluator returned the wrong dimension");
    return v;
  }

  Mat jacobian(int j, const Vec& x) const {
    const auto& f = field(j);
    if (f.jacobian) return f.jacobian(x);
    Mat J(d_, d_);
    for (int i = 0; i < d_; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      J.col(i) = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
    }
    return J;
  }

  static FieldSet constant(const ConstantSystem& sys) {
    if (sys.topology != Topology::affine) throw InvalidArgument("field set: only affine constant systems lift to R^d");
    if (sys.d < 1) throw InvalidArgument("field set: constant system needs d >= 1");
    std::vector<VectorField> fs;
    for (int j = 1; j <= sys.k; ++j) {
      Vec v = sys.field(j);
      const int d = sys.d;
      fs.push_back({[v](const Vec&) { return v; }, [d](const Vec&) { return Mat(Mat::Zero(d, d)); },
                    "constant " + std::to_string(j)});
    }
    return FieldSet(sys.d, std::move(fs));
  }

  /// v_j(x) = B_j x + c_j.
  static FieldSet linear(const std::vector<Mat>& B, const std::vector<Vec>& c) {
    if (B.empty() || B.size() != c.size()) throw InvalidArgument("field set: linear fields need matching B and c");
    const int d = static_cast<int>(B.front().rows());
    std::vector<VectorField> fs;
    for (std::size_t j = 0; j < B.size(); ++j) {
      if (B[j].rows() != d || B[j].cols() != d || c[j].size() != d)
        throw InvalidArgument("field set: linear field " + std::to_string(j + 1) + " has the wrong shape");
      Mat b = B[j];
      Vec cc = c[j];
      fs.push_back({[b, cc](const Vec& x) { return Vec(b * x + cc); }, [b](const Vec&) { return b; },
                    "linear " + std::to_string(j + 1)});
    }
    return FieldSet(d, std::move(fs));
  }

  /// components[j][i] lists the monomials of component i of field j + 1.
  static FieldSet polynomial(int d, const std::vector<std::vector<std::vector<PolyTerm>>>& components) {
    std::vector<VectorField> fs;
    for (std::size_t j = 0; j < components.size(); ++j) {
      const auto& comp = components[j];
      if (static_cast<int>(comp.size()) != d)
        throw InvalidArgument("field set: polynomial field " + std::to_string(j + 1) + " needs d components");
      for (const auto& terms : comp)
        for (const auto& t : terms)
          if (static_cast<int>(t.powers.size()) != d || std::any_of(t.powers.begin(), t.powers.end(), [](int p) { return p < 0; }))
            throw InvalidArgument("field set: polynomial term with bad powers");
      auto eval = [comp, d](const Vec& x) {
        Vec v = Vec::Zero(d);
        for (int i = 0; i < d; ++i)
          for (const auto& t : comp[static_cast<std::size_t>(i)]) {
            double m = t.coef;
            for (int l = 0; l < d; ++l)
              if (t.powers[static_cast<std::size_t>(l)]) m *= std::pow(x[l], t.powers[static_cast<std::size_t>(l)]);
            v[i] += m;
          }
        return v;
      };
      auto jac = [comp, d](const Vec& x) {
        Mat J = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i)
          for (const auto& t : comp[static_cast<std::size_t>(i)])
            for (int l = 0; l < d; ++l) {
              const int pl = t.powers[static_cast<std::size_t>(l)];
              if (pl == 0) continue;
              double m = t.coef * pl;
              for (int r = 0; r < d; ++r) {
                const int pr = t.powers[static_cast<std::size_t>(r)] - (r == l ? 1 : 0);
                if (pr) m *= std::pow(x[r], pr);
              }
              J(i, l) += m;
            }
        return J;
      };
      fs.push_back({eval, jac, "polynomial " + std::to_string(j + 1)});
    }
    return FieldSet(d, std::move(fs));
  }

 private:
  int d_ = 0;
  std::vector<VectorField> fields_;
  bool global_flows_ = true;
};

struct FlowStats {
  std::size_t steps = 0;
  double max_error = 0.0;
};

inline constexpr double kDefaultFlowTol = 1e-10;

namespace detail {

inline constexpr std::size_t kMaxSubsteps = std::size_t{1} << 20;

inline bool finite(const Vec& v) { return v.allFinite(); }

/// N classical RK4 steps of size s/N; s may be negative.
inline Vec rk4(const FieldSet& fs, int j, const Vec& p, double s, std::size_t N) {
  Vec x = p;
  const double h = s / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec k1 = fs.eval(j, x);
    const Vec k2 = fs.eval(j, x + 0.5 * h * k1);
    const Vec k3 = fs.eval(j, x + 0.5 * h * k2);
    const Vec k4 = fs.eval(j, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite(x)) throw IntegrationFailure("flow: non-finite state along field " + std::to_string(j));
  }
  return x;
}

/// RK4 on the state together with tangent vectors W, W' = Dv(x) W.
inline std::pair<Vec, Mat> rk4_tangent(const FieldSet& fs, int j, const Vec& p, const Mat& W0, double s,
                                       std::size_t N) {
  Vec x = p;
  Mat W = W0;
  const double h = s / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec k1 = fs.eval(j, x);
    const Mat L1 = fs.jacobian(j, x) * W;
    const Vec x2 = x + 0.5 * h * k1;
    const Vec k2 = fs.eval(j, x2);
    const Mat L2 = fs.jacobian(j, x2) * (W + 0.5 * h * L1);
    const Vec x3 = x + 0.5 * h * k2;
    const Vec k3 = fs.eval(j, x3);
    const Mat L3 = fs.jacobian(j, x3) * (W + 0.5 * h * L2);
    const Vec x4 = x + h * k3;
    const Vec k4 = fs.eval(j, x4);
    const Mat L4 = fs.jacobian(j, x4) * (W + h * L3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    W += h / 6.0 * (L1 + 2.0 * L2 + 2.0 * L3 + L4);
    if (!finite(x) || !W.allFinite()) throw IntegrationFailure("flow: non-finite tangent along field " + std::to_string(j));
  }
  return {x, W};
}

/**
 * Doubles the substep count until two successive RK4 results agree:
 * |y_N - y_2N| / 15 <= tol * max(1, |y|). Returns y_2N.
 */
inline Vec flow_signed(const FieldSet& fs, int j, const Vec& p, double s, double tol, FlowStats* stats) {
  if (s == 0.0) return p;
  std::size_t N = 1;
  Vec coarse = rk4(fs, j, p, s, N);
  std::size_t work = N;
  while (true) {
    Vec fine = rk4(fs, j, p, s, 2 * N);
    work += 2 * N;
    const double err = (fine - coarse).cwiseAbs().maxCoeff() / 15.0;
    if (err <= tol * std::max(1.0, fine.cwiseAbs().maxCoeff())) {
      if (stats) {
        stats->steps += work;
        stats->max_error = std::max(stats->max_error, err);
      }
      return fine;
    }
    N *= 2;
    if (N > kMaxSubsteps) throw IntegrationFailure("flow: tolerance not met with 2^20 substeps");
    coarse = std::move(fine);
  }
}

inline std::pair<Vec, Mat> flow_tangent_signed(const FieldSet& fs, int j, const Vec& p, const Mat& W, double s,
                                               double tol) {
  if (s == 0.0) return {p, W};
  std::size_t N = 1;
  auto coarse = rk4_tangent(fs, j, p, W, s, N);
  while (true) {
    auto fine = rk4_tangent(fs, j, p, W, s, 2 * N);
    double err = (fine.first - coarse.first).cwiseAbs().maxCoeff();
    double mag = fine.first.cwiseAbs().maxCoeff();
    if (W.size()) {
      err = std::max(err, (fine.second - coarse.second).cwiseAbs().maxCoeff());
      mag = std::max(mag, fine.second.cwiseAbs().maxCoeff());
    }
    if (err / 15.0 <= tol * std::max(1.0, mag)) return fine;
    N *= 2;
    if (N > kMaxSubsteps) throw IntegrationFailure("flow: tangent tolerance not met with 2^20 substeps");
    coarse = std::move(fine);
  }
}

}  // namespace detail

/** φ_j(p, s): follow field j from p for time s >= 0. */
inline Vec flow(const FieldSet& fs, int j, const Vec& p, double s, double tol = kDefaultFlowTol,
                FlowStats* stats = nullptr) {
  if (j < 1 || j > fs.k()) throw InvalidArgument("flow: field index out of range");
  if (p.size() != fs.d()) throw InvalidArgument("flow: point has the wrong dimension");
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("flow: duration must be finite and >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("flow: tolerance must be positive");
  return detail::flow_signed(fs, j, p, s, tol, stats);
}

struct DirectedPathSample {
  Vec p;
  TimedPattern timed;
  /// p_0 = p, p_{i+1} = φ_{c_i}(p_i, s_i).
  std::vector<Vec> waypoints;
  FlowStats stats;

  const Vec& end() const { return waypoints.back(); }
};

/** The iterated flow φ_c(p, s), recording every waypoint. */
inline DirectedPathSample iterated_flow(const FieldSet& fs, const Pattern& c, const Vec& p,
                                        const std::vector<double>& s, double tol = kDefaultFlowTol) {
  if (c.field_count() != fs.k()) throw InvalidArgument("iterated_flow: pattern field count differs from the field set");
  if (p.size() != fs.d()) throw InvalidArgument("iterated_flow: point has the wrong dimension");
  DirectedPathSample out;
  out.p = p;
  out.timed = TimedPattern(c, s);
  out.waypoints.push_back(p);
  for (std::size_t i = 0; i < c.length(); ++i)
    out.waypoints.push_back(flow(fs, c[i], out.waypoints.back(), s[i], tol, &out.stats));
  return out;
}

/** Same as iterated_flow but also accepts slightly negative times (used for difference quotients). */
inline Vec iterated_endpoint(const FieldSet& fs, const Pattern& c, const Vec& p, const std::vector<double>& s,
                             double tol) {
  Vec x = p;
  for (std::size_t i = 0; i < c.length(); ++i) x = detail::flow_signed(fs, c[i], x, s[i], tol, nullptr);
  return x;
}

struct RankCheck {
  int rank = 0;
  bool satisfied = true;
  /// Column i is ∂φ/∂s_i with s_n = t - (s_0 + ... + s_{n-1}).
  Mat vectors;
  Vec singular_values;
  Vec endpoint;
};

/**
 * The vectors dφ_{c_{i+1..n}}[v_{c_i}(p_{i+1})] - v_{c_n}(p_{n+1}), pushed
 * forward with the variational equation, and their numerical rank. The piece
 * is smooth at s when the rank is min(n, d).
 */
inline RankCheck rank_check(const FieldSet& fs, const Pattern& c, const Vec& p, const std::vector<double>& s,
                            double tol = kDefaultFlowTol, double rank_tol = 1e-8) {
  if (c.is_identity()) throw InvalidArgument("rank_check: identity pattern");
  if (s.size() != c.length()) throw InvalidArgument("rank_check: times do not match the pattern");
  if (p.size() != fs.d()) throw InvalidArgument("rank_check: point has the wrong dimension");
  const int d = fs.d();
  const std::size_t n = c.length() - 1;
  Vec x = p;
  Mat W(d, 0);
  for (std::size_t r = 0; r <= n; ++r) {
    auto [nx, nW] = detail::flow_tangent_signed(fs, c[r], x, W, s[r], tol);
    x = std::move(nx);
    W = std::move(nW);
    if (r < n) {
      W.conservativeResize(d, W.cols() + 1);
      W.col(W.cols() - 1) = fs.eval(c[r], x);
    }
  }
  const Vec vn = fs.eval(c[n], x);
  for (Eigen::Index i = 0; i < W.cols(); ++i) W.col(i) -= vn;
  RankCheck out;
  out.vectors = W;
  out.endpoint = x;
  if (n == 0) return out;
  Eigen::JacobiSVD<Mat> svd(W);
  out.singular_values = svd.singularValues();
  const double cut = rank_tol * std::max(1.0, out.singular_values.size() ? out.singular_values[0] : 0.0);
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values[i] > cut) ++out.rank;
  out.satisfied = out.rank == static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(d)));
  return out;
}

enum class JacobianMode { finite_difference, analytic };

struct SolveOptions {
  std::size_t seeds = 32;
  /// Residual target, relative to max(1, |q|).
  double tol = 1e-10;
  double flow_tol = kDefaultFlowTol;
  std::size_t max_iterations = 60;
  double dedup_tol = 1e-6;
  /// Solutions with a time below this (times max(1, t)) are on the boundary.
  double boundary_tol = 1e-8;
  JacobianMode jacobian = JacobianMode::finite_difference;
  unsigned threads = 1;
};

struct PieceSolutions {
  std::vector<TimedPattern> interior;
  std::vector<TimedPattern> boundary;
  std::vector<double> interior_residuals;
};

namespace detail {

inline std::vector<double> full_times(const Vec& u, double t) {
  std::vector<double> s(static_cast<std::size_t>(u.size()) + 1);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    s[static_cast<std::size_t>(i)] = u[i];
    sum += u[i];
  }
  s.back() = std::max(0.0, t - sum);
  return s;
}

inline Vec clamp_to_simplex(Vec u, double t) {
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::max(0.0, u[i]);
  const double sum = u.sum();
  if (sum > t) u *= t / sum;
  return u;
}

}  // namespace detail

/**
 * Solves φ_c(p, s) = q on the simplex of total time t by damped Gauss-Newton
 * in the chart s_n = t - (s_0 + ... + s_{n-1}), started from Halton points.
 * Distinct converged solutions are returned; nothing found is not an error.
 */
inline PieceSolutions solve_piece(const FieldSet& fs, const Pattern& c, const Vec& p, const Vec& q, double t,
                                  const SolveOptions& opt = {}) {
  if (!(t > 0.0)) throw InvalidArgument("solve_piece: t must be positive");
  if (c.is_identity()) throw InvalidArgument("solve_piece: identity pattern");
  if (c.field_count() != fs.k()) throw InvalidArgument("solve_piece: pattern field count differs from the field set");
  if (p.size() != fs.d() || q.size() != fs.d()) throw InvalidArgument("solve_piece: endpoint dimension mismatch");
  const std::size_t n = c.length() - 1;
  const double target = opt.tol * std::max(1.0, q.cwiseAbs().maxCoeff());
  const double btol = opt.boundary_tol * std::max(1.0, t);
  PieceSolutions out;

  auto residual = [&](const Vec& u) -> Vec { return iterated_endpoint(fs, c, p, detail::full_times(u, t), opt.flow_tol) - q; };
  auto classify = [&](const std::vector<double>& s, double res) {
    const bool on_boundary = *std::min_element(s.begin(), s.end()) <= btol;
    auto& bucket = on_boundary ? out.boundary : out.interior;
    for (const auto& e : bucket) {
      double gap = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) gap = std::max(gap, std::abs(e.times[i] - s[i]));
      if (gap <= opt.dedup_tol) return;
    }
    bucket.emplace_back(c, s, t);
    if (!on_boundary) out.interior_residuals.push_back(res);
  };

  if (n == 0) {
    const Vec r = residual(Vec(0));
    const double res = r.cwiseAbs().maxCoeff();
    if (res <= target) classify({t}, res);
    return out;
  }

  auto jacobian = [&](const Vec& u) -> Mat {
    const auto s = detail::full_times(u, t);
    if (opt.jacobian == JacobianMode::analytic) return rank_check(fs, c, p, s, opt.flow_tol).vectors;
    Mat J(fs.d(), static_cast<Eigen::Index>(n));
    const double h = 1e-6 * std::max(1.0, t);
    for (std::size_t i = 0; i < n; ++i) {
      auto sp = s, sm = s;
      sp[i] += h;
      sp[n] -= h;
      sm[i] -= h;
      sm[n] += h;
      J.col(static_cast<Eigen::Index>(i)) =
          (iterated_endpoint(fs, c, p, sp, opt.flow_tol) - iterated_endpoint(fs, c, p, sm, opt.flow_tol)) / (2.0 * h);
    }
    return J;
  };

  struct Attempt {
    bool ok = false;
    std::vector<double> s;
    double res = 0.0;
  };
  auto run = [&](std::size_t seed) -> Attempt {
    const auto hv = halton(seed + 1, n + 1);
    std::vector<double> e(n + 1);
    double esum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      e[i] = -std::log(std::max(hv[i], 1e-300));
      esum += e[i];
    }
    Vec u(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) u[static_cast<Eigen::Index>(i)] = t * e[i] / esum;
    Attempt a;
    try {
      Vec r = residual(u);
      double norm = r.squaredNorm();
      for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        if (r.cwiseAbs().maxCoeff() <= target) break;
        const Mat J = jacobian(u);
        const Vec step = J.completeOrthogonalDecomposition().solve(-r);
        double lam = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 30; ++ls, lam *= 0.5) {
          const Vec trial = detail::clamp_to_simplex(u + lam * step, t);
          const Vec rt = residual(trial);
          const double nt = rt.squaredNorm();
          if (nt < norm) {
            u = trial;
            r = rt;
            norm = nt;
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
      a.res = r.cwiseAbs().maxCoeff();
      a.ok = a.res <= target;
      a.s = detail::full_times(u, t);
    } catch (const IntegrationFailure&) {
      a.ok = false;
    }
    return a;
  };

  const auto attempts = parallel_map<Attempt>(opt.seeds, run, std::max(1u, opt.threads));
  for (const auto& a : attempts)
    if (a.ok) classify(a.s, a.res);
  return out;
}

/**
 * The refined field set {(i/b) v_j : -ab <= i <= ab, j in [k]}, ordered by
 * (j, i). Zero fields are kept.
 */
inline FieldSet refine_fields(const FieldSet& fs, int a, int b, std::size_t max_fields = 4096) {
  if (a < 1 || b < 1) throw InvalidArgument("refine_fields: a and b must be >= 1");
  const long long per = 2LL * a * b + 1;
  if (per * fs.k() > static_cast<long long>(max_fields))
    throw ResourceLimit("refine_fields: " + std::to_string(per * fs.k()) + " fields exceed the guard");
  std::vector<VectorField> out;
  for (int j = 1; j <= fs.k(); ++j) {
    const VectorField base = fs.field(j);
    for (long long i = -1LL * a * b; i <= 1LL * a * b; ++i) {
      const double m = static_cast<double>(i) / b;
      VectorField v;
      v.eval = [base, m](const Vec& x) { return Vec(m * base.eval(x)); };
      if (base.jacobian) v.jacobian = [base, m](const Vec& x) { return Mat(m * base.jacobian(x)); };
      v.label = "(" + std::to_string(i) + "/" + std::to_string(b) + ")" + (base.label.empty() ? "v" : base.label);
      out.push_back(std::move(v));
    }
  }
  return FieldSet(fs.d(), std::move(out), fs.global_flows());
}

/// Multipliers i/b in the order refine_fields produces them for one field.
inline std::vector<double> refinement_multipliers(int a, int b) {
  if (a < 1 || b < 1) throw InvalidArgument("refinement_multipliers: a and b must be >= 1");
  std::vector<double> out;
  for (long long i = -1LL * a * b; i <= 1LL * a * b; ++i) out.push_back(static_cast<double>(i) / b);
  return out;
}

}  // namespace dpath
