#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpath/errors.hpp"
#include "dpath/parallel.hpp"
#include "dpath/patterns.hpp"
#include "dpath/polytope.hpp"
#include "dpath/system.hpp"

namespace dpath {

struct SeriesValue {
  double value = 0.0;
  std::size_t terms_used = 0;
  double last_term = 0.0;
};

// ---------------------------------------------------------------------------
// direct influences and pattern sums

struct DirectInfluences {
  /// t = 0 and p = q: the point influences itself.
  bool self = false;
  std::vector<int> fields;
};

inline DirectInfluences direct_influences(const ConstantSystem& sys, const Vec& p, const Vec& q, double t,
                                          double tol = kDefaultTol) {
  sys.validate();
  check_point(sys, p, "direct_influences p");
  check_point(sys, q, "direct_influences q");
  if (!(t >= 0.0)) throw InvalidArgument("direct_influences: t must be >= 0");
  DirectInfluences out;
  auto gap = [&](const Vec& diff) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < diff.size(); ++i) {
      double v = diff[i];
      if (sys.topology == Topology::torus) {
        v -= std::floor(v);
        v = std::min(v, 1.0 - v);
      }
      g = std::max(g, std::abs(v));
    }
    return g;
  };
  const double scale = 1.0 + std::max(p.size() ? p.cwiseAbs().maxCoeff() : 0.0, q.size() ? q.cwiseAbs().maxCoeff() : 0.0);
  if (t == 0.0) {
    out.self = gap(q - p) <= tol * scale;
    return out;
  }
  for (int j = 1; j <= sys.k; ++j)
    if (gap(p + t * sys.field(j) - q) <= tol * (scale + t * sys.A.col(j - 1).cwiseAbs().maxCoeff()))
      out.fields.push_back(j);
  return out;
}

/**
 * Volume of one pattern piece. On the torus the caller picks the lift: the
 * endpoint used is q + winding.
 */
inline NormalizedVolume piece_volume(const ConstantSystem& sys, const Pattern& c, const Vec& p, const Vec& q, double t,
                                     const std::optional<Vec>& winding = std::nullopt, double tol = kDefaultTol) {
  if (winding) {
    if (sys.topology != Topology::torus) throw InvalidArgument("piece_volume: winding given for an affine system");
    if (winding->size() != sys.d) throw InvalidArgument("piece_volume: winding has the wrong dimension");
    for (Eigen::Index i = 0; i < winding->size(); ++i)
      if ((*winding)[i] != std::round((*winding)[i])) throw InvalidArgument("piece_volume: winding must be integral");
    return normalized_volume(sys, c, p, q + *winding, t, tol);
  }
  return normalized_volume(sys, c, p, q, t, tol);
}

struct VolumeOptions {
  std::optional<double> lambda;
  std::uint64_t pattern_budget = 2'000'000;
  unsigned threads = 0;
  double tol = kDefaultTol;
};

struct ShellEntry {
  std::size_t length = 0;
  double volume = 0.0;
};

struct VolumeReport {
  double total = 0.0;
  /// Only shells with a nonzero contribution are listed.
  std::vector<ShellEntry> per_length;
  std::size_t truncation_length = 0;
  /// Contribution of the outermost shell.
  double tail_estimate = 0.0;
  /// sum over longer patterns of k(k-1)^n t^n / n! (weighted in lambda mode).
  double tail_bound = 0.0;
  std::optional<double> lambda;
  std::size_t patterns_evaluated = 0;
  /// Pieces with positive volume whose base polytope has positive dimension.
  std::size_t flagged_pieces = 0;
  /// Point-base pieces with positive volume in which some field runs for zero time.
  std::size_t degenerate_pieces = 0;
  /// Torus lifts q + w that were summed over.
  std::vector<Vec> windings;
};

namespace detail {

inline double lambda_weight(const std::optional<double>& lambda, std::size_t length) {
  if (!lambda) return 1.0;
  const double n = static_cast<double>(length - 1);
  return std::exp(n * std::log(*lambda) - std::lgamma(n + 1.0));
}

inline double shell_tail_bound(int k, double t, std::size_t max_len, const std::optional<double>& lambda) {
  if (k < 2 || t == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t n = max_len; n < max_len + 2000; ++n) {
    const double lg = std::log(static_cast<double>(k)) + static_cast<double>(n) * std::log(k - 1.0) +
                      static_cast<double>(n) * std::log(t) - std::lgamma(n + 1.0);
    const double term = std::exp(lg) * lambda_weight(lambda, n + 1);
    total += term;
    if (n > max_len + 4 && term <= 1e-18 * std::max(total, 1e-300)) break;
  }
  return total;
}

inline std::vector<Vec> torus_windings(const ConstantSystem& sys, const Vec& p, const Vec& q, double t) {
  std::vector<Vec> out;
  const Vec base = q - p;
  std::vector<int> lo(static_cast<std::size_t>(sys.d)), hi(static_cast<std::size_t>(sys.d));
  for (int i = 0; i < sys.d; ++i) {
    const double reach = t * sys.A.row(i).cwiseAbs().maxCoeff() + 1e-9;
    lo[static_cast<std::size_t>(i)] = static_cast<int>(std::ceil(-reach - base[i]));
    hi[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(reach - base[i]));
    if (lo[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)]) return out;
  }
  Vec w(sys.d);
  std::function<void(int)> rec = [&](int i) {
    if (i == sys.d) {
      out.push_back(w);
      return;
    }
    for (int v = lo[static_cast<std::size_t>(i)]; v <= hi[static_cast<std::size_t>(i)]; ++v) {
      w[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace detail

/**
 * Sum of piece volumes over all patterns of length <= max_len. Affine systems
 * use q directly; torus systems add up every lift q + w that time t can reach.
 */
inline VolumeReport total_volume(const ConstantSystem& sys, const Vec& p, const Vec& q, double t, std::size_t max_len,
                                 const VolumeOptions& opt = {}) {
  sys.validate();
  check_point(sys, p, "total_volume p");
  check_point(sys, q, "total_volume q");
  if (max_len < 1) throw InvalidArgument("total_volume: max_len must be >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("total_volume: t must be finite and >= 0");
  if (opt.lambda && !(*opt.lambda > 0.0)) throw InvalidArgument("total_volume: lambda must be positive");

  VolumeReport rep;
  rep.truncation_length = max_len;
  rep.lambda = opt.lambda;
  if (sys.topology == Topology::torus)
    rep.windings = detail::torus_windings(sys, p, q, t);
  else
    rep.windings.push_back(Vec::Zero(sys.d));

  long double needed = 0.0L;
  for (std::size_t len = 1; len <= max_len; ++len) needed += static_cast<long double>(pattern_count(len - 1, sys.k));
  needed *= static_cast<long double>(std::max<std::size_t>(rep.windings.size(), 1));
  if (needed > static_cast<long double>(opt.pattern_budget))
    throw ResourceLimit("total_volume: " + std::to_string(static_cast<double>(needed)) +
                        " pattern evaluations exceed the budget of " + std::to_string(opt.pattern_budget));

  struct Job {
    Pattern c;
    std::size_t winding;
  };
  std::vector<Job> jobs;
  for (std::size_t len = 1; len <= max_len; ++len)
    for (auto& c : enumerate_patterns(len - 1, sys.k))
      for (std::size_t w = 0; w < rep.windings.size(); ++w) jobs.push_back({c, w});

  const auto vols = parallel_map<NormalizedVolume>(
      jobs.size(),
      [&](std::size_t i) {
        return normalized_volume(sys, jobs[i].c, p, q + rep.windings[jobs[i].winding], t, opt.tol);
      },
      resolve_threads(opt.threads));

  std::vector<double> shells(max_len + 1, 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& v = vols[i];
    if (v.value == 0.0) continue;
    shells[jobs[i].c.length()] += v.value;
    if (v.base_flagged) ++rep.flagged_pieces;
    if (v.status == HullStatus::point) {
      auto g = analyze_piece(sys, jobs[i].c, p, q + rep.windings[jobs[i].winding], t, opt.tol);
      const Vec& s = g.hull.vertices.front();
      if (s.size() && s.minCoeff() <= opt.tol * g.base.scale()) ++rep.degenerate_pieces;
    }
  }
  rep.patterns_evaluated = jobs.size();
  for (std::size_t len = 1; len <= max_len; ++len) {
    const double w = detail::lambda_weight(opt.lambda, len);
    const double shell = shells[len] * w;
    if (shells[len] != 0.0) rep.per_length.push_back({len, shell});
    rep.total += shell;
  }
  rep.tail_estimate = shells[max_len] * detail::lambda_weight(opt.lambda, max_len);
  rep.tail_bound = detail::shell_tail_bound(sys.k, t, max_len, opt.lambda) *
                   static_cast<double>(std::max<std::size_t>(rep.windings.size(), 1));
  return rep;
}

// ---------------------------------------------------------------------------
// closed forms

namespace detail {

inline constexpr std::size_t kMaxSeriesTerms = 100000;

/// sum_n term_n where term_{n+1} = term_n * ratio(n), stopping once terms stop mattering.
template <class Ratio>
SeriesValue sum_ratio_series(double first, Ratio&& ratio) {
  SeriesValue out;
  double term = first;
  for (std::size_t n = 0; n < kMaxSeriesTerms; ++n) {
    out.value += term;
    out.terms_used = n + 1;
    out.last_term = term;
    if (term == 0.0) break;
    const double next = term * ratio(n);
    if (n > 2 && std::abs(next) <= 1e-17 * std::abs(out.value) && std::abs(ratio(n)) < 0.5) {
      out.last_term = next;
      break;
    }
    term = next;
  }
  if (out.terms_used == kMaxSeriesTerms) throw IntegrationFailure("series did not converge within the term cap");
  return out;
}

}  // namespace detail

/** i_k(x, y) = sum_n x^n y^{n+k} / (n! (n+k)!), with i_{-k}(x, y) = i_k(y, x). */
inline SeriesValue bessel_i(int k, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0)) throw InvalidArgument("bessel_i: x and y must be >= 0");
  if (k < 0) return bessel_i(-k, y, x);
  const double first = (k == 0 ? 1.0 : std::pow(y, k)) / std::tgamma(k + 1.0);
  const double xy = x * y;
  return detail::sum_ratio_series(first, [&](std::size_t n) {
    const double m = static_cast<double>(n) + 1.0;
    return xy / (m * (m + k));
  });
}

/**
 * Volume from the origin to (x, y) under the coordinate fields of the plane:
 * i_{-1} + 2 i_0 + i_1 in the open quadrant, 1 on the open axes, 1 at the
 * origin (the t = 0 identity), 0 elsewhere.
 */
inline SeriesValue grid2_volume(double x, double y) {
  if (x < 0.0 || y < 0.0) return {};
  if (x == 0.0 || y == 0.0) return {1.0, 1, 0.0};
  // a_n = (xy)^n / n!^2 and the summand is a_n (2 + (x + y)/(n + 1))
  const double xy = x * y;
  const double s = x + y;
  SeriesValue out;
  double a = 1.0;
  for (std::size_t n = 0; n < detail::kMaxSeriesTerms; ++n) {
    const double term = a * (2.0 + s / (n + 1.0));
    out.value += term;
    out.terms_used = n + 1;
    out.last_term = term;
    if (n > 2 && term <= 1e-17 * out.value && xy < (n + 1.0) * (n + 1.0) * 0.5) break;
    a *= xy / ((n + 1.0) * (n + 1.0));
  }
  return out;
}

/** 2(e^t - 1). */
inline double grid2_wave(double t) {
  if (!(t > 0.0)) throw InvalidArgument("grid2_wave: t must be positive");
  return 2.0 * std::expm1(t);
}

/**
 * The two-speed line R with fields +1 and -1: the series as printed,
 * sum_n [ u^n/n!^2 + 2t u^n/((n+1)! n!) ] 2 with u = (t^2 - x^2)/4.
 */
inline SeriesValue dim1_two_speed_volume(double x, double t) {
  if (!(t > 0.0)) throw InvalidArgument("dim1_two_speed_volume: t must be positive");
  const double ax = std::abs(x);
  if (ax > t) return {};
  if (ax == t) return {1.0, 1, 0.0};
  const double u = (t - ax) * (t + ax) / 4.0;
  SeriesValue out;
  double b = 1.0;
  for (std::size_t n = 0; n < detail::kMaxSeriesTerms; ++n) {
    const double term = b * (2.0 + 4.0 * t / (n + 1.0));
    out.value += term;
    out.terms_used = n + 1;
    out.last_term = term;
    if (n > 2 && term <= 1e-17 * out.value && u < (n + 1.0) * (n + 1.0) * 0.5) break;
    b *= u / ((n + 1.0) * (n + 1.0));
  }
  return out;
}

/**
 * The same moduli summed pattern by pattern under the fibered measure:
 * sum_n u^n/n!^2 (2 + t/(n+1)). At |x| = t the degenerate patterns add up
 * to 3 + t.
 */
inline SeriesValue dim1_pattern_series(double x, double t) {
  if (!(t > 0.0)) throw InvalidArgument("dim1_pattern_series: t must be positive");
  const double ax = std::abs(x);
  if (ax > t) return {};
  if (ax == t) return {3.0 + t, 3, 0.0};
  const double u = (t - ax) * (t + ax) / 4.0;
  SeriesValue out;
  double b = 1.0;
  for (std::size_t n = 0; n < detail::kMaxSeriesTerms; ++n) {
    const double term = b * (2.0 + t / (n + 1.0));
    out.value += term;
    out.terms_used = n + 1;
    out.last_term = term;
    if (n > 2 && term <= 1e-17 * out.value && u < (n + 1.0) * (n + 1.0) * 0.5) break;
    b *= u / ((n + 1.0) * (n + 1.0));
  }
  return out;
}

/** 10e^t + 6e^{-t} - 16. */
inline double dim1_wave(double t) {
  if (!(t > 0.0)) throw InvalidArgument("dim1_wave: t must be positive");
  return 10.0 * std::exp(t) + 6.0 * std::exp(-t) - 16.0;
}

/** Integral over [-t, t] of dim1_pattern_series: 4(e^t - 1). */
inline double dim1_pattern_wave(double t) {
  if (!(t > 0.0)) throw InvalidArgument("dim1_pattern_wave: t must be positive");
  return 4.0 * std::expm1(t);
}

/** 2 sum_n C(n, floor(n/2)) tau^n / n!. */
inline SeriesValue central_binomial_series(double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("central_binomial_series: tau must be >= 0");
  return detail::sum_ratio_series(2.0, [&](std::size_t n) { return tau / (static_cast<double>(n / 2) + 1.0); });
}

struct MaxInfluence {
  double x = 0.0;
  double y = 0.0;
  SeriesValue value;
  /// Maximizer of grid2_volume(s, t - s) found by golden-section search.
  double search_argmax = 0.0;
};

/**
 * The point of highest influence on x + y = t, which is (t/2, t/2), with the
 * central binomial series at tau = t/2 (equal to grid2_volume(t/2, t/2)).
 */
inline MaxInfluence grid2_max_influence(double t) {
  if (!(t >= 0.0)) throw InvalidArgument("grid2_max_influence: t must be >= 0");
  MaxInfluence out;
  out.x = out.y = 0.5 * t;
  out.value = central_binomial_series(0.5 * t);
  if (t == 0.0) return out;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = t;
  double c = b - g * (b - a), d = a + g * (b - a);
  auto f = [&](double s) { return grid2_volume(s, t - s).value; };
  double fc = f(c), fd = f(d);
  while (b - a > 1e-10 * std::max(1.0, t)) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  out.search_argmax = 0.5 * (a + b);
  return out;
}

/**
 * Volume from the origin to x under the k coordinate fields of R^k, truncated
 * to patterns of length <= max_len. Each support A containing supp(x) with
 * |A| >= 2 contributes sum_{n_A} |PSh(n_A + 1)| prod x_j^{n_j} / n_j!.
 * A single positive coordinate gives 1, the origin gives 1, any negative
 * coordinate gives 0.
 */
inline SeriesValue gridk_volume(const std::vector<double>& x, std::size_t max_len) {
  if (x.size() < 2) throw InvalidArgument("gridk_volume: need at least two coordinates");
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("gridk_volume: non-finite coordinate");
    if (v < 0.0) return {};
  }
  if (max_len > ShuffleCounter::kMaxTotal)
    throw ResourceLimit("gridk_volume: truncation above " + std::to_string(ShuffleCounter::kMaxTotal));
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size();
  std::size_t positive = 0;
  for (double v : xs) positive += v > 0.0 ? 1 : 0;
  if (positive <= 1) return {1.0, 1, 0.0};

  ShuffleCounter counter;
  SeriesValue out;
  const std::size_t zeros = k - positive;  // sorted: zeros come first
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << zeros); ++mask) {
    std::vector<double> xa;
    for (std::size_t j = 0; j < zeros; ++j)
      if (mask >> j & 1u) xa.push_back(0.0);
    for (std::size_t j = zeros; j < k; ++j) xa.push_back(xs[j]);
    const std::size_t a = xa.size();
    if (a > max_len) continue;
    std::vector<std::size_t> blocks(a, 1);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t len) {
      if (i == a) {
        double term = counter.count(blocks).convert_to<double>();
        for (std::size_t j = 0; j < a; ++j) {
          const std::size_t e = blocks[j] - 1;
          if (e) term *= std::pow(xa[j], static_cast<double>(e)) / std::tgamma(e + 1.0);
        }
        out.value += term;
        ++out.terms_used;
        if (len == max_len) out.last_term += term;
        return;
      }
      for (std::size_t b = 1; len + b + (a - i - 1) <= max_len; ++b) {
        if (xa[i] == 0.0 && b > 1) break;
        blocks[i] = b;
        rec(i + 1, len + b);
      }
      blocks[i] = 1;
    };
    rec(0, 0);
  }
  return out;
}

struct DirectEvent {
  int field = 0;
  double time = 0.0;
};

struct TorusVolume {
  SeriesValue value;
  bool time_compatible = true;
  /// One-direction arrivals; these are atoms in t and are never added to value.
  std::vector<DirectEvent> direct_events;
  std::size_t windings = 0;
};

/**
 * Flat torus T^k with coordinate fields, from 0 to x in (0,1]^k with total
 * winding m: sum over m_1 + ... + m_k = m of the plane volume at x + m.
 * When t is given it must equal sum(x) + m, otherwise the moduli are empty.
 */
inline TorusVolume torus_volume(const std::vector<double>& x, std::size_t m, std::optional<double> t = std::nullopt,
                                std::size_t max_len = 24) {
  if (x.size() < 2) throw InvalidArgument("torus_volume: need at least two coordinates");
  std::size_t interior = 0;
  for (double v : x) {
    if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument("torus_volume: coordinates must lie in (0, 1]");
    interior += v < 1.0 ? 1 : 0;
  }
  if (interior < 2) throw InvalidArgument("torus_volume: at least two coordinates must lie in (0, 1)");
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (double v : xs) sum += v;
  TorusVolume out;
  if (t) {
    const double expect = sum + static_cast<double>(m);
    if (std::abs(*t - expect) > 1e-12 * std::max(1.0, expect)) {
      out.time_compatible = false;
      return out;
    }
  }
  const std::size_t k = xs.size();
  std::vector<std::size_t> w(k, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == k) {
      w[i] = left;
      std::vector<double> pt(k);
      for (std::size_t j = 0; j < k; ++j) pt[j] = xs[j] + static_cast<double>(w[j]);
      SeriesValue v = k == 2 ? grid2_volume(pt[0], pt[1]) : gridk_volume(pt, max_len);
      out.value.value += v.value;
      out.value.terms_used += v.terms_used;
      out.value.last_term = std::max(out.value.last_term, std::abs(v.last_term));
      ++out.windings;
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      w[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, m);
  // a single field reaches x when every other coordinate is 0 mod 1
  for (std::size_t j = 0; j < k; ++j) {
    bool ok = true;
    for (std::size_t i = 0; i < k; ++i)
      if (i != j && xs[i] != 1.0) ok = false;
    if (ok) out.direct_events.push_back({static_cast<int>(j) + 1, xs[j] + static_cast<double>(m)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  std::size_t accepted = 0;
  /// The base is a point or empty and the value was evaluated directly.
  bool exact = false;
};

/**
 * Independent estimate of a piece volume: solve the base system for a basis,
 * sample the free group sums uniformly in [0, t]^f, reject negative basic
 * variables, and average the fiber volume. The graph Jacobian
 * sqrt(det(I + G^T G)) converts chart measure to Hausdorff measure.
 */
inline McEstimate mc_piece_volume_oracle(const ConstantSystem& sys, const Pattern& c, const Vec& p, const Vec& q,
                                         double t, std::size_t samples, std::uint64_t seed,
                                         double tol = kDefaultTol) {
  if (samples == 0) throw InvalidArgument("mc_piece_volume_oracle: samples must be positive");
  PieceGeometry g = analyze_piece(sys, c, p, q, t, tol);
  McEstimate out;
  out.samples = samples;
  if (g.hull.status != HullStatus::positive_dim) {
    out.exact = true;
    out.estimate = g.volume.value;
    return out;
  }
  const ConstraintSystem& cs = g.base;
  const int m = static_cast<int>(cs.M.cols());
  const int r = cs.rank;
  std::vector<int> best;
  double best_det = 0.0;
  detail::for_each_subset(m, r, [&](const std::vector<int>& I) {
    Mat MI(r, r);
    for (int j = 0; j < r; ++j) MI.col(j) = cs.reduced_M.col(I[static_cast<std::size_t>(j)]);
    const double det = std::abs(MI.determinant());
    if (det > best_det) {
      best_det = det;
      best = I;
    }
  });
  if (best.empty() || best_det <= tol) throw DegenerateSystem("mc_piece_volume_oracle: no usable basis");
  std::vector<int> free_cols;
  for (int j = 0; j < m; ++j)
    if (std::find(best.begin(), best.end(), j) == best.end()) free_cols.push_back(j);
  const int f = static_cast<int>(free_cols.size());
  Mat MB(r, r), MN(r, f);
  for (int j = 0; j < r; ++j) MB.col(j) = cs.reduced_M.col(best[static_cast<std::size_t>(j)]);
  for (int j = 0; j < f; ++j) MN.col(j) = cs.reduced_M.col(free_cols[static_cast<std::size_t>(j)]);
  Eigen::FullPivLU<Mat> lu(MB);
  const Vec h = lu.solve(cs.reduced_b);
  const Mat G = lu.solve(MN);
  const double jac = std::sqrt((Mat::Identity(f, f) + G.transpose() * G).determinant());
  const double box = std::pow(t, f);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, t);
  double sum = 0.0, sum2 = 0.0;
  Vec sigma(m), sN(f);
  for (std::size_t i = 0; i < samples; ++i) {
    for (int j = 0; j < f; ++j) sN[j] = unif(rng);
    const Vec sB = h - G * sN;
    if (sB.minCoeff() < 0.0) continue;
    for (int j = 0; j < r; ++j) sigma[best[static_cast<std::size_t>(j)]] = sB[j];
    for (int j = 0; j < f; ++j) sigma[free_cols[static_cast<std::size_t>(j)]] = sN[j];
    const double v = fiber_volume(sigma, g.multiplicity);
    sum += v;
    sum2 += v * v;
    ++out.accepted;
  }
  if (static_cast<double>(out.accepted) < 1e-4 * static_cast<double>(samples))
    throw OracleInfeasible("mc_piece_volume_oracle: acceptance rate below 1e-4");
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  const double factor = box * jac * g.base_factor;
  out.estimate = mean * factor;
  out.standard_error = std::sqrt(var / n) * factor;
  return out;
}

}  // namespace dpath
