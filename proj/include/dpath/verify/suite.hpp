#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dpath/dpath.hpp"
#include "dpath/io/json_out.hpp"

namespace dpath::verify {

/**
 * One oracle comparison. status is "pass", "fail", "discrepancy" (a known
 * disagreement between two published forms, reported but not failing) or
 * "info" (a reported value without a pass/fail meaning).
 */
struct Check {
  std::string name;
  std::string status;
  double observed = 0.0;
  double expected = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;

  bool failed() const { return status == "fail"; }
};

inline Check compare(std::string name, double observed, double expected, double tol, std::string detail = {}) {
  Check c{std::move(name), "pass", observed, expected, std::abs(observed - expected), tol, std::move(detail)};
  if (!(c.error <= tol)) c.status = "fail";
  return c;
}

inline Check compare_rel(std::string name, double observed, double expected, double tol, std::string detail = {}) {
  Check c = compare(std::move(name), observed, expected, tol, std::move(detail));
  c.error = std::abs(observed - expected) / std::max(1.0, std::abs(expected));
  c.status = c.error <= tol ? "pass" : "fail";
  return c;
}

/// A count of mismatches that must be zero.
inline Check zero_mismatches(std::string name, std::size_t mismatches, std::size_t cases, std::string detail = {}) {
  Check c{std::move(name), mismatches == 0 ? "pass" : "fail", static_cast<double>(mismatches), 0.0,
          static_cast<double>(mismatches), 0.0, std::move(detail)};
  if (c.detail.empty()) c.detail = std::to_string(cases) + " cases";
  return c;
}

// ---------------------------------------------------------------------------
// combinatorics

/** Enumerated pattern counts against k(k-1)^n. */
inline Check check_pattern_counts(std::size_t n_max, int k_max) {
  std::size_t bad = 0, cases = 0;
  for (int k = 1; k <= k_max; ++k)
    for (std::size_t n = 0; n <= n_max; ++n) {
      std::uint64_t formula = static_cast<std::uint64_t>(k);
      for (std::size_t i = 0; i < n; ++i) formula *= static_cast<std::uint64_t>(k - 1);
      const auto pats = enumerate_patterns(n, k);
      bad += pats.size() != formula || pattern_count(n, k) != formula;
      ++cases;
    }
  return zero_mismatches("patterns.count", bad, cases);
}

/**
 * Enumerated sparse subsets against the printed partition identity and
 * against the same identity over compositions. The partition form undercounts
 * in about half the cases (first at m = 4, k = 1); its row is a discrepancy,
 * the composition row must pass.
 */
inline std::vector<Check> check_sparse_subsets(std::size_t m_max) {
  std::size_t bad_p = 0, bad_c = 0, cases = 0;
  for (std::size_t m = 2; m <= m_max; ++m)
    for (std::size_t k = 1; k < m; ++k) {
      const auto r = sparse_subset_count(m, k);
      bad_p += !r.partition_formula || *r.partition_formula != r.enumerated;
      bad_c += !r.composition_formula || *r.composition_formula != r.enumerated;
      ++cases;
    }
  Check printed = zero_mismatches("patterns.sparse_subsets_partitions", bad_p, cases);
  if (printed.failed()) printed.status = "discrepancy";
  return {printed, zero_mismatches("patterns.sparse_subsets_compositions", bad_c, cases)};
}

/** Tally of enumerated patterns by content against the shuffle count, all contents of total <= max_total. */
inline Check check_shuffles(int k, std::size_t max_total) {
  std::map<std::vector<std::size_t>, Count> tally;
  for (std::size_t len = 1; len <= max_total; ++len)
    for (const auto& c : enumerate_patterns(len - 1, k)) ++tally[content(c).counts];
  std::size_t bad = 0;
  ShuffleCounter counter;
  for (const auto& [counts, n] : tally) {
    std::vector<std::size_t> blocks;
    for (std::size_t b : counts)
      if (b) blocks.push_back(b);
    bad += counter.count(blocks) != n;
  }
  return zero_mismatches("patterns.perfect_shuffles", bad, tally.size());
}

// ---------------------------------------------------------------------------
// polytope

/** Zero fields leave only the time constraint: every piece is the simplex of volume t^n/n!. */
inline Check check_simplex(std::size_t n_max, double t) {
  double worst = 0.0;
  const Vec z = Vec::Zero(1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const int k = static_cast<int>(n) + 1;
    ConstantSystem sys(Mat::Zero(1, k));
    std::vector<int> e;
    for (int i = 1; i <= k; ++i) e.push_back(i);
    const double v = normalized_volume(sys, Pattern(e, k), z, z, t).value;
    worst = std::max(worst, std::abs(v - std::pow(t, static_cast<double>(n)) / std::tgamma(n + 1.0)));
  }
  return compare("polytope.simplex_volume", worst, 0.0, 1e-12, "max error for n <= " + std::to_string(n_max));
}

// ---------------------------------------------------------------------------
// closed forms against the engine

struct Options {
  unsigned threads = 0;
  std::uint64_t seed = 1;
  std::size_t mc_samples = 100000;
  std::size_t mc_pieces = 3;
  std::size_t invariance_systems = 6;
  std::size_t invariance_max_len = 4;
  std::size_t plant_instances = 12;
};

inline VolumeOptions volume_options(const Options& o) {
  VolumeOptions v;
  v.threads = o.threads;
  return v;
}

inline double engine_dim1(double x, double t, std::size_t max_len, const Options& o) {
  Vec p = Vec::Zero(1), q(1);
  q << x;
  return total_volume(ConstantSystem::two_speed(), p, q, t, max_len, volume_options(o)).total;
}

inline double engine_grid(const std::vector<double>& x, double t, std::size_t max_len, const Options& o) {
  const int d = static_cast<int>(x.size());
  Vec q(d);
  for (int i = 0; i < d; ++i) q[i] = x[static_cast<std::size_t>(i)];
  return total_volume(ConstantSystem::grid(d), Vec::Zero(d), q, t, max_len, volume_options(o)).total;
}

/// 1/pi int_0^pi exp(z cos θ) cos(nθ) dθ, the integral form of I_n.
inline double bessel_integral(int n, double z) {
  auto f = [&](double th) { return std::exp(z * std::cos(th)) * std::cos(n * th); };
  return integrate_gk15<double>(f, 0.0, std::numbers::pi, 1e-14).value / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// random constant systems

inline Pattern random_pattern(std::mt19937_64& rng, int k, std::size_t len) {
  std::vector<int> e;
  for (std::size_t i = 0; i < len; ++i) {
    int j;
    do {
      j = static_cast<int>(rng() % static_cast<std::uint64_t>(k)) + 1;
    } while (!e.empty() && j == e.back());
    e.push_back(j);
  }
  return Pattern(e, k);
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

struct PlantedPiece {
  ConstantSystem sys;
  Pattern c;
  Vec p;
  Vec q;
  double t = 0.0;
};

/** Random fields in [-1, 1], a random pattern and times, and q placed where the path ends. */
inline PlantedPiece plant(std::mt19937_64& rng, int d, int k, std::size_t len) {
  Mat A(d, k);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = uniform(rng, -1.0, 1.0);
  PlantedPiece pc{ConstantSystem(A), random_pattern(rng, k, len), Vec(d), Vec(d), 0.0};
  for (int i = 0; i < d; ++i) pc.p[i] = uniform(rng, -1.0, 1.0);
  pc.q = pc.p;
  for (std::size_t i = 0; i < len; ++i) {
    const double s = uniform(rng, 0.1, 1.0);
    pc.t += s;
    pc.q += s * A.col(pc.c[i] - 1);
  }
  return pc;
}

/**
 * Per-pattern volumes are unchanged by a translation, an invertible linear
 * map, a relabelling of the fields, and by reversal (reverse the pattern,
 * negate the fields, swap p and q). Returns the worst absolute deviation.
 */
inline double invariance_error(const PlantedPiece& pc, std::size_t max_len, std::mt19937_64& rng,
                               std::size_t* pieces = nullptr) {
  const ConstantSystem& sys = pc.sys;
  const int d = sys.d, k = sys.k;
  Vec shift(d);
  for (int i = 0; i < d; ++i) shift[i] = uniform(rng, -2.0, 2.0);
  Mat T(d, d);
  do {
    for (Eigen::Index i = 0; i < T.size(); ++i) T.data()[i] = uniform(rng, -1.0, 1.0);
    T += 1.5 * Mat::Identity(d, d);
  } while (std::abs(T.determinant()) < 0.2);
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) perm[static_cast<std::size_t>(j)] = j + 1;
  std::shuffle(perm.begin(), perm.end(), rng);

  const ConstantSystem lin(T * sys.A);
  Mat Ap(d, k);
  for (int j = 0; j < k; ++j) Ap.col(perm[static_cast<std::size_t>(j)] - 1) = sys.A.col(j);
  const ConstantSystem per(Ap);
  const ConstantSystem neg(Mat(-sys.A));

  double worst = 0.0;
  for (std::size_t len = 1; len <= max_len; ++len)
    for (const auto& c : enumerate_patterns(len - 1, k)) {
      const double v = normalized_volume(sys, c, pc.p, pc.q, pc.t).value;
      std::vector<int> relabel;
      for (int e : c.entries()) relabel.push_back(perm[static_cast<std::size_t>(e - 1)]);
      const double others[] = {
          normalized_volume(sys, c, pc.p + shift, pc.q + shift, pc.t).value,
          normalized_volume(lin, c, T * pc.p, T * pc.q, pc.t).value,
          normalized_volume(per, Pattern(relabel, k), pc.p, pc.q, pc.t).value,
          normalized_volume(neg, reverse(c), pc.q, pc.p, pc.t).value,
      };
      for (double o : others) worst = std::max(worst, std::abs(o - v));
      if (pieces && v != 0.0) ++*pieces;
    }
  return worst;
}

inline Check check_invariance(std::size_t systems, std::size_t max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t s = 0; s < systems; ++s) {
    const int d = 1 + static_cast<int>(s % 3);
    const int k = 2 + static_cast<int>((s / 3) % 3);
    const std::size_t len = 1 + rng() % max_len;
    PlantedPiece pc = plant(rng, d, k, len);
    worst = std::max(worst, invariance_error(pc, max_len, rng, &nonzero));
  }
  return compare("polytope.invariance", worst, 0.0, 1e-10,
                 std::to_string(systems) + " systems, " + std::to_string(nonzero) + " nonzero pieces");
}

/** A planted piece whose base polytope has positive dimension and positive volume. */
inline PlantedPiece positive_dim_piece(std::mt19937_64& rng) {
  for (;;) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int k = d + 2;
    const std::size_t len = static_cast<std::size_t>(k) + rng() % 3;
    PlantedPiece pc = plant(rng, d, k, len);
    if (content(pc.c).support().size() != static_cast<std::size_t>(k)) continue;
    const auto v = normalized_volume(pc.sys, pc.c, pc.p, pc.q, pc.t);
    if (v.status == HullStatus::positive_dim && v.value > 0.0) return pc;
  }
}

/** Largest |MC - exact| in standard errors over the given number of pieces. */
inline Check check_monte_carlo(std::size_t pieces, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::size_t done = 0;
  while (done < pieces) {
    const PlantedPiece pc = positive_dim_piece(rng);
    const double exact = normalized_volume(pc.sys, pc.c, pc.p, pc.q, pc.t).value;
    McEstimate mc;
    try {
      mc = mc_piece_volume_oracle(pc.sys, pc.c, pc.p, pc.q, pc.t, samples, rng());
    } catch (const OracleInfeasible&) {
      continue;
    }
    const double z = mc.standard_error > 0.0 ? std::abs(mc.estimate - exact) / mc.standard_error
                                             : (mc.estimate == exact ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    ++done;
  }
  return compare("polytope.monte_carlo", worst, 0.0, 3.0,
                 std::to_string(pieces) + " pieces, " + std::to_string(samples) + " samples, error in standard errors");
}

// ---------------------------------------------------------------------------
// flows

/** iterated_flow on constant fields against p + sum s_i v_{c_i}. */
inline Check check_affine_flow(std::size_t instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const int d = 1 + static_cast<int>(i % 3);
    const int k = 2 + static_cast<int>(i % 3);
    const PlantedPiece pc = plant(rng, d, k, 1 + i % 5);
    std::vector<double> s;
    Vec expect = pc.p;
    for (std::size_t r = 0; r < pc.c.length(); ++r) {
      s.push_back(uniform(rng, 0.0, 2.0));
      expect += s.back() * pc.sys.field(pc.c[r]);
    }
    const auto smp = iterated_flow(FieldSet::constant(pc.sys), pc.c, pc.p, s);
    worst = std::max(worst, (smp.end() - expect).cwiseAbs().maxCoeff());
  }
  return compare("flows.affine", worst, 0.0, 1e-10, std::to_string(instances) + " paths");
}

/** A smooth polynomial field set of degree <= 2 with small nonlinear part. */
inline FieldSet random_polynomial_fields(std::mt19937_64& rng, int d, int k, double nonlinear) {
  std::vector<std::vector<std::vector<PolyTerm>>> comps;
  for (int j = 0; j < k; ++j) {
    std::vector<std::vector<PolyTerm>> field;
    for (int i = 0; i < d; ++i) {
      std::vector<PolyTerm> terms;
      std::vector<int> zero(static_cast<std::size_t>(d), 0);
      terms.push_back({uniform(rng, -1.0, 1.0) + (i == j % d ? 1.0 : 0.0), zero});
      for (int l = 0; l < d; ++l) {
        auto pw = zero;
        pw[static_cast<std::size_t>(l)] = 1;
        terms.push_back({nonlinear * uniform(rng, -1.0, 1.0), pw});
        pw[static_cast<std::size_t>(l)] = 2;
        terms.push_back({0.5 * nonlinear * uniform(rng, -1.0, 1.0), pw});
      }
      field.push_back(std::move(terms));
    }
    comps.push_back(std::move(field));
  }
  return FieldSet::polynomial(d, comps);
}

/** flow(s1 + s2) against flow(s2) after flow(s1); returns the worst gap. */
inline Check check_semigroup(std::size_t instances, std::uint64_t seed, double tol = kDefaultFlowTol) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const int d = 1 + static_cast<int>(i % 3);
    const FieldSet fs = random_polynomial_fields(rng, d, 2, 0.3);
    Vec p(d);
    for (int r = 0; r < d; ++r) p[r] = uniform(rng, -0.5, 0.5);
    const double s1 = uniform(rng, 0.0, 0.6), s2 = uniform(rng, 0.0, 0.6);
    const int j = 1 + static_cast<int>(i % 2);
    const Vec a = flow(fs, j, p, s1 + s2, tol);
    const Vec b = flow(fs, j, flow(fs, j, p, s1, tol), s2, tol);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return compare("flows.semigroup", worst, 0.0, 10.0 * tol, std::to_string(instances) + " random polynomial fields");
}

struct PlantResult {
  std::size_t instances = 0;
  std::size_t recovered = 0;
  double worst_residual = 0.0;
};

/**
 * Plant times s, flow to q, then ask solve_piece for the piece: recovered when
 * some solution lies within 1e-6 of s with residual below 1e-6. Half the
 * instances use grid fields, half mildly nonlinear ones; n <= d so the
 * planted solution is isolated.
 */
inline PlantResult plant_and_recover(std::size_t instances, std::uint64_t seed, unsigned threads = 1) {
  std::mt19937_64 rng(seed);
  PlantResult out;
  SolveOptions so;
  so.threads = threads;
  while (out.instances < instances) {
    const int d = 2 + static_cast<int>(out.instances % 2);
    const bool nonlinear = out.instances % 4 >= 2;
    const FieldSet fs = nonlinear ? random_polynomial_fields(rng, d, d, 0.1) : FieldSet::constant(ConstantSystem::grid(d));
    const std::size_t len = 2 + rng() % static_cast<std::uint64_t>(std::min(d, 3));
    const Pattern c = random_pattern(rng, d, len);
    std::vector<double> s;
    double t = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      s.push_back(uniform(rng, 0.15, 1.0));
      t += s.back();
    }
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = uniform(rng, -0.5, 0.5);
    const Vec q = iterated_flow(fs, c, p, s).end();
    // grid pieces with a repeated field are positive-dimensional; plant only isolated ones
    if (!rank_check(fs, c, p, s).satisfied || (len - 1 > static_cast<std::size_t>(d))) continue;
    if (!nonlinear && content(c).support().size() != len) continue;
    ++out.instances;
    const auto sols = solve_piece(fs, c, p, q, t, so);
    double best_gap = INFINITY, best_res = INFINITY;
    for (const auto& tp : sols.interior) {
      double gap = 0.0;
      for (std::size_t i = 0; i < len; ++i) gap = std::max(gap, std::abs(tp.times[i] - s[i]));
      if (gap < best_gap) {
        best_gap = gap;
        best_res = (iterated_flow(fs, c, p, tp.times).end() - q).norm();
      }
    }
    if (best_gap <= 1e-6 && best_res <= 1e-6) {
      ++out.recovered;
      out.worst_residual = std::max(out.worst_residual, best_res);
    }
  }
  return out;
}

/** kernel with the unit functional against the exact piece volume, pattern by pattern. */
inline double kernel_unit_gap(const ConstantSystem& sys, const Vec& p, const Vec& q, double t, std::size_t max_len) {
  double worst = 0.0;
  for (std::size_t len = 1; len <= max_len; ++len)
    for (const auto& c : enumerate_patterns(len - 1, sys.k)) {
      const double exact = normalized_volume(sys, c, p, q, t).value;
      const Complex kv = kernel_piece(sys, c, p, q, t, PathFunctional{fn::Unit{}});
      worst = std::max(worst, std::abs(kv - Complex(exact)) / std::max(1.0, exact));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// the suite

/** Every oracle comparison at a size that runs in seconds. Results never depend on the thread count. */
inline std::vector<Check> run_suite(const Options& o) {
  std::vector<Check> out;
  out.push_back(check_pattern_counts(6, 4));
  for (auto& c : check_sparse_subsets(12)) out.push_back(c);
  out.push_back(check_shuffles(3, 7));
  out.push_back(check_simplex(6, 2.0));

  out.push_back(compare("series.bessel_i0", bessel_i(0, 1.0, 1.0).value, bessel_integral(0, 2.0), 1e-13));
  out.push_back(compare("series.bessel_i1", bessel_i(1, 1.0, 1.0).value, bessel_integral(1, 2.0), 1e-13));

  {
    const double eng = engine_dim1(0.3, 1.0, 40, o);
    out.push_back(compare("dim1.pattern_sum", eng, dim1_pattern_series(0.3, 1.0).value, 1e-8));
    Check printed = compare("dim1.printed_series", eng, dim1_two_speed_volume(0.3, 1.0).value, 1e-8,
                            "printed series against the pattern sum");
    if (printed.failed()) printed.status = "discrepancy";
    out.push_back(printed);
    Check boundary{"dim1.boundary", "info", engine_dim1(1.0, 1.0, 40, o), dim1_two_speed_volume(1.0, 1.0).value, 0.0, 0.0,
                   "|x| = t: engine value (observed) and closed-form value (expected)"};
    boundary.error = std::abs(boundary.observed - boundary.expected);
    out.push_back(boundary);
    auto prof = [](double x) { return dim1_two_speed_volume(x, 1.0).value; };
    out.push_back(compare("dim1.wave_printed", integrate_gk15<double>(prof, -1.0, 1.0, 1e-10).value, dim1_wave(1.0), 1e-4));
    KernelOptions ko;
    ko.max_len = 40;
    ko.threads = o.threads;
    const auto d1 = ConstantSystem::two_speed();
    const Vec z = Vec::Zero(1);
    const auto w = wave(d1, z, 1.0, PathFunctional{fn::Unit{}}, [](const Vec&) { return 1.0; }, builtin_front(d1, z, 1.0),
                        1e-8, ko);
    out.push_back(compare("dim1.wave_engine", w.value.real(), dim1_pattern_wave(1.0), 1e-4));
  }
  {
    out.push_back(compare("dim2.bessel", engine_grid({1.0, 1.0}, 2.0, 30, o),
                          bessel_i(-1, 1.0, 1.0).value + 2.0 * bessel_i(0, 1.0, 1.0).value + bessel_i(1, 1.0, 1.0).value,
                          1e-8));
    out.push_back(compare("dim2.engine_vs_closed", engine_grid({0.7, 1.3}, 2.0, 30, o), grid2_volume(0.7, 1.3).value, 1e-8));
    out.push_back(compare("dim2.symmetry", grid2_volume(0.7, 1.3).value, grid2_volume(1.3, 0.7).value, 0.0));
    const double h = 1e-3;
    auto v = [](double x, double y) { return grid2_volume(x, y).value; };
    const double mixed = (v(1 + h, 1 + h) - v(1 + h, 1 - h) - v(1 - h, 1 + h) + v(1 - h, 1 - h)) / (4 * h * h);
    out.push_back(compare_rel("dim2.mixed_derivative", mixed, v(1, 1), 1e-4));
    const auto mi = grid2_max_influence(1.0);
    out.push_back(compare("dim2.argmax", mi.search_argmax, 0.5, 1e-6));
    out.push_back(compare("dim2.central_binomial", central_binomial_series(0.5).value, grid2_volume(0.5, 0.5).value, 1e-10));
    KernelOptions ko;
    ko.max_len = 30;
    ko.threads = o.threads;
    const auto g = ConstantSystem::grid(2);
    const Vec q = Vec::Ones(2);
    const auto w = wave(g, q, 1.0, PathFunctional{fn::Unit{}}, [](const Vec&) { return 1.0; }, builtin_front(g, q, 1.0),
                        1e-8, ko);
    out.push_back(compare("dim2.wave_engine", w.value.real(), grid2_wave(1.0), 1e-4));
  }
  {
    out.push_back(compare("gridk.engine", engine_grid({0.5, 0.5, 0.5}, 1.5, 8, o), gridk_volume({0.5, 0.5, 0.5}, 8).value,
                          1e-8, "k = 3, truncation 8"));
    out.push_back(compare("gridk.symmetry", gridk_volume({0.2, 0.5, 0.9}, 10).value, gridk_volume({0.9, 0.2, 0.5}, 10).value,
                          0.0));
  }
  {
    double worst = 0.0;
    for (std::size_t m = 0; m <= 2; ++m) {
      const auto tv = torus_volume({0.3, 0.6}, m);
      double plane = 0.0;
      for (std::size_t a = 0; a <= m; ++a) plane += grid2_volume(0.3 + a, 0.6 + (m - a)).value;
      worst = std::max(worst, std::abs(tv.value.value - plane));
    }
    out.push_back(compare("torus.winding_sum", worst, 0.0, 0.0, "k = 2, m <= 2"));
    out.push_back(compare("torus.symmetry", torus_volume({0.3, 0.6}, 2).value.value, torus_volume({0.6, 0.3}, 2).value.value, 0.0));
    Vec q(2);
    q << 0.3, 0.6;
    VolumeOptions vo = volume_options(o);
    const auto tot = total_volume(ConstantSystem::grid(2, Topology::torus), Vec::Zero(2), q, 1.9, 30, vo);
    out.push_back(compare("torus.engine", tot.total, torus_volume({0.3, 0.6}, 1, 1.9).value.value, 1e-8, "m = 1, t = 1.9"));
  }
  out.push_back(check_invariance(o.invariance_systems, o.invariance_max_len, o.seed));
  out.push_back(check_monte_carlo(o.mc_pieces, o.mc_samples, o.seed + 1));
  out.push_back(check_affine_flow(20, o.seed + 2));
  out.push_back(check_semigroup(20, o.seed + 3));
  {
    const auto pr = plant_and_recover(o.plant_instances, o.seed + 4, 1);
    Check c = zero_mismatches("flows.plant_recover", pr.instances - pr.recovered, pr.instances);
    c.detail += ", worst residual " + io::format_double(pr.worst_residual);
    out.push_back(c);
  }
  {
    Vec z = Vec::Zero(1), x(1);
    x << 0.3;
    Mat A(1, 3);
    A << 1.0, -1.0, 0.5;
    double worst = kernel_unit_gap(ConstantSystem(A), z, x, 1.0, 5);
    worst = std::max(worst, kernel_unit_gap(ConstantSystem::grid(2), Vec::Zero(2), Vec::Ones(2), 2.0, 8));
    out.push_back(compare("kernel.unit_per_piece", worst, 0.0, 1e-9));
  }
  return out;
}

inline bool passed(const std::vector<Check>& checks) {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.failed(); });
}

}  // namespace dpath::verify
