#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "dpath/errors.hpp"

namespace dpath {

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// Gauss-Kronrod 7/15 on [-1, 1]; abscissae in decreasing order, center last.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes, center last.
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/**
 * Adaptive Gauss-Kronrod 7/15 on [a, b]. Only interior nodes are evaluated, so
 * integrands may be singular or undefined at the endpoints.
 */
template <class T, class F>
QuadResult<T> integrate_gk15(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0, int max_depth = 40) {
  QuadResult<T> out;
  std::function<void(double, double, double, int)> rec = [&](double lo, double hi, double tol, int depth) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    T fc = f(c);
    T kron = fc * detail::kWgk[7];
    T gauss = fc * detail::kWg[3];
    for (int j = 0; j < 7; ++j) {
      const double dx = h * detail::kXgk[static_cast<std::size_t>(j)];
      T s = f(c - dx) + f(c + dx);
      kron += s * detail::kWgk[static_cast<std::size_t>(j)];
      if (j % 2 == 1) gauss += s * detail::kWg[static_cast<std::size_t>(j / 2)];
    }
    out.evaluations += 15;
    kron *= h;
    gauss *= h;
    const double err = detail::magnitude(kron - gauss);
    if (err <= std::max(tol, rel_tol * detail::magnitude(kron)) || depth >= max_depth) {
      if (depth >= max_depth && err > tol) out.converged = false;
      out.value += kron;
      out.error += err;
      return;
    }
    rec(lo, c, 0.5 * tol, depth + 1);
    rec(c, hi, 0.5 * tol, depth + 1);
  };
  if (b != a) rec(a, b, abs_tol, 0);
  return out;
}

/** Adaptive Simpson with Richardson correction. */
template <class T, class F>
QuadResult<T> integrate_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 30) {
  QuadResult<T> out;
  if (b == a) return out;
  std::function<T(double, double, T, T, T, T, double, int)> rec = [&](double lo, double hi, T flo, T fmid, T fhi,
                                                                        T whole, double tol, int depth) -> T {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid);
    const double rm = 0.5 * (mid + hi);
    T flm = f(lm);
    T frm = f(rm);
    out.evaluations += 2;
    T left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    T right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    T diff = left + right - whole;
    if (depth >= max_depth || detail::magnitude(diff) <= 15.0 * tol) {
      if (depth >= max_depth && detail::magnitude(diff) > 15.0 * tol) out.converged = false;
      out.error += detail::magnitude(diff) / 15.0;
      return left + right + diff / 15.0;
    }
    return rec(lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1) +
           rec(mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1);
  };
  T fa = f(a);
  T fb = f(b);
  T fm = f(0.5 * (a + b));
  out.evaluations += 3;
  T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  out.value = rec(a, b, fa, fm, fb, whole, abs_tol, 0);
  return out;
}

/**
 * Grundmann-Moller rule of degree 2s + 1 on the n-simplex, in barycentric form.
 * Weights sum to 1, i.e. they integrate against the normalized simplex measure.
 */
struct SimplexRule {
  std::vector<std::vector<double>> points;  // n + 1 barycentric coordinates each
  std::vector<double> weights;
};

inline SimplexRule grundmann_moller(int n, int s) {
  if (n < 0 || s < 0) throw InvalidArgument("grundmann_moller: n and s must be >= 0");
  SimplexRule rule;
  if (n == 0) {
    rule.points.push_back({1.0});
    rule.weights.push_back(1.0);
    return rule;
  }
  const int d = 2 * s + 1;
  const double nfact = std::tgamma(n + 1.0);
  std::vector<int> beta(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= s; ++i) {
    const double denom = d + n - 2 * i;
    const double w = ((i % 2) ? -1.0 : 1.0) * std::pow(2.0, -2 * s) * std::pow(denom, d) /
                     (std::tgamma(i + 1.0) * std::tgamma(d + n - i + 1.0)) * nfact;
    const int total = s - i;
    // all compositions of total into n + 1 nonnegative parts
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == n) {
        beta[static_cast<std::size_t>(pos)] = left;
        std::vector<double> lam(static_cast<std::size_t>(n + 1));
        for (int v = 0; v <= n; ++v) lam[static_cast<std::size_t>(v)] = (2.0 * beta[static_cast<std::size_t>(v)] + 1.0) / denom;
        rule.points.push_back(std::move(lam));
        rule.weights.push_back(w);
        return;
      }
      for (int v = 0; v <= left; ++v) {
        beta[static_cast<std::size_t>(pos)] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, total);
  }
  return rule;
}

/// Smallest s with 2s + 1 >= degree.
inline int gm_order_for_degree(int degree) { return degree <= 1 ? 0 : (degree) / 2; }

/** Halton point in [0,1)^dim, index >= 1. */
inline std::vector<double> halton(std::size_t index, std::size_t dim) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                                   73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151};
  if (dim > sizeof(primes) / sizeof(primes[0])) throw ResourceLimit("halton: dimension above 36");
  std::vector<double> out(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const int base = primes[j];
    double f = 1.0;
    double r = 0.0;
    std::size_t i = index;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % static_cast<std::size_t>(base));
      i /= static_cast<std::size_t>(base);
    }
    out[j] = r;
  }
  return out;
}

}  // namespace dpath
