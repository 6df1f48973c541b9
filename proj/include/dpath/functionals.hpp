#pragma once

#include <cmath>
#include <complex>
#include <exception>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>

#include "dpath/errors.hpp"
#include "dpath/flows.hpp"
#include "dpath/quadrature.hpp"

namespace dpath {

using Complex = std::complex<double>;

namespace fn {

/// The constant 1: integrating it gives the volume.
struct Unit {};

/// A 1-form A; the path value is the line integral of A.
struct OneForm {
  std::function<Vec(const Vec&)> A;
};

/// exp(-sum_i int g(v, v) du) with the metric g given as a matrix field.
struct MetricExp {
  std::function<Mat(const Vec&)> g;
};

/// f(p_0) f(p_1) ... f(p_n) over the switching points.
struct PointFunction {
  std::function<double(const Vec&)> f;
};

/// exp(i S / hbar) with S the integral of L(x, v).
struct LagrangianAction {
  std::function<double(const Vec&, const Vec&)> L;
  double hbar = 1.0;
};

}  // namespace fn

using PathFunctional = std::variant<fn::Unit, fn::OneForm, fn::MetricExp, fn::PointFunction, fn::LagrangianAction>;

inline const char* functional_name(const PathFunctional& f) {
  switch (f.index()) {
    case 0: return "unit";
    case 1: return "one_form";
    case 2: return "metric_exp";
    case 3: return "point_function";
    case 4: return "lagrangian_action";
  }
  return "unknown";
}

inline bool is_unit(const PathFunctional& f) { return std::holds_alternative<fn::Unit>(f); }

namespace detail {

/// sum over segments of int_0^{s_i} h(x(u), v_{c_i}(x(u))) du.
inline double segment_integral(const FieldSet& fs, const DirectedPathSample& sample, double quad_tol, double flow_tol,
                               const std::function<double(const Vec&, const Vec&)>& h) {
  double total = 0.0;
  const auto& c = sample.timed.pattern;
  for (std::size_t i = 0; i < c.length(); ++i) {
    const double si = sample.timed.times[i];
    if (si == 0.0) continue;
    const Vec& start = sample.waypoints[i];
    const int j = c[i];
    auto integrand = [&](double u) {
      const Vec x = detail::flow_signed(fs, j, start, u, flow_tol, nullptr);
      return h(x, fs.eval(j, x));
    };
    total += integrate_simpson<double>(integrand, 0.0, si, quad_tol).value;
  }
  return total;
}

}  // namespace detail

/**
 * Value of a path functional on one directed path. Evaluator exceptions are
 * reported as functional-evaluation errors.
 */
inline Complex evaluate_functional(const PathFunctional& f, const FieldSet& fs, const DirectedPathSample& sample,
                                   double quad_tol = 1e-10, double flow_tol = kDefaultFlowTol) {
  auto guard = [&](auto&& body) -> Complex {
    try {
      return body();
    } catch (const IntegrationFailure&) {
      throw;
    } catch (const FunctionalEvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw FunctionalEvaluationError(std::string("functional ") + functional_name(f) + ": " + e.what());
    }
  };
  return std::visit(
      [&](const auto& g) -> Complex {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, fn::Unit>) {
          return 1.0;
        } else if constexpr (std::is_same_v<G, fn::OneForm>) {
          return guard([&] {
            return Complex(detail::segment_integral(fs, sample, quad_tol, flow_tol,
                                                    [&](const Vec& x, const Vec& v) { return g.A(x).dot(v); }));
          });
        } else if constexpr (std::is_same_v<G, fn::MetricExp>) {
          return guard([&] {
            const double energy = detail::segment_integral(
                fs, sample, quad_tol, flow_tol, [&](const Vec& x, const Vec& v) { return v.dot(g.g(x) * v); });
            return Complex(std::exp(-energy));
          });
        } else if constexpr (std::is_same_v<G, fn::PointFunction>) {
          return guard([&] {
            double prod = 1.0;
            // p_0 .. p_n; the endpoint p_{n+1} = q is not included
            for (std::size_t i = 0; i + 1 < sample.waypoints.size(); ++i) prod *= g.f(sample.waypoints[i]);
            return Complex(prod);
          });
        } else {
          if (!(g.hbar > 0.0)) throw InvalidArgument("lagrangian_action: hbar must be positive");
          return guard([&] {
            const double S = detail::segment_integral(fs, sample, quad_tol, flow_tol,
                                                      [&](const Vec& x, const Vec& v) { return g.L(x, v); });
            return std::exp(Complex(0.0, S / g.hbar));
          });
        }
      },
      f);
}

}  // namespace dpath
