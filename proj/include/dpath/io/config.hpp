#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpath/dpath.hpp"
#include "dpath/io/json_out.hpp"

namespace dpath::io {

/**
 * A validated job. Everything optional stays unset until a config file or a
 * command-line flag provides it.
 */
struct JobConfig {
  std::string command;

  // system
  std::optional<Json> system_json;
  std::optional<ConstantSystem> constant;
  std::optional<FieldSet> general;

  std::optional<Vec> p, q;
  std::optional<double> t;
  std::optional<std::vector<int>> pattern;
  std::optional<Vec> winding;

  std::size_t max_len = 20;
  std::uint64_t pattern_budget = 2'000'000;

  double tol_polytope = kDefaultTol;
  double tol_quadrature = 1e-8;
  double tol_flow = kDefaultFlowTol;
  double tol_solve = 1e-10;

  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  bool format_set = false;

  // series
  std::string series_name;
  std::vector<double> x;
  std::optional<double> y;
  int order = 0;
  std::size_t m = 0;

  std::size_t mc_samples = 0;

  Json functional = Json{{"kind", "unit"}};
  std::string density = "one";

  // reach
  std::optional<GridSpec> grid;
  std::vector<Vec> seeds;
  std::size_t steps = 64;
  bool backward = false;

  // patterns
  std::size_t n = 0;
  int k = 0;
};

namespace detail {

inline void expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw InvalidArgument("config " + path + ": expected an object");
}

inline void allow_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& path) {
  expect_object(j, path);
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw InvalidArgument("config " + path + ": unknown key '" + it.key() + "'");
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InvalidArgument("config " + path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InvalidArgument("config " + path + ": non-finite number");
  return v;
}

inline double positive(const Json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw InvalidArgument("config " + path + ": must be positive");
  return v;
}

inline std::uint64_t count(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw InvalidArgument("config " + path + ": expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline Vec vector(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InvalidArgument("config " + path + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number(j[i], path + "/" + std::to_string(i));
  return v;
}

inline Mat matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("config " + path + ": expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vec row = vector(j[r], path + "/" + std::to_string(r));
    if (static_cast<std::size_t>(row.size()) != cols) throw InvalidArgument("config " + path + ": ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline std::vector<int> int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InvalidArgument("config " + path + ": expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw InvalidArgument("config " + path + ": expected integers");
    out.push_back(j[i].get<int>());
  }
  return out;
}

}  // namespace detail

/**
 * Builds the system described by a "system" block. Constant systems accept a
 * preset ("grid" with a dimension, or "two_speed") or a list of field vectors;
 * "linear" and "polynomial" kinds give general field sets.
 */
inline void parse_system(const Json& s, JobConfig& cfg) {
  using namespace detail;
  const std::string path = "/system";
  expect_object(s, path);
  const std::string kind = s.contains("kind") ? s["kind"].get<std::string>() : "constant";
  cfg.system_json = s;
  cfg.constant.reset();
  cfg.general.reset();
  if (kind == "constant") {
    allow_keys(s, {"kind", "preset", "dimension", "topology", "fields"}, path);
    Topology topo = Topology::affine;
    if (s.contains("topology")) {
      const auto tname = s["topology"].get<std::string>();
      if (tname == "torus")
        topo = Topology::torus;
      else if (tname != "affine")
        throw InvalidArgument("config /system/topology: expected 'affine' or 'torus'");
    }
    if (s.contains("preset")) {
      if (s.contains("fields")) throw InvalidArgument("config /system: give either preset or fields");
      const auto preset = s["preset"].get<std::string>();
      if (preset == "grid") {
        if (!s.contains("dimension")) throw InvalidArgument("config /system: the grid preset needs a dimension");
        const auto d = count(s["dimension"], path + "/dimension");
        if (d < 1 || d > 16) throw InvalidArgument("config /system/dimension: must lie in [1, 16]");
        cfg.constant = ConstantSystem::grid(static_cast<int>(d), topo);
      } else if (preset == "two_speed") {
        ConstantSystem sys = ConstantSystem::two_speed();
        sys.topology = topo;
        cfg.constant = sys;
      } else {
        throw InvalidArgument("config /system/preset: expected 'grid' or 'two_speed'");
      }
    } else {
      if (!s.contains("fields")) throw InvalidArgument("config /system: fields or preset required");
      const Json& f = s["fields"];
      if (!f.is_array() || f.empty()) throw InvalidArgument("config /system/fields: expected a nonempty array");
      const Vec first = vector(f[0], path + "/fields/0");
      Mat A(first.size(), static_cast<Eigen::Index>(f.size()));
      for (std::size_t j = 0; j < f.size(); ++j) {
        Vec v = vector(f[j], path + "/fields/" + std::to_string(j));
        if (v.size() != first.size()) throw InvalidArgument("config /system/fields: fields of different dimension");
        A.col(static_cast<Eigen::Index>(j)) = v;
      }
      if (s.contains("dimension") && count(s["dimension"], path + "/dimension") != static_cast<std::uint64_t>(A.rows()))
        throw InvalidArgument("config /system/dimension: does not match the field vectors");
      cfg.constant = ConstantSystem(A, topo);
    }
    if (cfg.constant->d >= 1 && cfg.constant->topology == Topology::affine)
      cfg.general = FieldSet::constant(*cfg.constant);
    return;
  }
  if (kind == "linear") {
    allow_keys(s, {"kind", "dimension", "fields"}, path);
    const auto d = static_cast<Eigen::Index>(count(s.at("dimension"), path + "/dimension"));
    std::vector<Mat> B;
    std::vector<Vec> c;
    const Json& f = s.at("fields");
    if (!f.is_array() || f.empty()) throw InvalidArgument("config /system/fields: expected a nonempty array");
    for (std::size_t j = 0; j < f.size(); ++j) {
      const std::string fp = path + "/fields/" + std::to_string(j);
      allow_keys(f[j], {"B", "c"}, fp);
      B.push_back(matrix(f[j].at("B"), fp + "/B"));
      c.push_back(f[j].contains("c") ? vector(f[j]["c"], fp + "/c") : Vec(Vec::Zero(d)));
    }
    for (const auto& b : B)
      if (b.rows() != d || b.cols() != d) throw InvalidArgument("config /system/fields: B must be d x d");
    cfg.general = FieldSet::linear(B, c);
    return;
  }
  if (kind == "polynomial") {
    allow_keys(s, {"kind", "dimension", "fields"}, path);
    const int d = static_cast<int>(count(s.at("dimension"), path + "/dimension"));
    const Json& f = s.at("fields");
    if (!f.is_array() || f.empty()) throw InvalidArgument("config /system/fields: expected a nonempty array");
    std::vector<std::vector<std::vector<PolyTerm>>> comps;
    for (std::size_t j = 0; j < f.size(); ++j) {
      const std::string fp = path + "/fields/" + std::to_string(j);
      if (!f[j].is_array() || static_cast<int>(f[j].size()) != d)
        throw InvalidArgument("config " + fp + ": expected one term list per component");
      std::vector<std::vector<PolyTerm>> field;
      for (std::size_t i = 0; i < f[j].size(); ++i) {
        std::vector<PolyTerm> terms;
        for (std::size_t r = 0; r < f[j][i].size(); ++r) {
          const std::string tp = fp + "/" + std::to_string(i) + "/" + std::to_string(r);
          allow_keys(f[j][i][r], {"coef", "powers"}, tp);
          terms.push_back({number(f[j][i][r].at("coef"), tp + "/coef"), int_list(f[j][i][r].at("powers"), tp + "/powers")});
        }
        field.push_back(std::move(terms));
      }
      comps.push_back(std::move(field));
    }
    cfg.general = FieldSet::polynomial(d, comps);
    return;
  }
  throw InvalidArgument("config /system/kind: expected 'constant', 'linear' or 'polynomial'");
}

/** Applies a parsed JSON document to cfg, rejecting anything not in the schema. */
inline void apply_config(const Json& j, JobConfig& cfg) {
  using namespace detail;
  allow_keys(j, {"command", "system", "p", "q", "t", "pattern", "winding", "truncation", "tolerance", "lambda", "seed",
                 "format", "series", "mc", "functional", "density", "reach", "patterns"},
             "");
  if (j.contains("command")) cfg.command = j["command"].get<std::string>();
  if (j.contains("system")) parse_system(j["system"], cfg);
  if (j.contains("p")) cfg.p = vector(j["p"], "/p");
  if (j.contains("q")) cfg.q = vector(j["q"], "/q");
  if (j.contains("t")) {
    cfg.t = number(j["t"], "/t");
    if (*cfg.t < 0.0) throw InvalidArgument("config /t: must be >= 0");
  }
  if (j.contains("pattern")) cfg.pattern = int_list(j["pattern"], "/pattern");
  if (j.contains("winding")) cfg.winding = vector(j["winding"], "/winding");
  if (j.contains("truncation")) {
    const Json& tr = j["truncation"];
    allow_keys(tr, {"max_len", "pattern_budget"}, "/truncation");
    if (tr.contains("max_len")) cfg.max_len = count(tr["max_len"], "/truncation/max_len");
    if (tr.contains("pattern_budget")) cfg.pattern_budget = count(tr["pattern_budget"], "/truncation/pattern_budget");
  }
  if (j.contains("tolerance")) {
    const Json& tl = j["tolerance"];
    allow_keys(tl, {"polytope", "quadrature", "flow", "solve"}, "/tolerance");
    if (tl.contains("polytope")) cfg.tol_polytope = positive(tl["polytope"], "/tolerance/polytope");
    if (tl.contains("quadrature")) cfg.tol_quadrature = positive(tl["quadrature"], "/tolerance/quadrature");
    if (tl.contains("flow")) cfg.tol_flow = positive(tl["flow"], "/tolerance/flow");
    if (tl.contains("solve")) cfg.tol_solve = positive(tl["solve"], "/tolerance/solve");
  }
  if (j.contains("lambda")) cfg.lambda = positive(j["lambda"], "/lambda");
  if (j.contains("seed")) cfg.seed = count(j["seed"], "/seed");
  if (j.contains("format")) {
    cfg.format = j["format"].get<std::string>();
    cfg.format_set = true;
  }
  if (j.contains("series")) {
    const Json& s = j["series"];
    allow_keys(s, {"name", "x", "y", "order", "m"}, "/series");
    if (s.contains("name")) cfg.series_name = s["name"].get<std::string>();
    if (s.contains("x")) {
      if (s["x"].is_array()) {
        Vec v = vector(s["x"], "/series/x");
        cfg.x.assign(v.data(), v.data() + v.size());
      } else {
        cfg.x = {number(s["x"], "/series/x")};
      }
    }
    if (s.contains("y")) cfg.y = number(s["y"], "/series/y");
    if (s.contains("order")) {
      if (!s["order"].is_number_integer()) throw InvalidArgument("config /series/order: expected an integer");
      cfg.order = s["order"].get<int>();
    }
    if (s.contains("m")) cfg.m = count(s["m"], "/series/m");
  }
  if (j.contains("mc")) {
    allow_keys(j["mc"], {"samples"}, "/mc");
    if (j["mc"].contains("samples")) cfg.mc_samples = count(j["mc"]["samples"], "/mc/samples");
  }
  if (j.contains("functional")) {
    expect_object(j["functional"], "/functional");
    cfg.functional = j["functional"];
  }
  if (j.contains("density")) cfg.density = j["density"].get<std::string>();
  if (j.contains("reach")) {
    const Json& r = j["reach"];
    allow_keys(r, {"grid", "seeds", "steps", "backward"}, "/reach");
    if (r.contains("grid")) {
      allow_keys(r["grid"], {"lo", "hi", "cells"}, "/reach/grid");
      GridSpec g;
      g.lo = vector(r["grid"].at("lo"), "/reach/grid/lo");
      g.hi = vector(r["grid"].at("hi"), "/reach/grid/hi");
      g.cells = int_list(r["grid"].at("cells"), "/reach/grid/cells");
      cfg.grid = g;
    }
    if (r.contains("seeds")) {
      cfg.seeds.clear();
      if (!r["seeds"].is_array()) throw InvalidArgument("config /reach/seeds: expected an array of points");
      for (std::size_t i = 0; i < r["seeds"].size(); ++i)
        cfg.seeds.push_back(vector(r["seeds"][i], "/reach/seeds/" + std::to_string(i)));
    }
    if (r.contains("steps")) cfg.steps = count(r["steps"], "/reach/steps");
    if (r.contains("backward")) cfg.backward = r["backward"].get<bool>();
  }
  if (j.contains("patterns")) {
    allow_keys(j["patterns"], {"n", "k"}, "/patterns");
    if (j["patterns"].contains("n")) cfg.n = count(j["patterns"]["n"], "/patterns/n");
    if (j["patterns"].contains("k")) cfg.k = static_cast<int>(count(j["patterns"]["k"], "/patterns/k"));
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: malformed JSON: ") + e.what());
  }
}

/**
 * Functional blocks: unit; one_form with a constant covector; metric_exp with
 * a constant metric (identity by default); point_function f(x) = offset + a.x;
 * lagrangian_action with L(x, v) = g(v, v) - (offset + a.x) and hbar.
 */
inline PathFunctional parse_functional(const Json& j, int d) {
  using namespace detail;
  const std::string path = "/functional";
  const std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "unit";
  auto metric_of = [&](const char* key) -> Mat {
    if (!j.contains(key)) return Mat::Identity(d, d);
    Mat g = matrix(j[key], path + "/" + key);
    if (g.rows() != d || g.cols() != d) throw InvalidArgument("config /functional: metric must be d x d");
    return g;
  };
  auto affine_of = [&](const char* lin, const char* off, double off_default) {
    Vec a = j.contains(lin) ? vector(j[lin], path + "/" + lin) : Vec(Vec::Zero(d));
    if (a.size() != d) throw InvalidArgument(std::string("config /functional/") + lin + ": wrong dimension");
    const double b = j.contains(off) ? number(j[off], path + "/" + off) : off_default;
    return std::pair<Vec, double>(a, b);
  };
  if (kind == "unit") {
    allow_keys(j, {"kind"}, path);
    return fn::Unit{};
  }
  if (kind == "one_form") {
    allow_keys(j, {"kind", "covector"}, path);
    Vec a = vector(j.at("covector"), path + "/covector");
    if (a.size() != d) throw InvalidArgument("config /functional/covector: wrong dimension");
    return fn::OneForm{[a](const Vec&) { return a; }};
  }
  if (kind == "metric_exp") {
    allow_keys(j, {"kind", "metric"}, path);
    Mat g = metric_of("metric");
    return fn::MetricExp{[g](const Vec&) { return g; }};
  }
  if (kind == "point_function") {
    allow_keys(j, {"kind", "linear", "offset"}, path);
    auto [a, b] = affine_of("linear", "offset", 1.0);
    return fn::PointFunction{[a = a, b = b](const Vec& x) { return b + a.dot(x); }};
  }
  if (kind == "lagrangian_action") {
    allow_keys(j, {"kind", "metric", "potential", "potential_offset", "hbar"}, path);
    Mat g = metric_of("metric");
    auto [a, b] = affine_of("potential", "potential_offset", 0.0);
    const double hbar = j.contains("hbar") ? positive(j["hbar"], path + "/hbar") : 1.0;
    return fn::LagrangianAction{[g, a = a, b = b](const Vec& x, const Vec& v) { return v.dot(g * v) - (b + a.dot(x)); },
                                hbar};
  }
  throw InvalidArgument("config /functional/kind: unknown functional '" + kind + "'");
}

inline Density parse_density(const std::string& name) {
  if (name == "one") return [](const Vec&) { return 1.0; };
  if (name == "zero") return [](const Vec&) { return 0.0; };
  throw InvalidArgument("config /density: expected 'one' or 'zero'");
}

/// "1,2,3" -> {1, 2, 3}.
inline std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw InvalidArgument("list '" + s + "': empty entry");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("list '" + s + "': '" + item + "' is not a number");
    }
    if (used != item.size() || !std::isfinite(v)) throw InvalidArgument("list '" + s + "': '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

/** The effective job as JSON, used as the echo in every envelope. Thread counts are left out. */
inline Json echo(const JobConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  if (cfg.system_json) j["system"] = *cfg.system_json;
  auto vec = [](const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  if (cfg.p) j["p"] = vec(*cfg.p);
  if (cfg.q) j["q"] = vec(*cfg.q);
  if (cfg.t) j["t"] = *cfg.t;
  if (cfg.pattern) j["pattern"] = *cfg.pattern;
  if (cfg.winding) j["winding"] = vec(*cfg.winding);
  j["truncation"] = {{"max_len", cfg.max_len}, {"pattern_budget", cfg.pattern_budget}};
  j["tolerance"] = {{"polytope", cfg.tol_polytope},
                    {"quadrature", cfg.tol_quadrature},
                    {"flow", cfg.tol_flow},
                    {"solve", cfg.tol_solve}};
  if (cfg.lambda) j["lambda"] = *cfg.lambda;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["format"] = cfg.format;
  if (cfg.command == "patterns") j["patterns"] = {{"n", cfg.n}, {"k", cfg.k}};
  if (cfg.command == "series") {
    Json s = {{"name", cfg.series_name}, {"x", cfg.x}};
    if (cfg.y) s["y"] = *cfg.y;
    s["order"] = cfg.order;
    s["m"] = cfg.m;
    j["series"] = s;
  }
  if (cfg.mc_samples) j["mc"] = {{"samples", cfg.mc_samples}};
  if (cfg.command == "wave") {
    j["functional"] = cfg.functional;
    j["density"] = cfg.density;
  }
  if (cfg.command == "reach") {
    Json r;
    if (cfg.grid) r["grid"] = {{"lo", vec(cfg.grid->lo)}, {"hi", vec(cfg.grid->hi)}, {"cells", cfg.grid->cells}};
    Json seeds = Json::array();
    for (const auto& s : cfg.seeds) seeds.push_back(vec(s));
    r["seeds"] = seeds;
    r["steps"] = cfg.steps;
    r["backward"] = cfg.backward;
    j["reach"] = r;
  }
  return j;
}

}  // namespace dpath::io
