#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpath/dpath.hpp"
#include "dpath/io/config.hpp"
#include "dpath/io/json_out.hpp"
#include "dpath/verify/suite.hpp"

namespace dpath::io {

enum ExitCode : int { kOk = 0, kValidation = 1, kComputation = 2, kVerifyFailed = 3 };

/** What a command produced, before it is wrapped into the envelope. */
struct Outcome {
  Json result;
  Json per_length = Json::array();
  Json tail;
  Json warnings = Json::array();
  bool verify_failed = false;
  /// Set when the command writes CSV instead of the JSON envelope.
  std::optional<std::string> csv;
};

namespace detail {

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline void warn(Outcome& o, const std::string& code, const std::string& message) {
  o.warnings.push_back(Json{{"code", code}, {"message", message}});
}

inline const ConstantSystem& need_constant(const JobConfig& cfg) {
  if (!cfg.constant) throw InvalidArgument(cfg.command + ": needs a constant system (system.kind = constant)");
  return *cfg.constant;
}

inline const FieldSet& need_fields(const JobConfig& cfg) {
  if (!cfg.general) throw InvalidArgument(cfg.command + ": needs a system on R^d (torus systems have no flows here)");
  return *cfg.general;
}

inline const Vec& need(const std::optional<Vec>& v, const char* what, const JobConfig& cfg) {
  if (!v) throw InvalidArgument(cfg.command + ": " + what + " is required");
  return *v;
}

inline double need_t(const JobConfig& cfg) {
  if (!cfg.t) throw InvalidArgument(cfg.command + ": t is required");
  return *cfg.t;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

inline std::string csv_warnings(const Json& warnings) {
  std::string s;
  for (const auto& w : warnings) s += "# warning " + w["code"].get<std::string>() + ": " + w["message"].get<std::string>() + "\n";
  return s;
}

inline Json series_json(const std::string& name, const SeriesValue& v) {
  return Json{{"name", name}, {"value", v.value}, {"terms_used", v.terms_used}, {"last_term", v.last_term}};
}

inline double first_x(const JobConfig& cfg) {
  if (cfg.x.empty()) throw InvalidArgument("series " + cfg.series_name + ": x is required");
  return cfg.x.front();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// commands

inline Outcome cmd_patterns(const JobConfig& cfg) {
  if (cfg.k < 1) throw InvalidArgument("patterns: k must be >= 1");
  const std::uint64_t count = pattern_count(cfg.n, cfg.k);
  if (count > cfg.pattern_budget) throw ResourceLimit("patterns: " + std::to_string(count) + " patterns exceed the budget");
  Outcome o;
  Json rows = Json::array();
  std::string csv = "index,pattern\n";
  std::size_t i = 0;
  for (const auto& p : enumerate_patterns(cfg.n, cfg.k)) {
    rows.push_back(to_string(p));
    csv += detail::csv_row({std::to_string(i++), "\"" + to_string(p) + "\""});
  }
  o.result = Json{{"n", cfg.n}, {"k", cfg.k}, {"count", count}, {"patterns", rows}};
  if (cfg.format == "csv") o.csv = csv;
  return o;
}

inline Outcome cmd_volume(const JobConfig& cfg) {
  const auto& sys = detail::need_constant(cfg);
  const Vec& p = detail::need(cfg.p, "p", cfg);
  const Vec& q = detail::need(cfg.q, "q", cfg);
  const double t = detail::need_t(cfg);
  if (!cfg.pattern) throw InvalidArgument("volume: pattern is required");
  const Pattern c(*cfg.pattern, sys.k);
  const auto v = piece_volume(sys, c, p, q, t, cfg.winding, cfg.tol_polytope);
  Outcome o;
  o.result = Json{{"pattern", to_string(c)},
                  {"value", v.value},
                  {"status", to_string(v.status)},
                  {"dimension", v.dimension},
                  {"base_dimension", v.base_dimension},
                  {"base_flagged", v.base_flagged},
                  {"convention", v.convention}};
  if (v.base_flagged)
    detail::warn(o, "positive-dimensional-base", "the base polytope has positive dimension; the value uses the fibered measure");
  if (cfg.mc_samples > 0) {
    if (!cfg.seed) throw InvalidArgument("volume: a seed is required for the Monte Carlo estimate");
    const Vec qq = cfg.winding ? Vec(q + *cfg.winding) : q;
    const auto mc = mc_piece_volume_oracle(sys, c, p, qq, t, cfg.mc_samples, *cfg.seed, cfg.tol_polytope);
    o.result["monte_carlo"] = Json{{"estimate", mc.estimate},
                                   {"standard_error", mc.standard_error},
                                   {"samples", mc.samples},
                                   {"accepted", mc.accepted},
                                   {"exact", mc.exact}};
  }
  if (cfg.format == "csv") {
    o.csv = detail::csv_warnings(o.warnings) + "pattern,value,status,base_dimension\n" +
            detail::csv_row({"\"" + to_string(c) + "\"", format_double(v.value), to_string(v.status),
                             std::to_string(v.base_dimension)});
  }
  return o;
}

inline Outcome cmd_total(const JobConfig& cfg, unsigned threads) {
  const auto& sys = detail::need_constant(cfg);
  const Vec& p = detail::need(cfg.p, "p", cfg);
  const Vec& q = detail::need(cfg.q, "q", cfg);
  const double t = detail::need_t(cfg);
  VolumeOptions vo;
  vo.lambda = cfg.lambda;
  vo.pattern_budget = cfg.pattern_budget;
  vo.threads = threads;
  vo.tol = cfg.tol_polytope;
  const auto rep = total_volume(sys, p, q, t, cfg.max_len, vo);
  Outcome o;
  Json windings = Json::array();
  for (const auto& w : rep.windings) windings.push_back(detail::vec_json(w));
  o.result = Json{{"total", rep.total},
                  {"truncation_length", rep.truncation_length},
                  {"patterns_evaluated", rep.patterns_evaluated},
                  {"flagged_pieces", rep.flagged_pieces},
                  {"degenerate_pieces", rep.degenerate_pieces},
                  {"windings", windings}};
  if (rep.lambda) o.result["lambda"] = *rep.lambda;
  std::string csv = "length,volume\n";
  for (const auto& s : rep.per_length) {
    o.per_length.push_back(Json{{"length", s.length}, {"volume", s.volume}});
    csv += detail::csv_row({std::to_string(s.length), format_double(s.volume)});
  }
  o.tail = Json{{"estimate", rep.tail_estimate}, {"bound", rep.tail_bound}};
  if (rep.flagged_pieces)
    detail::warn(o, "positive-dimensional-base",
                 std::to_string(rep.flagged_pieces) + " pieces have a base polytope of positive dimension");
  if (rep.degenerate_pieces)
    detail::warn(o, "boundary-convention",
                 std::to_string(rep.degenerate_pieces) +
                     " pieces contain zero-duration segments; they are counted with their fibered measure");
  const auto di = direct_influences(sys, p, q, t, cfg.tol_polytope);
  if (!di.fields.empty())
    detail::warn(o, "direct-influence", "q is reached by a one-direction path; the total includes degenerate patterns");
  if (sys.topology == Topology::torus && rep.total == 0.0)
    detail::warn(o, "empty-torus", "no lift of q is reachable in time t");
  if (rep.tail_estimate != 0.0 && std::abs(rep.tail_estimate) > 1e-8 * std::max(1.0, std::abs(rep.total)))
    detail::warn(o, "truncation", "the outermost shell is not negligible; raise max_len");
  if (cfg.format == "csv") o.csv = detail::csv_warnings(o.warnings) + csv;
  return o;
}

inline Outcome cmd_series(const JobConfig& cfg) {
  const std::string& name = cfg.series_name;
  Outcome o;
  auto need_t = [&] {
    if (!cfg.t) throw InvalidArgument("series " + name + ": t is required");
    return *cfg.t;
  };
  auto need_y = [&] {
    if (!cfg.y) throw InvalidArgument("series " + name + ": y is required");
    return *cfg.y;
  };
  if (name == "dim1") {
    const double x = detail::first_x(cfg), t = need_t();
    o.result = detail::series_json(name, dim1_two_speed_volume(x, t));
    o.result["pattern_sum"] = dim1_pattern_series(x, t).value;
    if (std::abs(x) == t)
      detail::warn(o, "boundary-convention", "|x| = t: value is the closed-form 1, pattern_sum counts degenerate patterns");
  } else if (name == "dim1-pattern") {
    const double x = detail::first_x(cfg), t = need_t();
    o.result = detail::series_json(name, dim1_pattern_series(x, t));
    if (std::abs(x) == t) detail::warn(o, "boundary-convention", "|x| = t: degenerate zero-duration patterns are included");
  } else if (name == "dim1-wave") {
    const double t = need_t();
    o.result = Json{{"name", name}, {"value", dim1_wave(t)}, {"pattern_wave", dim1_pattern_wave(t)}};
  } else if (name == "dim2") {
    const double x = detail::first_x(cfg), y = need_y();
    o.result = detail::series_json(name, grid2_volume(x, y));
    if (x == 0.0 || y == 0.0) detail::warn(o, "boundary-convention", "point on an axis: the one-direction value 1 is returned");
  } else if (name == "dim2-wave") {
    o.result = Json{{"name", name}, {"value", grid2_wave(need_t())}};
  } else if (name == "dim2-max") {
    const auto mi = grid2_max_influence(need_t());
    o.result = detail::series_json(name, mi.value);
    o.result["x"] = mi.x;
    o.result["y"] = mi.y;
    o.result["search_argmax"] = mi.search_argmax;
  } else if (name == "gridk") {
    o.result = detail::series_json(name, gridk_volume(cfg.x, cfg.max_len));
    o.result["max_len"] = cfg.max_len;
  } else if (name == "torus") {
    const auto tv = torus_volume(cfg.x, cfg.m, cfg.t, cfg.max_len);
    o.result = detail::series_json(name, tv.value);
    o.result["m"] = cfg.m;
    o.result["time_compatible"] = tv.time_compatible;
    o.result["windings"] = tv.windings;
    Json ev = Json::array();
    for (const auto& e : tv.direct_events) ev.push_back(Json{{"field", e.field}, {"time", e.time}});
    o.result["direct_events"] = ev;
    if (!tv.time_compatible) detail::warn(o, "empty-torus", "t differs from sum(x) + m, so no directed path arrives");
    if (!tv.direct_events.empty())
      detail::warn(o, "direct-influence", "one-direction arrivals are listed separately and not added to the value");
  } else if (name == "bessel") {
    const double x = detail::first_x(cfg), y = need_y();
    o.result = detail::series_json(name, bessel_i(cfg.order, x, y));
    o.result["order"] = cfg.order;
  } else if (name == "psh") {
    const auto v = psh_series(cfg.x, cfg.max_len);
    o.result = Json{{"name", name}, {"value", v.value}, {"last_shell", v.last_shell}, {"max_total_degree", cfg.max_len}};
  } else {
    throw InvalidArgument("series: unknown name '" + name +
                          "' (dim1, dim1-pattern, dim1-wave, dim2, dim2-wave, dim2-max, gridk, torus, bessel, psh)");
  }
  if (cfg.format == "csv")
    o.csv = detail::csv_warnings(o.warnings) + "name,value\n" + detail::csv_row({name, format_double(o.result["value"].get<double>())});
  return o;
}

inline Outcome cmd_wave(const JobConfig& cfg, unsigned threads) {
  const auto& sys = detail::need_constant(cfg);
  const Vec& q = detail::need(cfg.q, "q", cfg);
  const double t = detail::need_t(cfg);
  check_point(sys, q, "wave q");
  const auto front = builtin_front(sys, q, t);
  if (!front) throw InvalidArgument("wave: no built-in front for this system (line systems and the plane grid have one)");
  const PathFunctional fnl = parse_functional(cfg.functional, sys.d);
  KernelOptions ko;
  ko.max_len = cfg.max_len;
  ko.tol = cfg.tol_polytope;
  ko.flow_tol = cfg.tol_flow;
  ko.pattern_budget = cfg.pattern_budget;
  ko.threads = threads;
  ko.solve.tol = cfg.tol_solve;
  const auto w = wave(sys, q, t, fnl, parse_density(cfg.density), front, cfg.tol_quadrature, ko);
  Outcome o;
  o.result = Json{{"value", complex_json(w.value)},
                  {"error_estimate", w.error_estimate},
                  {"kernel_evaluations", w.kernel_evaluations},
                  {"converged", w.converged},
                  {"functional", functional_name(fnl)},
                  {"front", Json{{"label", front->label}, {"a", front->a}, {"b", front->b}}}};
  if (w.incomplete) detail::warn(o, "incomplete-kernel", "some kernel evaluations skipped pieces");
  if (!w.converged) detail::warn(o, "quadrature", "the front quadrature did not reach its tolerance");
  if (cfg.format == "csv")
    o.csv = detail::csv_warnings(o.warnings) + "re,im,error_estimate\n" +
            detail::csv_row({format_double(w.value.real()), format_double(w.value.imag()), format_double(w.error_estimate)});
  return o;
}

inline Outcome cmd_reach(const JobConfig& cfg) {
  const FieldSet& fs = detail::need_fields(cfg);
  const double t = detail::need_t(cfg);
  if (!cfg.grid) throw InvalidArgument("reach: a grid (lo, hi, cells) is required");
  std::vector<Vec> seeds = cfg.seeds;
  if (seeds.empty()) seeds.push_back(cfg.p ? *cfg.p : Vec(Vec::Zero(fs.d())));
  ReachOptions ro;
  ro.steps = cfg.steps;
  ro.backward = cfg.backward;
  ro.flow_tol = cfg.tol_flow;
  const auto fr = reach_sample(fs, seeds, t, *cfg.grid, cfg.max_len, ro);
  Outcome o;
  Json cells = Json::array();
  std::string header = "t";
  for (int i = 1; i <= fs.d(); ++i) header += ",x" + std::to_string(i);
  std::string csv = header + ",tag\n";
  for (const auto& c : fr.cells) {
    if (c.tag == CellTag::not_influenced) continue;
    cells.push_back(Json{{"center", detail::vec_json(c.center)}, {"tag", to_string(c.tag)}});
    std::vector<std::string> row{format_double(t)};
    for (Eigen::Index i = 0; i < c.center.size(); ++i) row.push_back(format_double(c.center[i]));
    row.push_back(to_string(c.tag));
    csv += detail::csv_row(row);
  }
  o.result = Json{{"influenced", fr.influenced}, {"front", fr.front}, {"states", fr.states},
                  {"backward", fr.backward}, {"cells", cells}};
  for (const auto& s : seeds)
    if (cfg.grid->locate(s) < 0) detail::warn(o, "seed-outside-grid", "a seed lies outside the grid and was dropped");
  if (cfg.format == "csv") o.csv = detail::csv_warnings(o.warnings) + csv;
  return o;
}

inline Outcome cmd_verify(const JobConfig& cfg, unsigned threads) {
  if (!cfg.seed) throw InvalidArgument("verify: a seed is required");
  verify::Options vo;
  vo.threads = threads;
  vo.seed = *cfg.seed;
  if (cfg.mc_samples) vo.mc_samples = cfg.mc_samples;
  const auto checks = verify::run_suite(vo);
  Outcome o;
  Json rows = Json::array();
  std::size_t npass = 0, nfail = 0, ndisc = 0, ninfo = 0;
  std::string csv = "name,status,observed,expected,error,tolerance\n";
  for (const auto& c : checks) {
    rows.push_back(Json{{"name", c.name},
                        {"status", c.status},
                        {"observed", c.observed},
                        {"expected", c.expected},
                        {"error", c.error},
                        {"tolerance", c.tolerance},
                        {"detail", c.detail}});
    csv += detail::csv_row({c.name, c.status, format_double(c.observed), format_double(c.expected), format_double(c.error),
                            format_double(c.tolerance)});
    if (c.status == "pass") ++npass;
    if (c.status == "fail") ++nfail;
    if (c.status == "discrepancy") {
      ++ndisc;
      detail::warn(o, "discrepancy", c.name + ": " + c.detail);
    }
    if (c.status == "info") ++ninfo;
  }
  o.verify_failed = nfail > 0;
  o.result = Json{{"passed", !o.verify_failed},
                  {"counts", Json{{"pass", npass}, {"fail", nfail}, {"discrepancy", ndisc}, {"info", ninfo}}},
                  {"checks", rows}};
  if (cfg.format == "csv") o.csv = detail::csv_warnings(o.warnings) + csv;
  return o;
}

// ---------------------------------------------------------------------------
// entry point

inline Json error_envelope(const std::string& command, const std::string& kind, const std::string& message) {
  return Json{{"command", command},
              {"version", kVersion},
              {"status", "error"},
              {"error", Json{{"kind", kind}, {"message", message}}}};
}

/**
 * Parses argv, runs one job and writes its envelope (or CSV) to out.
 * Returns the process exit code.
 */
inline int run(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Volumes and influences of directed paths on manifolds with vector fields", "dpath"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path, format, preset, topology, pattern, p_s, q_s, winding_s, x_s, series_name, lo_s, hi_s, cells_s;
  std::vector<std::string> from_s;
  std::uint64_t seed = 0;
  std::size_t max_len = 0, n = 0, m = 0, mc_samples = 0, steps = 0;
  unsigned threads = 0;
  int k = 0, dim = 0, order = 0;
  double t = 0, y = 0, lambda = 0;
  bool timing = false, backward = false;

  auto* o_config = app.add_option("--config", config_path, "JSON job file");
  auto* o_format = app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  auto* o_seed = app.add_option("--seed", seed, "seed for stochastic jobs");
  auto* o_maxlen = app.add_option("--max-len", max_len, "longest pattern (or series truncation)");
  app.add_option("--threads", threads, "worker threads (default: DPATH_THREADS or the hardware)");
  app.add_flag("--timing", timing, "add wall time to the envelope");

  auto add_system = [&](CLI::App* sub) {
    sub->add_option("--preset", preset, "grid or two_speed")->check(CLI::IsMember({"grid", "two_speed"}));
    sub->add_option("--dim", dim, "dimension of the grid preset");
    sub->add_option("--topology", topology, "affine or torus")->check(CLI::IsMember({"affine", "torus"}));
  };
  CLI::Option *o_n = nullptr, *o_k = nullptr, *o_pattern = nullptr, *o_p = nullptr, *o_q = nullptr, *o_t = nullptr,
              *o_winding = nullptr, *o_x = nullptr, *o_y = nullptr, *o_order = nullptr, *o_m = nullptr,
              *o_lambda = nullptr, *o_mc = nullptr, *o_name = nullptr, *o_lo = nullptr, *o_hi = nullptr,
              *o_cells = nullptr, *o_from = nullptr, *o_steps = nullptr, *o_backward = nullptr, *o_mc_v = nullptr;

  auto* s_patterns = app.add_subcommand("patterns", "list the patterns of length n + 1 on k fields")->fallthrough();
  o_n = s_patterns->add_option("--n", n, "number of switches");
  o_k = s_patterns->add_option("--k", k, "number of fields");

  auto* s_volume = app.add_subcommand("volume", "volume of one pattern piece")->fallthrough();
  add_system(s_volume);
  o_pattern = s_volume->add_option("--pattern", pattern, "comma-separated field indices, e.g. 1,2,1");
  o_p = s_volume->add_option("--p", p_s, "start point, comma-separated");
  o_q = s_volume->add_option("--q", q_s, "end point, comma-separated");
  o_t = s_volume->add_option("--t", t, "total time");
  o_winding = s_volume->add_option("--winding", winding_s, "integer lift for torus systems");
  o_mc = s_volume->add_option("--mc-samples", mc_samples, "also run the Monte Carlo oracle");

  auto* s_total = app.add_subcommand("total", "sum of piece volumes over all patterns up to --max-len")->fallthrough();
  add_system(s_total);
  s_total->add_option("--p", p_s, "start point");
  s_total->add_option("--q", q_s, "end point");
  s_total->add_option("--t", t, "total time");
  o_lambda = s_total->add_option("--lambda", lambda, "weight length n + 1 by lambda^n / n!");

  auto* s_series = app.add_subcommand("series", "closed-form series")->fallthrough();
  o_name = s_series->add_option("name", series_name, "dim1, dim1-pattern, dim1-wave, dim2, dim2-wave, dim2-max, gridk, torus, bessel, psh");
  o_x = s_series->add_option("--x", x_s, "point, comma-separated for gridk, torus and psh");
  o_y = s_series->add_option("--y", y, "second coordinate");
  s_series->add_option("--t", t, "time");
  o_order = s_series->add_option("--order", order, "Bessel order");
  o_m = s_series->add_option("--m", m, "torus winding number");

  auto* s_wave = app.add_subcommand("wave", "wave of influences with density 1 (or the config density)")->fallthrough();
  add_system(s_wave);
  s_wave->add_option("--q", q_s, "target point");
  s_wave->add_option("--t", t, "time");

  auto* s_reach = app.add_subcommand("reach", "reachable cells on a grid, CSV by default")->fallthrough();
  add_system(s_reach);
  s_reach->add_option("--t", t, "time");
  o_lo = s_reach->add_option("--lo", lo_s, "grid lower corner");
  o_hi = s_reach->add_option("--hi", hi_s, "grid upper corner");
  o_cells = s_reach->add_option("--cells", cells_s, "cells per axis");
  o_from = s_reach->add_option("--from", from_s, "seed point (repeatable)");
  o_steps = s_reach->add_option("--steps", steps, "time steps");
  o_backward = s_reach->add_flag("--backward", backward, "points that reach the seeds instead");

  auto* s_verify = app.add_subcommand("verify", "run every oracle comparison")->fallthrough();
  o_mc_v = s_verify->add_option("--mc-samples", mc_samples, "samples per Monte Carlo piece");

  std::string command = "";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    out << dump(error_envelope(command, "invalid-argument", e.what())) << "\n";
    return kValidation;
  }
  command = app.get_subcommands().front()->get_name();
  const auto started = std::chrono::steady_clock::now();

  JobConfig cfg;
  Outcome res;
  try {
    if (o_config->count()) apply_config(read_json_file(config_path), cfg);
    if (!cfg.command.empty() && cfg.command != command)
      throw InvalidArgument("config command '" + cfg.command + "' differs from the subcommand '" + command + "'");
    cfg.command = command;
    if (command == "reach") cfg.format = cfg.format_set ? cfg.format : "csv";
    if (o_format->count()) cfg.format = format;
    if (cfg.format != "json" && cfg.format != "csv") throw InvalidArgument("format must be json or csv");
    if (o_seed->count()) cfg.seed = seed;
    if (o_maxlen->count()) cfg.max_len = max_len;
    if (!preset.empty()) {
      Json s{{"kind", "constant"}, {"preset", preset}};
      if (dim) s["dimension"] = dim;
      if (!topology.empty()) s["topology"] = topology;
      parse_system(s, cfg);
    } else if (!topology.empty()) {
      throw InvalidArgument("--topology needs --preset");
    }
    auto vec_flag = [](const std::string& s) { return detail::to_vec(parse_number_list(s)); };
    if (!p_s.empty()) cfg.p = vec_flag(p_s);
    if (!q_s.empty()) cfg.q = vec_flag(q_s);
    if (app.get_subcommands().front()->get_option_no_throw("--t") &&
        app.get_subcommands().front()->get_option("--t")->count()) {
      if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("--t must be finite and >= 0");
      cfg.t = t;
    }
    if (o_pattern->count()) {
      cfg.pattern.emplace();
      for (double v : parse_number_list(pattern)) {
        if (v != std::round(v)) throw InvalidArgument("--pattern: entries must be integers");
        cfg.pattern->push_back(static_cast<int>(v));
      }
    }
    if (o_winding->count()) cfg.winding = vec_flag(winding_s);
    if (o_mc->count() || o_mc_v->count()) cfg.mc_samples = mc_samples;
    if (o_lambda->count()) {
      if (!(lambda > 0.0)) throw InvalidArgument("--lambda must be positive");
      cfg.lambda = lambda;
    }
    if (o_n->count()) cfg.n = n;
    if (o_k->count()) cfg.k = k;
    if (o_name->count()) cfg.series_name = series_name;
    if (o_x->count()) cfg.x = parse_number_list(x_s);
    if (o_y->count()) cfg.y = y;
    if (o_order->count()) cfg.order = order;
    if (o_m->count()) cfg.m = m;
    if (o_lo->count() || o_hi->count() || o_cells->count()) {
      if (!(o_lo->count() && o_hi->count() && o_cells->count())) throw InvalidArgument("reach: give --lo, --hi and --cells together");
      GridSpec g;
      g.lo = vec_flag(lo_s);
      g.hi = vec_flag(hi_s);
      for (double v : parse_number_list(cells_s)) {
        if (v != std::round(v) || v < 1) throw InvalidArgument("--cells: entries must be positive integers");
        g.cells.push_back(static_cast<int>(v));
      }
      cfg.grid = g;
    }
    if (o_from->count()) {
      cfg.seeds.clear();
      for (const auto& s : from_s) cfg.seeds.push_back(vec_flag(s));
    }
    if (o_steps->count()) cfg.steps = steps;
    if (o_backward->count()) cfg.backward = backward;
    if (command == "series" && cfg.series_name.empty()) throw InvalidArgument("series: a name is required");

    if (command == "patterns") res = cmd_patterns(cfg);
    if (command == "volume") res = cmd_volume(cfg);
    if (command == "total") res = cmd_total(cfg, threads);
    if (command == "series") res = cmd_series(cfg);
    if (command == "wave") res = cmd_wave(cfg, threads);
    if (command == "reach") res = cmd_reach(cfg);
    if (command == "verify") res = cmd_verify(cfg, threads);
  } catch (const InvalidArgument& e) {
    out << dump(error_envelope(command, to_string(e.kind()), e.what())) << "\n";
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    out << dump(error_envelope(command, "invalid-argument", std::string("config: ") + e.what())) << "\n";
    return kValidation;
  } catch (const Error& e) {
    out << dump(error_envelope(command, to_string(e.kind()), e.what())) << "\n";
    return kComputation;
  } catch (const std::exception& e) {
    out << dump(error_envelope(command, "internal", e.what())) << "\n";
    return kComputation;
  }

  if (res.csv) {
    out << *res.csv;
  } else {
    Json env;
    env["command"] = command;
    env["version"] = kVersion;
    env["status"] = "ok";
    env["job"] = echo(cfg);
    env["result"] = res.result;
    env["per_length"] = res.per_length;
    env["tail"] = res.tail;
    env["warnings"] = res.warnings;
    if (timing)
      env["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out << dump(env) << "\n";
  }
  return res.verify_failed ? kVerifyFailed : kOk;
}

}  // namespace dpath::io
