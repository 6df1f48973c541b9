#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "dpath/errors.hpp"
#include "dpath/flows.hpp"

namespace dpath {

/** An axis-aligned box [lo, hi] cut into cells[i] cells along axis i. */
struct GridSpec {
  Vec lo;
  Vec hi;
  std::vector<int> cells;

  std::size_t dim() const { return cells.size(); }
  std::size_t size() const {
    std::size_t n = 1;
    for (int c : cells) n *= static_cast<std::size_t>(c);
    return n;
  }
  void validate(int d) const {
    if (lo.size() != d || hi.size() != d || static_cast<int>(cells.size()) != d)
      throw InvalidArgument("grid: bounds and cell counts must match the dimension");
    for (int i = 0; i < d; ++i) {
      if (!(hi[i] > lo[i])) throw InvalidArgument("grid: empty extent on axis " + std::to_string(i));
      if (cells[static_cast<std::size_t>(i)] < 1) throw InvalidArgument("grid: cell count must be >= 1");
    }
  }
  /// Linear index of the cell containing x, or -1 outside the box.
  long long locate(const Vec& x) const {
    long long idx = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double h = (hi[ii] - lo[ii]) / cells[i];
      const double f = (x[ii] - lo[ii]) / h;
      if (!(f >= 0.0) || f > cells[i]) return -1;
      long long c = static_cast<long long>(std::floor(f));
      if (c == cells[i]) c = cells[i] - 1;
      idx = idx * cells[i] + c;
    }
    return idx;
  }
  std::vector<int> unravel(long long idx) const {
    std::vector<int> out(cells.size());
    for (std::size_t i = cells.size(); i-- > 0;) {
      out[i] = static_cast<int>(idx % cells[i]);
      idx /= cells[i];
    }
    return out;
  }
  Vec center(const std::vector<int>& index) const {
    Vec c(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double h = (hi[ii] - lo[ii]) / cells[i];
      c[ii] = lo[ii] + (index[i] + 0.5) * h;
    }
    return c;
  }
};

enum class CellTag { front, influenced, not_influenced };

inline const char* to_string(CellTag t) {
  switch (t) {
    case CellTag::front: return "front";
    case CellTag::influenced: return "influenced";
    case CellTag::not_influenced: return "not-influenced";
  }
  return "unknown";
}

struct FrontCell {
  std::vector<int> index;
  Vec center;
  CellTag tag = CellTag::not_influenced;
};

struct FrontSample {
  double t = 0.0;
  std::vector<Vec> seeds;
  GridSpec grid;
  /// Every grid cell in row-major order. Front cells are also influenced.
  std::vector<FrontCell> cells;
  std::size_t influenced = 0;
  std::size_t front = 0;
  std::size_t states = 0;
  bool backward = false;
};

struct ReachOptions {
  /// Time steps of size t / steps.
  std::size_t steps = 64;
  std::size_t state_budget = 5'000'000;
  /// Follow -v_j instead: the cells that can reach A.
  bool backward = false;
  double flow_tol = kDefaultFlowTol;
};

/** The field set -v_1, ..., -v_k. */
inline FieldSet negate_fields(const FieldSet& fs) {
  std::vector<VectorField> out;
  for (const auto& f : fs.fields()) {
    VectorField v;
    auto base = f;
    v.eval = [base](const Vec& x) { return Vec(-base.eval(x)); };
    if (base.jacobian) v.jacobian = [base](const Vec& x) { return Mat(-base.jacobian(x)); };
    v.label = "-" + base.label;
    out.push_back(std::move(v));
  }
  return FieldSet(fs.d(), std::move(out), fs.global_flows());
}

/**
 * Breadth-first exploration of directed paths of length <= max_len and total
 * time <= t on a time grid. States are deduplicated per (cell, step, field), so
 * the first visit is the one with the fewest switches. Marked cells approximate
 * Γ_{A,<=}(t); influenced cells with a non-influenced neighbour form the front.
 */
inline FrontSample reach_sample(const FieldSet& fs_in, const std::vector<Vec>& seeds, double t, const GridSpec& grid,
                                std::size_t max_len, const ReachOptions& opt = {}) {
  if (!(t >= 0.0)) throw InvalidArgument("reach_sample: t must be >= 0");
  if (max_len < 1) throw InvalidArgument("reach_sample: max_len must be >= 1");
  if (opt.steps < 1) throw InvalidArgument("reach_sample: steps must be >= 1");
  grid.validate(fs_in.d());
  for (const auto& s : seeds)
    if (s.size() != fs_in.d()) throw InvalidArgument("reach_sample: seed has the wrong dimension");
  const FieldSet fs = opt.backward ? negate_fields(fs_in) : fs_in;
  const std::size_t ncells = grid.size();
  if (ncells > opt.state_budget) throw ResourceLimit("reach_sample: grid larger than the state budget");

  FrontSample out;
  out.t = t;
  out.seeds = seeds;
  out.grid = grid;
  out.backward = opt.backward;
  std::vector<char> marked(ncells, 0);

  struct State {
    Vec x;
    std::size_t tau;
    int field;
    std::size_t segments;
  };
  const auto k = static_cast<std::uint64_t>(fs.k());
  const auto steps = static_cast<std::uint64_t>(opt.steps);
  auto key = [&](long long cell, std::size_t tau, int field) {
    return (static_cast<std::uint64_t>(cell) * (steps + 1) + tau) * (k + 1) + static_cast<std::uint64_t>(field);
  };
  std::unordered_set<std::uint64_t> seen;
  std::deque<State> queue;
  for (const auto& s : seeds) {
    const long long cell = grid.locate(s);
    if (cell < 0) continue;
    marked[static_cast<std::size_t>(cell)] = 1;
    if (seen.insert(key(cell, 0, 0)).second) queue.push_back({s, 0, 0, 0});
  }
  const double dt = t / static_cast<double>(opt.steps);
  if (t > 0.0) {
    while (!queue.empty()) {
      State st = std::move(queue.front());
      queue.pop_front();
      if (st.tau >= opt.steps) continue;
      for (int g = 1; g <= fs.k(); ++g) {
        const std::size_t seg = g == st.field ? st.segments : st.segments + 1;
        if (seg > max_len) continue;
        Vec x = detail::flow_signed(fs, g, st.x, dt, opt.flow_tol, nullptr);
        const long long cell = grid.locate(x);
        if (cell < 0) continue;
        if (!seen.insert(key(cell, st.tau + 1, g)).second) continue;
        if (seen.size() > opt.state_budget) throw ResourceLimit("reach_sample: state budget exceeded");
        marked[static_cast<std::size_t>(cell)] = 1;
        queue.push_back({std::move(x), st.tau + 1, g, seg});
      }
    }
  }
  out.states = seen.size();

  out.cells.reserve(ncells);
  for (std::size_t c = 0; c < ncells; ++c) {
    FrontCell fc;
    fc.index = grid.unravel(static_cast<long long>(c));
    fc.center = grid.center(fc.index);
    if (marked[c]) {
      ++out.influenced;
      fc.tag = CellTag::influenced;
      bool edge = false;
      for (std::size_t i = 0; i < grid.dim() && !edge; ++i)
        for (int delta : {-1, 1}) {
          auto nb = fc.index;
          nb[i] += delta;
          if (nb[i] < 0 || nb[i] >= grid.cells[i]) continue;
          long long lin = 0;
          for (std::size_t a = 0; a < grid.dim(); ++a) lin = lin * grid.cells[a] + nb[a];
          if (!marked[static_cast<std::size_t>(lin)]) {
            edge = true;
            break;
          }
        }
      if (edge) {
        fc.tag = CellTag::front;
        ++out.front;
      }
    }
    out.cells.push_back(std::move(fc));
  }
  return out;
}

}  // namespace dpath
