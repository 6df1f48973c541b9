#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dpath/constant_fields.hpp"
#include "dpath/flows.hpp"
#include "dpath/functionals.hpp"
#include "dpath/kernel.hpp"
#include "dpath/parallel.hpp"
#include "dpath/reach.hpp"
#include "dpath/verify/suite.hpp"

using namespace dpath;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

FieldSet rotation_and_shift() {
  Mat R(2, 2);
  R << 0, -1, 1, 0;
  return FieldSet::linear({R, Mat::Zero(2, 2)}, {Vec::Zero(2), v2(1.0, 0.5)});
}

DirectedPathSample grid_path() {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  return iterated_flow(fs, Pattern({1, 2}, 2), Vec::Zero(2), {0.5, 0.25});
}

bool cell_influenced(const FrontSample& fr, const Vec& x) {
  const long long i = fr.grid.locate(x);
  return i >= 0 && fr.cells[static_cast<std::size_t>(i)].tag != CellTag::not_influenced;
}

}  // namespace

TEST(Flow, LinearRotation) {
  const auto fs = rotation_and_shift();
  const Vec a = flow(fs, 1, v2(1, 0), std::numbers::pi / 2);
  EXPECT_NEAR(a[0], 0.0, 1e-9);
  EXPECT_NEAR(a[1], 1.0, 1e-9);
  const Vec b = flow(fs, 1, v2(1, 0), 2 * std::numbers::pi);
  EXPECT_NEAR((b - v2(1, 0)).norm(), 0.0, 1e-9);
  const Vec c = flow(fs, 2, v2(1, 1), 2.0);
  EXPECT_NEAR((c - v2(3.0, 2.0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(flow(fs, 1, v2(0.3, 0.2), 0.0), v2(0.3, 0.2));
  EXPECT_THROW(flow(fs, 1, v2(1, 0), -1.0), InvalidArgument);
}

TEST(Flow, AffineMatchesClosedForm) {
  const auto c = verify::check_affine_flow(40, 12);
  EXPECT_FALSE(c.failed()) << c.detail;
}

TEST(Flow, Semigroup) {
  const auto c = verify::check_semigroup(20, 13);
  EXPECT_FALSE(c.failed()) << c.detail;
}

TEST(IteratedFlow, RecordsWaypoints) {
  const auto s = grid_path();
  ASSERT_EQ(s.waypoints.size(), 3u);
  EXPECT_EQ(s.waypoints[1], v2(0.5, 0.0));
  EXPECT_EQ(s.end(), v2(0.5, 0.25));
  EXPECT_DOUBLE_EQ(s.timed.total, 0.75);
}

TEST(RankCheck, AnalyticAndDifferencedJacobiansAgree) {
  std::mt19937_64 rng(21);
  const auto fs = verify::random_polynomial_fields(rng, 2, 3, 0.3);
  std::vector<VectorField> stripped = fs.fields();
  for (auto& f : stripped) f.jacobian = nullptr;
  const FieldSet fd(2, stripped);
  const Pattern c({1, 2, 3}, 3);
  const std::vector<double> s{0.3, 0.4, 0.2};
  const auto a = rank_check(fs, c, v2(0.1, -0.2), s);
  const auto b = rank_check(fd, c, v2(0.1, -0.2), s);
  EXPECT_EQ(a.rank, b.rank);
  EXPECT_TRUE(a.satisfied);
  EXPECT_NEAR((a.vectors - b.vectors).norm(), 0.0, 1e-6);
}

TEST(RankCheck, DeficientForRepeatedConstantField) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  const auto r = rank_check(fs, Pattern({1, 2, 1}, 2), Vec::Zero(2), {0.2, 0.3, 0.1});
  EXPECT_EQ(r.rank, 1);
  EXPECT_FALSE(r.satisfied);
  EXPECT_THROW(rank_check(fs, Pattern({1, 2}, 2), Vec::Zero(2), {0.2}), InvalidArgument);
}

TEST(SolvePiece, PlantAndRecover) {
  const auto r = verify::plant_and_recover(12, 77);
  EXPECT_EQ(r.recovered, r.instances);
  EXPECT_LE(r.worst_residual, 1e-6);
}

TEST(SolvePiece, GridCornerPath) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  const auto sol = solve_piece(fs, Pattern({1, 2}, 2), Vec::Zero(2), v2(0.7, 0.4), 1.1);
  ASSERT_EQ(sol.interior.size(), 1u);
  EXPECT_NEAR(sol.interior[0].times[0], 0.7, 1e-9);
  EXPECT_NEAR(sol.interior[0].times[1], 0.4, 1e-9);
  EXPECT_TRUE(solve_piece(fs, Pattern({1, 2}, 2), Vec::Zero(2), v2(0.7, 0.4), 2.0).interior.empty());
}

TEST(Refine, FieldCountsAndMultipliers) {
  const auto fs = FieldSet::constant(ConstantSystem::two_speed());
  EXPECT_EQ(refine_fields(FieldSet::constant(ConstantSystem(Mat::Ones(1, 1))), 1, 1).k(), 3);
  EXPECT_EQ(refine_fields(fs, 1, 2).k(), 10);
  EXPECT_EQ(refinement_multipliers(1, 2), (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
  const auto r = refine_fields(fs, 1, 2);
  const Vec x = Vec::Zero(1);
  EXPECT_DOUBLE_EQ(r.eval(4, x)[0], 0.5 * fs.eval(1, x)[0]);
  EXPECT_DOUBLE_EQ(r.eval(6, x)[0], -fs.eval(2, x)[0]);
  EXPECT_THROW(refine_fields(fs, 0, 1), InvalidArgument);
  EXPECT_THROW(refine_fields(fs, 40, 40), ResourceLimit);
}

TEST(Functionals, ValuesOnACornerPath) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  const auto s = grid_path();
  EXPECT_EQ(evaluate_functional(fn::Unit{}, fs, s), Complex(1.0));
  const auto one = evaluate_functional(fn::OneForm{[](const Vec&) { return v2(1.0, 2.0); }}, fs, s);
  EXPECT_NEAR(one.real(), 1.0, 1e-10);
  const auto lin = evaluate_functional(fn::OneForm{[](const Vec& x) { return v2(x[0], 0.0); }}, fs, s);
  EXPECT_NEAR(lin.real(), 0.125, 1e-10);
  const auto me = evaluate_functional(fn::MetricExp{[](const Vec&) { return Mat(Mat::Identity(2, 2)); }}, fs, s);
  EXPECT_NEAR(me.real(), std::exp(-0.75), 1e-10);
  const auto pf = evaluate_functional(fn::PointFunction{[](const Vec& x) { return 1.0 + x[0]; }}, fs, s);
  EXPECT_NEAR(pf.real(), 1.5, 1e-14);
  const auto la =
      evaluate_functional(fn::LagrangianAction{[](const Vec&, const Vec& v) { return 0.5 * v.squaredNorm(); }, 1.0}, fs, s);
  EXPECT_NEAR(std::abs(la - std::exp(Complex(0.0, 0.375))), 0.0, 1e-10);
}

TEST(Functionals, EvaluatorErrorsAreWrapped) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  const fn::PointFunction bad{[](const Vec&) -> double { throw std::runtime_error("boom"); }};
  EXPECT_THROW(evaluate_functional(bad, fs, grid_path()), FunctionalEvaluationError);
}

TEST(Kernel, UnitEqualsTotalVolume) {
  const auto g = ConstantSystem::grid(2);
  KernelOptions ko;
  ko.max_len = 20;
  const auto k = kernel(g, Vec::Zero(2), v2(0.7, 0.4), 1.1, fn::Unit{}, ko);
  const auto tv = total_volume(g, Vec::Zero(2), v2(0.7, 0.4), 1.1, 20);
  EXPECT_NEAR(k.value.real(), tv.total, 1e-10);
  EXPECT_EQ(k.value.imag(), 0.0);
  EXPECT_LE(verify::kernel_unit_gap(ConstantSystem::two_speed(), Vec::Zero(1), Vec::Constant(1, 0.2), 1.0, 12), 1e-10);
}

TEST(Kernel, MetricWeightOnGrid) {
  // every path from 0 to (x, y) on the grid has energy x + y, so the weight factors out
  KernelOptions ko;
  ko.max_len = 16;
  const auto g = ConstantSystem::grid(2);
  const auto unit = kernel(g, Vec::Zero(2), v2(0.6, 0.5), 1.1, fn::Unit{}, ko);
  const auto w = kernel(g, Vec::Zero(2), v2(0.6, 0.5), 1.1, fn::MetricExp{[](const Vec&) { return Mat(Mat::Identity(2, 2)); }}, ko);
  EXPECT_NEAR(w.value.real(), std::exp(-1.1) * unit.value.real(), 1e-8);
}

TEST(Kernel, GeneralFieldsCountIsolatedPieces) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  KernelOptions ko;
  ko.max_len = 2;
  const auto k2 = kernel(fs, Vec::Zero(2), v2(0.7, 0.4), 1.1, fn::Unit{}, ko);
  EXPECT_NEAR(k2.value.real(), 2.0, 1e-12);
  EXPECT_FALSE(k2.incomplete);
  ko.max_len = 3;
  const auto k3 = kernel(fs, Vec::Zero(2), v2(0.7, 0.4), 1.1, fn::Unit{}, ko);
  EXPECT_TRUE(k3.incomplete);
  EXPECT_FALSE(k3.skipped.empty());
}

TEST(Wave, GridFrontIntegral) {
  const auto g = ConstantSystem::grid(2);
  const Vec q = Vec::Zero(2);
  KernelOptions ko;
  ko.max_len = 24;
  const auto w = wave(g, q, 1.0, fn::Unit{}, [](const Vec&) { return 1.0; }, builtin_front(g, q, 1.0), 1e-9, ko);
  EXPECT_NEAR(w.value.real(), 2.0 * (std::numbers::e - 1.0), 1e-7);
  EXPECT_TRUE(w.converged);
  const auto z = wave(g, q, 1.0, fn::Unit{}, [](const Vec&) { return 0.0; }, builtin_front(g, q, 1.0), 1e-9, ko);
  EXPECT_EQ(z.value, Complex(0.0));
  EXPECT_THROW(wave(g, q, 1.0, fn::Unit{}, [](const Vec&) { return 1.0; }, std::nullopt), InvalidArgument);
  EXPECT_FALSE(builtin_front(ConstantSystem::grid(3), Vec::Zero(3), 1.0).has_value());
}

TEST(Reach, GridTriangle) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  const GridSpec grid{v2(-0.5, -0.5), v2(1.5, 1.5), {16, 16}};
  const auto fr = reach_sample(fs, {Vec::Zero(2)}, 1.0, grid, 6);
  EXPECT_TRUE(cell_influenced(fr, v2(0.3, 0.3)));
  EXPECT_TRUE(cell_influenced(fr, v2(0.8, 0.05)));
  EXPECT_FALSE(cell_influenced(fr, v2(-0.3, 0.3)));
  EXPECT_FALSE(cell_influenced(fr, v2(0.9, 0.9)));
  EXPECT_GT(fr.front, 0u);
  EXPECT_LE(fr.front, fr.influenced);

  ReachOptions back;
  back.backward = true;
  const auto br = reach_sample(fs, {Vec::Zero(2)}, 1.0, grid, 6, back);
  EXPECT_TRUE(cell_influenced(br, v2(-0.3, -0.3)));
  EXPECT_FALSE(cell_influenced(br, v2(0.3, 0.3)));
}

TEST(Reach, ZeroTimeMarksOnlyTheSeedCell) {
  const auto fs = FieldSet::constant(ConstantSystem::grid(2));
  const GridSpec grid{v2(-1, -1), v2(1, 1), {8, 8}};
  const auto fr = reach_sample(fs, {v2(0.1, 0.1)}, 0.0, grid, 4);
  EXPECT_EQ(fr.influenced, 1u);
  EXPECT_THROW(reach_sample(fs, {Vec::Zero(3)}, 1.0, grid, 4), InvalidArgument);
}

TEST(Parallel, LowestIndexExceptionWins) {
  auto fn = [](std::size_t i) -> int {
    if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
    return static_cast<int>(i);
  };
  for (unsigned th : {1u, 2u, 4u}) {
    try {
      parallel_map<int>(10, fn, th);
      FAIL() << "no exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "3");
    }
  }
  const auto sq = parallel_map<int>(9, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
  EXPECT_EQ(sq[8], 64);
}
