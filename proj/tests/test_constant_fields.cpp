#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <random>

#include "dpath/constant_fields.hpp"
#include "dpath/quadrature.hpp"

using namespace dpath;

namespace {

// the two-variable function through the standard one: (y/x)^{n/2} I_n(2 sqrt(xy))
double oracle_i(int n, double x, double y) {
  if (n < 0) std::swap(x, y), n = -n;
  return std::pow(y / x, 0.5 * n) * boost::math::cyl_bessel_i(n, 2.0 * std::sqrt(x * y));
}

double oracle_grid2(double x, double y) { return oracle_i(-1, x, y) + 2.0 * oracle_i(0, x, y) + oracle_i(1, x, y); }

Vec point(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(Bessel, MatchesBoost) {
  for (int k = -3; k <= 3; ++k)
    for (auto [x, y] : {std::pair{0.3, 0.9}, {1.0, 1.0}, {2.5, 0.7}, {4.0, 6.0}}) {
      const double ref = oracle_i(k, x, y);
      EXPECT_NEAR(bessel_i(k, x, y).value, ref, 1e-13 * ref) << k << " " << x << " " << y;
    }
  EXPECT_THROW(bessel_i(0, -1.0, 1.0), InvalidArgument);
}

TEST(Grid2, ClosedFormMatchesBesselOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 40; ++i) {
    const double x = u(rng), y = u(rng);
    EXPECT_NEAR(grid2_volume(x, y).value, oracle_grid2(x, y), 1e-12 * oracle_grid2(x, y));
  }
}

TEST(Grid2, BoundaryConvention) {
  EXPECT_EQ(grid2_volume(0.0, 0.0).value, 1.0);
  EXPECT_EQ(grid2_volume(0.0, 2.0).value, 1.0);
  EXPECT_EQ(grid2_volume(1.5, 0.0).value, 1.0);
  EXPECT_EQ(grid2_volume(-0.1, 1.0).value, 0.0);
}

TEST(Grid2, Symmetric) {
  for (auto [x, y] : {std::pair{0.3, 0.9}, {1.7, 0.2}, {3.0, 4.0}})
    EXPECT_EQ(grid2_volume(x, y).value, grid2_volume(y, x).value);
}

TEST(Grid2, EngineMatchesClosedForm) {
  const auto g = ConstantSystem::grid(2);
  for (auto [x, y] : {std::pair{1.0, 1.0}, {0.4, 1.3}, {2.0, 0.5}}) {
    const auto rep = total_volume(g, Vec::Zero(2), point({x, y}), x + y, 40);
    EXPECT_NEAR(rep.total, oracle_grid2(x, y), 1e-8);
    EXPECT_EQ(rep.flagged_pieces, 0u);
  }
}

TEST(Grid2, TotalReportShells) {
  const auto rep = total_volume(ConstantSystem::grid(2), Vec::Zero(2), point({1.0, 1.0}), 2.0, 30);
  EXPECT_NEAR(rep.total, 2.0 * (boost::math::cyl_bessel_i(0, 2.0) + boost::math::cyl_bessel_i(1, 2.0)), 1e-8);
  ASSERT_FALSE(rep.per_length.empty());
  double sum = 0.0;
  for (const auto& s : rep.per_length) sum += s.volume;
  EXPECT_NEAR(sum, rep.total, 1e-14);
  EXPECT_EQ(rep.per_length.front().length, 2u);
  EXPECT_EQ(rep.truncation_length, 30u);
  EXPECT_EQ(rep.patterns_evaluated, 60u);
  EXPECT_GE(rep.tail_bound, 0.0);
}

TEST(Grid2, LambdaWeightsShells) {
  const auto g = ConstantSystem::grid(2);
  const auto plain = total_volume(g, Vec::Zero(2), point({0.5, 0.5}), 1.0, 10);
  VolumeOptions vo;
  vo.lambda = 0.5;
  const auto weighted = total_volume(g, Vec::Zero(2), point({0.5, 0.5}), 1.0, 10, vo);
  ASSERT_EQ(plain.per_length.size(), weighted.per_length.size());
  for (std::size_t i = 0; i < plain.per_length.size(); ++i) {
    const std::size_t n = plain.per_length[i].length - 1;
    EXPECT_NEAR(weighted.per_length[i].volume, plain.per_length[i].volume * std::pow(0.5, n) / std::tgamma(n + 1.0), 1e-15);
  }
}

TEST(Grid2, WaveAndMaxInfluence) {
  auto front = [](double s) { return grid2_volume(s, 1.0 - s).value; };
  EXPECT_NEAR(integrate_gk15<double>(front, 0.0, 1.0, 1e-12).value, grid2_wave(1.0), 1e-9);
  EXPECT_NEAR(grid2_wave(1.0), 3.43656365691809, 1e-12);
  const auto mi = grid2_max_influence(2.0);
  EXPECT_NEAR(mi.search_argmax, 1.0, 1e-6);
  EXPECT_NEAR(mi.value.value, grid2_volume(1.0, 1.0).value, 1e-12);
  EXPECT_NEAR(central_binomial_series(0.5).value, grid2_volume(0.5, 0.5).value, 1e-12);
}

TEST(Grid2, MixedDerivativeEqualsValue) {
  const double h = 1e-3;
  auto v = [](double x, double y) { return grid2_volume(x, y).value; };
  for (auto [x, y] : {std::pair{1.0, 1.0}, {0.5, 2.0}}) {
    const double d = (v(x + h, y + h) - v(x + h, y - h) - v(x - h, y + h) + v(x - h, y - h)) / (4 * h * h);
    EXPECT_NEAR(d / v(x, y), 1.0, 1e-5);
  }
}

TEST(Dim1, PrintedSeriesAtOrigin) {
  // the printed series at x = 0, t = 1 is 2 I_0(1) + 8 I_1(1)
  const double ref = 2.0 * boost::math::cyl_bessel_i(0, 1.0) + 8.0 * boost::math::cyl_bessel_i(1, 1.0);
  EXPECT_NEAR(dim1_two_speed_volume(0.0, 1.0).value, ref, 1e-13);
  EXPECT_EQ(dim1_two_speed_volume(1.0, 1.0).value, 1.0);
  EXPECT_EQ(dim1_two_speed_volume(1.5, 1.0).value, 0.0);
}

TEST(Dim1, EngineMatchesPatternResummation) {
  const auto sys = ConstantSystem::two_speed();
  for (auto [x, t] : {std::pair{0.3, 1.0}, {-0.5, 0.8}, {1.2, 2.0}}) {
    const auto rep = total_volume(sys, Vec::Zero(1), point({x}), t, 40);
    EXPECT_NEAR(rep.total, dim1_pattern_series(x, t).value, 1e-10);
  }
  // at |x| = t the zero-duration patterns contribute 3 + t
  EXPECT_NEAR(total_volume(sys, Vec::Zero(1), point({1.0}), 1.0, 40).total, 4.0, 1e-12);
  EXPECT_EQ(dim1_pattern_series(1.0, 1.0).value, 4.0);
}

TEST(Dim1, Waves) {
  EXPECT_NEAR(dim1_wave(1.0), 13.3900949316191, 1e-10);
  auto printed = [](double x) { return dim1_two_speed_volume(x, 1.0).value; };
  EXPECT_NEAR(integrate_gk15<double>(printed, -1.0, 1.0, 1e-12).value, dim1_wave(1.0), 1e-9);
  auto pattern = [](double x) { return dim1_pattern_series(x, 1.5).value; };
  EXPECT_NEAR(integrate_gk15<double>(pattern, -1.5, 1.5, 1e-12).value, dim1_pattern_wave(1.5), 1e-9);
}

TEST(GridK, ReducesToPlaneForTwoFields) {
  EXPECT_NEAR(gridk_volume({0.7, 1.1}, 25).value, grid2_volume(0.7, 1.1).value, 1e-10);
}

TEST(GridK, EngineAgreesAndSymmetric) {
  const double engine = total_volume(ConstantSystem::grid(3), Vec::Zero(3), Vec::Constant(3, 0.5), 1.5, 10).total;
  EXPECT_NEAR(gridk_volume({0.5, 0.5, 0.5}, 10).value, engine, 1e-10);
  const double a = gridk_volume({0.1, 0.6, 0.3}, 12).value;
  EXPECT_EQ(a, gridk_volume({0.6, 0.3, 0.1}, 12).value);
  EXPECT_EQ(a, gridk_volume({0.3, 0.1, 0.6}, 12).value);
}

TEST(GridK, PointOnCoordinatePlane) {
  // x3 = 0: field 3 may still be used only with zero time, so only supports containing {1,2} matter
  const double v = gridk_volume({0.4, 0.7, 0.0}, 12).value;
  const double engine = total_volume(ConstantSystem::grid(3), Vec::Zero(3), point({0.4, 0.7, 0.0}), 1.1, 12).total;
  EXPECT_NEAR(v, engine, 1e-10);
  EXPECT_EQ(gridk_volume({0.4, -0.1, 0.2}, 12).value, 0.0);
}

TEST(Torus, WindingSumAndCompatibility) {
  const auto tv = torus_volume({0.3, 0.6}, 2);
  const double plane = grid2_volume(0.3, 2.6).value + grid2_volume(1.3, 1.6).value + grid2_volume(2.3, 0.6).value;
  EXPECT_EQ(tv.value.value, plane);
  EXPECT_EQ(tv.windings, 3u);
  const auto off = torus_volume({0.3, 0.6}, 1, 5.0);
  EXPECT_FALSE(off.time_compatible);
  EXPECT_EQ(off.value.value, 0.0);
  EXPECT_THROW(torus_volume({0.0, 0.5}, 1), InvalidArgument);
}

TEST(Torus, EngineSumsLifts) {
  const auto sys = ConstantSystem::grid(2, Topology::torus);
  for (std::size_t m = 0; m <= 2; ++m) {
    const double t = 0.9 + static_cast<double>(m);
    const auto rep = total_volume(sys, Vec::Zero(2), point({0.3, 0.6}), t, 40);
    EXPECT_NEAR(rep.total, torus_volume({0.3, 0.6}, m, t).value.value, 1e-8) << "m=" << m;
  }
}

TEST(DirectInfluences, OneDirectionArrivals) {
  const auto sys = ConstantSystem::two_speed();
  const auto di = direct_influences(sys, Vec::Zero(1), point({1.0}), 1.0);
  ASSERT_EQ(di.fields.size(), 1u);
  EXPECT_EQ(di.fields[0], 1);
  EXPECT_TRUE(direct_influences(sys, Vec::Zero(1), Vec::Zero(1), 0.0).self);
  EXPECT_TRUE(direct_influences(sys, Vec::Zero(1), point({0.5}), 1.0).fields.empty());
}

TEST(PieceVolume, WindingOnlyOnTorus) {
  const auto plane = ConstantSystem::grid(2);
  EXPECT_THROW(piece_volume(plane, Pattern({1, 2}, 2), Vec::Zero(2), point({0.3, 0.6}), 1.9, point({1.0, 0.0})),
               InvalidArgument);
  const auto torus = ConstantSystem::grid(2, Topology::torus);
  const auto v = piece_volume(torus, Pattern({1, 2}, 2), Vec::Zero(2), point({0.3, 0.6}), 1.9, point({1.0, 0.0}));
  EXPECT_NEAR(v.value, 1.0, 1e-14);
}

TEST(Budget, TotalVolumeRefusesHugeJobs) {
  VolumeOptions vo;
  vo.pattern_budget = 1000;
  EXPECT_THROW(total_volume(ConstantSystem::grid(3), Vec::Zero(3), Vec::Ones(3), 3.0, 12, vo), ResourceLimit);
}

TEST(Threads, TotalIsIndependentOfThreadCount) {
  VolumeOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto g = ConstantSystem::grid(3);
  const auto a = total_volume(g, Vec::Zero(3), Vec::Constant(3, 0.4), 1.2, 8, one);
  const auto b = total_volume(g, Vec::Zero(3), Vec::Constant(3, 0.4), 1.2, 8, four);
  EXPECT_EQ(a.total, b.total);
}
