#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dpath/polytope.hpp"
#include "dpath/constant_fields.hpp"
#include "dpath/verify/suite.hpp"

using namespace dpath;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST(Constraints, DropsRedundantRowsAndFlagsInconsistency) {
  Mat M(3, 2);
  M << 1, 1, 2, 2, 1, -1;
  Vec b(3);
  b << 1, 2, 0;
  const auto cs = make_constraint_system(M, b);
  EXPECT_EQ(cs.rank, 2);
  EXPECT_TRUE(cs.consistent);
  EXPECT_EQ(cs.redundant_rows.size(), 1u);

  b << 1, 3, 0;
  EXPECT_FALSE(make_constraint_system(M, b).consistent);
}

TEST(Vertices, UnitSimplexInThreeVariables) {
  Mat M = Mat::Ones(1, 3);
  Vec b = Vec::Ones(1);
  const auto hull = enumerate_vertices(make_constraint_system(M, b));
  EXPECT_EQ(hull.status, HullStatus::positive_dim);
  EXPECT_EQ(hull.affine_dimension, 2);
  EXPECT_EQ(hull.vertices.size(), 3u);
}

TEST(Vertices, EmptyWhenInfeasible) {
  Mat M = Mat::Ones(1, 2);
  Vec b = -Vec::Ones(1);
  EXPECT_EQ(enumerate_vertices(make_constraint_system(M, b)).status, HullStatus::empty);
}

TEST(SimplexIntegral, DirichletFormula) {
  // standard triangle: int x^a y^b = a! b! / (a + b + 2)!
  std::vector<Vec> tri{v2(0, 0), v2(1, 0), v2(0, 1)};
  EXPECT_NEAR(simplex_monomial_integral(tri, {0, 0}), 0.5, 1e-15);
  EXPECT_NEAR(simplex_monomial_integral(tri, {1, 0}), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(simplex_monomial_integral(tri, {2, 1}), 2.0 / 120.0, 1e-15);
  // a scaled, shifted triangle picks up the Jacobian
  std::vector<Vec> big{v2(1, 1), v2(3, 1), v2(1, 3)};
  EXPECT_NEAR(simplex_monomial_integral(big, {0, 0}), 2.0, 1e-14);
  // int over [0,2] of x^3 on a segment
  std::vector<Vec> seg{Vec::Zero(1), Vec::Constant(1, 2.0)};
  EXPECT_NEAR(simplex_monomial_integral(seg, {3}), 4.0, 1e-14);
}

TEST(Triangulate, SquareSectionSplitsIntoTwoTriangles) {
  // {x >= 0 : x1 + x3 = 1, x2 + x4 = 1} is a unit square tilted into R^4, area 2
  Mat M(2, 4);
  M << 1, 0, 1, 0, 0, 1, 0, 1;
  const auto hull = enumerate_vertices(make_constraint_system(M, Vec::Ones(2)));
  ASSERT_EQ(hull.vertices.size(), 4u);
  const auto simplices = triangulate(hull, 1e-12);
  EXPECT_EQ(simplices.size(), 2u);
  double area = 0.0;
  for (const auto& s : simplices) {
    std::vector<Vec> pts;
    for (int i : s) pts.push_back(hull.vertices[static_cast<std::size_t>(i)]);
    area += simplex_monomial_integral(pts, {0, 0, 0, 0});
  }
  EXPECT_NEAR(area, 2.0, 1e-14);
}

TEST(NormalizedVolume, SimplexMeasureForZeroFields) {
  const Vec z = Vec::Zero(1);
  for (double t : {0.5, 1.0, 2.5})
    for (int n = 0; n <= 8; ++n) {
      std::vector<int> e;
      for (int i = 1; i <= n + 1; ++i) e.push_back(i);
      const auto v = normalized_volume(ConstantSystem(Mat::Zero(1, n + 1)), Pattern(e, n + 1), z, z, t);
      EXPECT_NEAR(v.value, std::pow(t, n) / factorial(n), 1e-12) << "n=" << n;
      EXPECT_EQ(v.dimension, n);
    }
}

TEST(NormalizedVolume, GridPointBasePieces) {
  const auto g = ConstantSystem::grid(2);
  const Vec p = Vec::Zero(2), q = v2(0.7, 0.4);
  // (1,2): the times are forced, a single point
  auto v = normalized_volume(g, Pattern({1, 2}, 2), p, q, 1.1);
  EXPECT_EQ(v.status, HullStatus::point);
  EXPECT_NEAR(v.value, 1.0, 1e-14);
  // (1,2,1): field 1 split in two, a segment of length x in fibered measure
  v = normalized_volume(g, Pattern({1, 2, 1}, 2), p, q, 1.1);
  EXPECT_NEAR(v.value, 0.7, 1e-14);
  EXPECT_EQ(v.dimension, 1);
  // (1,2,1,2): x y
  EXPECT_NEAR(normalized_volume(g, Pattern({1, 2, 1, 2}, 2), p, q, 1.1).value, 0.7 * 0.4, 1e-14);
  // wrong total time: empty
  v = normalized_volume(g, Pattern({1, 2}, 2), p, q, 1.3);
  EXPECT_EQ(v.status, HullStatus::empty);
  EXPECT_EQ(v.value, 0.0);
}

TEST(NormalizedVolume, PositiveDimensionalBaseIsFlagged) {
  Mat A(1, 3);
  A << 1.0, -1.0, 0.5;
  Vec z = Vec::Zero(1), x = Vec::Constant(1, 0.3);
  const auto v = normalized_volume(ConstantSystem(A), Pattern({1, 2, 3}, 3), z, x, 1.0);
  EXPECT_EQ(v.status, HullStatus::positive_dim);
  EXPECT_TRUE(v.base_flagged);
  EXPECT_EQ(v.base_dimension, 1);
  EXPECT_GT(v.value, 0.0);
  EXPECT_STREQ(v.convention, "fibered-sigma");
}

TEST(NormalizedVolume, RejectsBadInput) {
  const auto g = ConstantSystem::grid(2);
  EXPECT_THROW(normalized_volume(g, Pattern({1, 2}, 2), Vec::Zero(3), Vec::Zero(2), 1.0), InvalidArgument);
  EXPECT_THROW(normalized_volume(g, Pattern({1, 2}, 2), Vec::Zero(2), Vec::Zero(2), -1.0), InvalidArgument);
  EXPECT_THROW(normalized_volume(g, Pattern({1, 2}, 3), Vec::Zero(2), Vec::Zero(2), 1.0), InvalidArgument);
}

TEST(Invariance, RandomSystems) {
  const auto c = verify::check_invariance(12, 4, 31337);
  EXPECT_LE(c.observed, 1e-10) << c.detail;
}

TEST(MonteCarlo, AgreesWithinFourStandardErrors) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 4; ++i) {
    const auto pc = verify::positive_dim_piece(rng);
    const double exact = normalized_volume(pc.sys, pc.c, pc.p, pc.q, pc.t).value;
    const auto mc = mc_piece_volume_oracle(pc.sys, pc.c, pc.p, pc.q, pc.t, 200000, 17 + i);
    EXPECT_FALSE(mc.exact);
    EXPECT_LE(std::abs(mc.estimate - exact), 4.0 * mc.standard_error) << exact << " vs " << mc.estimate;
  }
}

TEST(MonteCarlo, SameSeedSameEstimate) {
  std::mt19937_64 rng(6);
  const auto pc = verify::positive_dim_piece(rng);
  const auto a = mc_piece_volume_oracle(pc.sys, pc.c, pc.p, pc.q, pc.t, 5000, 99);
  const auto b = mc_piece_volume_oracle(pc.sys, pc.c, pc.p, pc.q, pc.t, 5000, 99);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_THROW(mc_piece_volume_oracle(pc.sys, pc.c, pc.p, pc.q, pc.t, 0, 1), InvalidArgument);
}

TEST(MonteCarlo, PointBaseIsExact) {
  const auto g = ConstantSystem::grid(2);
  const auto mc = mc_piece_volume_oracle(g, Pattern({1, 2, 1}, 2), Vec::Zero(2), v2(0.7, 0.4), 1.1, 10, 1);
  EXPECT_TRUE(mc.exact);
  EXPECT_NEAR(mc.estimate, 0.7, 1e-14);
}
