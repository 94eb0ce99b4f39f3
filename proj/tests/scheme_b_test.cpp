#include "cilp/scheme_b.hpp"

#include <gtest/gtest.h>

#include "cilp/chains.hpp"
#include "cilp/oracle.hpp"

namespace cilp {
namespace {

using Int = std::int64_t;

std::vector<Int> range(Int lo, Int hi) {
  std::vector<Int> xs;
  for (Int x = lo; x <= hi; ++x) xs.push_back(x);
  return xs;
}

CilpModel<Int, Int> gamblers_ruin() {
  return dt_exit(family_random_walk(0.5, 5), integer_range(1, 9), [](const Int& x) { return static_cast<double>(x); },
                 1000.0);
}

// Walk with p_up = 0.25 started at 3, stopped on hitting 0; E[sum x^2] = 46.
CilpModel<Int, Int> biased_walk() {
  return dt_exit(family_random_walk(0.25, 3), integers_from(1), monomial_weight(2), 46.0);
}

TEST(MinimalPointLower, GamblersRuinIsExactAtSaturation) {
  auto model = gamblers_ruin();
  const Int r = 10'000'000'000;
  auto approx = minimal_point_lower(model, build_truncation(model, r));
  auto exact = exact_occupation(family_random_walk(0.5, 5), range(1, 9));
  for (Int x = 1; x <= 9; ++x) EXPECT_NEAR(approx.lower.mass_at(x), exact.nu.mass_at(x), 1e-9) << x;
  // Green's function of the walk killed outside {1..9}: G(5, 5) = 2 · 5 · 5 / 10.
  EXPECT_NEAR(approx.lower.mass_at(5), 5.0, 1e-9);
  EXPECT_NEAR(approx.captured_mass, 25.0, 1e-8);
  EXPECT_GE(approx.gamma, -1e-9);
  EXPECT_LE(approx.gamma, model.c / static_cast<double>(r) + 1e-9);
}

TEST(MinimalPointLower, BiasedWalkBoundsAreDominatedAndWithinGamma) {
  auto model = biased_walk();
  auto oracle = exact_occupation(family_random_walk(0.25, 3), range(1, 300));
  double prev_gamma = INFINITY;
  for (Int r : {144, 324, 576}) {
    auto approx = minimal_point_lower(model, build_truncation(model, r));
    for (const auto& [x, m] : approx.lower.entries()) EXPECT_LE(m, oracle.nu.mass_at(x) + 1e-7) << x;
    EXPECT_LE(tv_distance(oracle.nu, approx.lower), approx.gamma + 1e-7) << r;
    EXPECT_LT(approx.gamma, prev_gamma);
    EXPECT_GE(approx.u_indicator + 1e-9, approx.captured_mass);
    prev_gamma = approx.gamma;
  }
}

TEST(MinimalPointLower, Mm1CapturedMassGrowsWithR) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  double prev = -1;
  for (Int r : {30, 200, 1000, 8000}) {
    auto approx = minimal_point_lower(model, build_truncation(model, r));
    EXPECT_GT(approx.captured_mass, prev);
    EXPECT_LE(approx.captured_mass, 1 + 1e-9);
    prev = approx.captured_mass;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(MinimalPointLower, ExperimentalUpperDominatesLower) {
  auto model = biased_walk();
  SolveOptions opt;
  opt.experimental_upper = true;
  auto approx = minimal_point_lower(model, build_truncation(model, 144), opt);
  ASSERT_TRUE(approx.upper);
  for (const auto& [x, m] : approx.lower.entries()) EXPECT_GE(approx.upper->mass_at(x), m - 1e-9) << x;
  EXPECT_FALSE(minimal_point_lower(model, build_truncation(model, 144)).upper);
}

TEST(MinimalPointLower, ResultDoesNotDependOnWorkerCount) {
  auto model = biased_walk();
  auto t = build_truncation(model, 324);
  SolveOptions four;
  four.workers = 4;
  auto a = minimal_point_lower(model, t);
  auto b = minimal_point_lower(model, t, four);
  EXPECT_EQ(a.lower.entries(), b.lower.entries());
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.u_indicator, b.u_indicator);
}

TEST(ImageLower, GamblersRuinExitLawAtSaturation) {
  auto model = gamblers_ruin();
  auto t = build_truncation(model, 10'000'000'000);
  auto ys = reachable_outputs(model, t);
  EXPECT_EQ(ys, (std::vector<Int>{0, 10}));
  auto approx = minimal_point_lower(model, t);
  auto image = image_lower(model, t, std::span<const Int>(ys), {}, &approx);
  EXPECT_NEAR(image.lower.mass_at(0), 0.5, 1e-9);
  EXPECT_NEAR(image.lower.mass_at(10), 0.5, 1e-9);
  EXPECT_NEAR(image.mass_gap, 0.0, 1e-9);
  ASSERT_TRUE(image.lower_point_gap);
  EXPECT_NEAR(*image.lower_point_gap, 0.0, 1e-9);
}

TEST(ImageLower, BiasedWalkExitMassIncreasesAndBoundsTheError) {
  auto model = biased_walk();
  double prev = -1;
  for (Int r : {144, 324, 576}) {
    auto t = build_truncation(model, r);
    std::vector<Int> ys{0};
    auto image = image_lower(model, t, std::span<const Int>(ys));
    const double l0 = image.lower.mass_at(0);
    EXPECT_GT(l0, prev);
    EXPECT_LE(l0, 1 + 1e-9);
    // The true exit law is the point mass at 0.
    EXPECT_LE(1 - l0, image.mass_gap + 1e-12);
    prev = l0;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(ImageLower, EmptyOutputWindowLeavesTheWholeGap) {
  auto model = gamblers_ruin();
  auto t = build_truncation(model, 100);
  std::vector<Int> none;
  auto image = image_lower(model, t, std::span<const Int>(none));
  EXPECT_EQ(image.lower.size(), 0u);
  EXPECT_EQ(image.mass_gap, 1.0);
  EXPECT_FALSE(image.lower_point_gap);
}

TEST(ImageLower, DuplicateOutputsAreMerged) {
  auto model = gamblers_ruin();
  auto t = build_truncation(model, 10'000'000'000);
  std::vector<Int> ys{10, 0, 10};
  auto image = image_lower(model, t, std::span<const Int>(ys));
  EXPECT_EQ(image.window, (std::vector<Int>{0, 10}));
}

}  // namespace
}  // namespace cilp
