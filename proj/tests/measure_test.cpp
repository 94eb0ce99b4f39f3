#include "cilp/measure.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "cilp/chains.hpp"

namespace cilp {
namespace {

TEST(BoundedMeasure, SortsAndMergesDuplicates) {
  BoundedMeasure<std::int64_t> m({{3, 0.5}, {1, 0.25}, {3, 0.125}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.entries()[0].first, 1);
  EXPECT_EQ(m.entries()[1].first, 3);
  EXPECT_DOUBLE_EQ(m.mass_at(3), 0.625);
  EXPECT_DOUBLE_EQ(m.mass_at(2), 0.0);
  EXPECT_DOUBLE_EQ(m.total_mass(), 0.875);
}

TEST(BoundedMeasure, ClampsRoundOffButRejectsNegativeMass) {
  BoundedMeasure<std::int64_t> m({{0, -5e-10}, {1, 1.0}});
  EXPECT_EQ(m.mass_at(0), 0.0);
  EXPECT_THROW(BoundedMeasure<std::int64_t>({{0, -1e-6}}), std::invalid_argument);
  EXPECT_THROW(BoundedMeasure<std::int64_t>({{0, NAN}}), std::invalid_argument);
}

TEST(BoundedMeasure, RecordsMomentsAgainstAModel) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(2), 3.0);
  auto m = BoundedMeasure<std::int64_t>::over(model, {{0, 0.5}, {1, 0.25}, {2, 0.125}});
  ASSERT_TRUE(m.w_moment());
  EXPECT_DOUBLE_EQ(*m.w_moment(), 0.25 + 0.5);
  EXPECT_DOUBLE_EQ(*m.g_mass(), 0.875);
  EXPECT_FALSE(BoundedMeasure<std::int64_t>({{0, 1.0}}).w_moment());
}

TEST(BoundedMeasure, IntegralAgainstFunction) {
  BoundedMeasure<std::int64_t> m({{1, 0.5}, {2, 0.5}});
  EXPECT_DOUBLE_EQ(m.integral([](std::int64_t x) { return static_cast<double>(x * x); }), 2.5);
}

TEST(BoundedMeasure, TupleStatesUseLexicographicOrder) {
  using P = std::array<std::int64_t, 2>;
  BoundedMeasure<P> m({{P{1, 0}, 0.5}, {P{0, 7}, 0.25}});
  EXPECT_EQ(m.entries().front().first, (P{0, 7}));
  EXPECT_EQ(state_to_string(P{0, 7}), "(0,7)");
  EXPECT_NE(encode_state(P{1, 0}), encode_state(P{0, 1}));
}

TEST(TotalVariation, PositiveAndNegativeParts) {
  BoundedMeasure<std::int64_t> a({{0, 0.5}, {1, 0.5}});
  BoundedMeasure<std::int64_t> b({{0, 0.25}, {2, 0.75}});
  // a - b = (+0.25, +0.5, -0.75)
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 0.75);
  EXPECT_DOUBLE_EQ(difference_mass(a, b), 1.5);
  EXPECT_DOUBLE_EQ(tv_distance(a, a), 0.0);
}

TEST(TotalVariation, DominatedDifferenceEqualsMassGap) {
  BoundedMeasure<std::int64_t> big({{0, 0.6}, {1, 0.4}});
  BoundedMeasure<std::int64_t> small({{0, 0.5}, {1, 0.3}});
  EXPECT_NEAR(tv_distance(big, small), 0.2, 1e-15);
  EXPECT_NEAR(difference_mass(big, small), big.total_mass() - small.total_mass(), 1e-15);
}

}  // namespace
}  // namespace cilp
