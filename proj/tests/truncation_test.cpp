#include "cilp/truncation.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cilp/chains.hpp"
#include "cilp/lp.hpp"
#include "cilp/assemble.hpp"

namespace cilp {
namespace {

using Int = std::int64_t;

BoundedMeasure<Int> geometric(double rho, Int upto) {
  std::vector<std::pair<Int, double>> entries;
  for (Int x = 0; x <= upto; ++x) entries.emplace_back(x, (1 - rho) * std::pow(rho, static_cast<double>(x)));
  return BoundedMeasure<Int>(std::move(entries));
}

TEST(BuildTruncation, Mm1QuadraticWeightAtFive) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(2), 3.0);
  auto t = build_truncation(model, 5);
  EXPECT_EQ(t.states, (std::vector<Int>{0, 1, 2}));
  EXPECT_EQ(t.equality_set, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(t.a_r, 0.2);
  EXPECT_DOUBLE_EQ(t.complement_inverse_w_bound, 0.2);
  EXPECT_EQ(t.index_of(2), 2u);
  EXPECT_FALSE(t.index_of(3));
}

TEST(BuildTruncation, SaturatedFiniteChainKeepsEveryEquality) {
  auto model = dt_stationary(finite_dt_chain({{0, 1, 0}, {0.5, 0, 0.5}, {0, 1, 0}}),
                             [](const Int& x) { return static_cast<double>(x); }, 5.0);
  auto t = build_truncation(model, 100);
  EXPECT_EQ(t.states.size(), 3u);
  EXPECT_EQ(t.equality_set.size(), 3u);
}

TEST(BuildTruncation, LinearWeightAtOneKeepsOnlyTheOrigin) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(1), 1.0);
  auto t = build_truncation(model, 1);
  EXPECT_EQ(t.states, (std::vector<Int>{0}));
  EXPECT_TRUE(t.equality_set.empty());
}

TEST(BuildTruncation, EmptyWindowReportsSmallestUsableR) {
  auto chain = family_random_walk(0.25, 5);
  auto model = dt_exit(chain, integers_from(5), monomial_weight(2), 100.0);
  try {
    build_truncation(model, 10);
    FAIL() << "expected TruncationTooSmall";
  } catch (const TruncationTooSmall& e) {
    EXPECT_EQ(e.r(), 10);
    ASSERT_TRUE(e.minimal_r());
    EXPECT_EQ(*e.minimal_r(), 26);  // w(5) = 25 < 26
  }
  EXPECT_THROW(build_truncation(model, 0), PreconditionError);
}

TEST(BuildTruncation, WindowsAndEqualitySetsAreMonotone) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  std::vector<Int> prev_states;
  std::vector<Int> prev_eq;
  for (Int r : {2, 9, 30, 100, 1000, 5000}) {
    auto t = build_truncation(model, r);
    std::vector<Int> eq;
    for (auto i : t.equality_set) eq.push_back(t.states[i]);
    EXPECT_TRUE(std::includes(t.states.begin(), t.states.end(), prev_states.begin(), prev_states.end()));
    EXPECT_TRUE(std::includes(eq.begin(), eq.end(), prev_eq.begin(), prev_eq.end()));
    prev_states = t.states;
    prev_eq = eq;
  }
}

TEST(Restrict, KeepsWindowMassesOnly) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(2), 3.0);
  auto t = build_truncation(model, 5);
  auto pi = geometric(0.5, 60);
  auto kept = restrict(pi, t);
  ASSERT_EQ(kept.size(), 3u);
  for (Int x = 0; x < 3; ++x) EXPECT_EQ(kept.mass_at(x), pi.mass_at(x));
  EXPECT_NEAR(kept.total_mass(), 7.0 / 8.0, 1e-15);
}

TEST(Restrict, MeasureInsideWindowIsUnchanged) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(2), 3.0);
  auto t = build_truncation(model, 50);
  BoundedMeasure<Int> m({{1, 0.3}, {4, 0.2}});
  auto kept = restrict(m, t);
  EXPECT_EQ(kept.entries(), m.entries());
}

// The restriction of the stationary law satisfies every constraint of the
// truncated LP.
TEST(OuterApproximation, RestrictedStationaryLawIsFeasible) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  auto pi = geometric(0.5, 400);
  for (Int r : {10, 100, 1000, 27000, 125000}) {
    auto t = build_truncation(model, r);
    auto lp = assemble_outer_lp(model, t, zero_objective<Int>(), Sense::minimize);
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = pi.mass_at(t.states[i]);
    EXPECT_LE(max_residual(lp, x), 1e-8) << "r=" << r;
  }
}

}  // namespace
}  // namespace cilp
