#include "cilp/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cilp/chains.hpp"
#include "cilp/objective.hpp"
#include "cilp/validation.hpp"

namespace cilp {
namespace {

CtChain<std::int64_t> three_state_ctmc() {
  return finite_ct_chain({{0, 2, 1}, {1, 0, 3}, {4, 1, 0}});
}

std::function<double(const std::int64_t&)> linear_weight() {
  return [](const std::int64_t& x) { return static_cast<double>(x); };
}

TEST(ValidateAssumptions, FiniteCtmcPassesEveryCheck) {
  auto model = ct_stationary(three_state_ctmc(), linear_weight(), 2.0);
  auto report = validate_assumptions(model, 10);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.window_size, 3u);
  for (const auto& c : report.checks)
    EXPECT_TRUE(c.status == CheckStatus::pass || c.status == CheckStatus::certified) << c.name;
}

TEST(ValidateAssumptions, NegativeGEntryIsReportedWithWitness) {
  auto model = ct_stationary(three_state_ctmc(), linear_weight(), 2.0);
  model.g_row = [](const std::int64_t& x) {
    return std::vector<std::pair<std::int64_t, double>>{{x, x == 2 ? -1.0 : 1.0}};
  };
  auto report = validate_assumptions(model, 10);
  EXPECT_FALSE(report.ok());
  const auto* g = report.find("g_nonnegative");
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->status, CheckStatus::fail);
  ASSERT_FALSE(g->witnesses.empty());
  EXPECT_EQ(g->witnesses.front(), 2);
}

TEST(ValidateAssumptions, Mm1WithCubicWeightPassesAndTailIsCertified) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  auto report = validate_assumptions(model, 1000);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.window_size, 10u);
  EXPECT_EQ(report.find("tail_certificate")->status, CheckStatus::certified);
  EXPECT_EQ(report.find("metzler")->status, CheckStatus::pass);
}

TEST(ValidateAssumptions, NegativeOffDiagonalBreaksMetzler) {
  auto model = ct_stationary(three_state_ctmc(), linear_weight(), 2.0);
  auto base = model.predecessors;
  model.predecessors = [base](const std::int64_t& x) {
    auto col = base(x);
    if (x == 1) col.emplace_back(0, -5.0);
    return col;
  };
  auto report = validate_assumptions(model, 10);
  EXPECT_EQ(report.find("metzler")->status, CheckStatus::fail);
  EXPECT_EQ(report.find("metzler")->witnesses.front(), 1);
}

TEST(ValidateAssumptions, EnumeratorReturningHeavyStateIsAModelError) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(2), 3.0);
  model.enumerator = [](std::int64_t r) {
    std::vector<std::int64_t> xs;
    for (std::int64_t x = 0; x * x <= r; ++x) xs.push_back(x);  // includes w(x) = r
    return xs;
  };
  try {
    validate_assumptions(model, 16);
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.witness(), "4");
  }
}

TEST(ValidateAssumptions, AbsorbingStateInsideExitDomainIsFlagged) {
  // State 2 has no outgoing rates and cannot reach the exit at 0.
  auto chain = finite_ct_chain({{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 1, 0}}, {{1, 1.0}});
  auto model = ct_exit(chain, integer_range(1, 3), 2.0, 10.0);
  auto report = validate_assumptions(model, 100);
  const auto* reach = report.find("reachability");
  ASSERT_NE(reach, nullptr);
  EXPECT_EQ(reach->status, CheckStatus::fail);
  EXPECT_EQ(reach->witnesses.front(), 2);
}

TEST(ValidateAssumptions, PathSearchLeavingTheWindowIsNotCheckable) {
  // Exit from {1, 2, ...} for a walk whose weight vanishes on 1..3 and whose
  // only exit is far away: at a small horizon the search cannot decide.
  DtChain<std::int64_t> chain = family_random_walk(0.5, 2);
  auto far_exit = Domain<std::int64_t>{[](const std::int64_t& x) { return x >= 0 && x < 50; }, {2}};
  std::function<double(const std::int64_t&)> w = [](const std::int64_t& x) {
    return x <= 3 ? 0.0 : static_cast<double>(x);
  };
  auto model = dt_exit(chain, far_exit, w, 100.0);
  auto report = validate_assumptions(model, 6);
  EXPECT_EQ(report.find("reachability")->status, CheckStatus::not_checkable);
  EXPECT_TRUE(report.ok());
}

TEST(ValidateAssumptions, IsDeterministic) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  auto a = validate_assumptions(model, 500), b = validate_assumptions(model, 500);
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].status, b.checks[i].status);
    EXPECT_EQ(a.checks[i].witnesses, b.checks[i].witnesses);
  }
}

TEST(ValidateAssumptions, BSeqPresenceIsNoted) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  EXPECT_EQ(validate_assumptions(model, 100).find("finite_columns")->status, CheckStatus::pass);
  model.b_seq = nearest_neighbour_b_seq(2.0);
  EXPECT_EQ(validate_assumptions(model, 100).find("finite_columns")->status, CheckStatus::certified);
}

TEST(TailSupRatio, IndicatorInsideWindowIsZero) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  auto ratio = tail_sup_ratio(model, indicator<std::int64_t>(2), 1000);
  ASSERT_TRUE(ratio);
  EXPECT_EQ(*ratio, 0.0);
}

TEST(TailSupRatio, IndicatorOutsideWindowUsesItsWeight) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  EXPECT_DOUBLE_EQ(*tail_sup_ratio(model, indicator<std::int64_t>(20), 1000), 1.0 / 8000.0);
}

TEST(TailSupRatio, LinearObjectiveUnderCubicWeight) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  auto f = monomial_objective(1, 3.0);
  for (std::int64_t r : {1, 2, 8, 9, 27, 28, 1000, 1001, 125000}) {
    const auto m = static_cast<double>(ceil_root(r, 3.0));
    EXPECT_DOUBLE_EQ(*tail_sup_ratio(model, f, r), 1.0 / (m * m)) << "r=" << r;
  }
  // Boundary: X_1000 = {0..9}, so the first outside state is 10.
  EXPECT_EQ(ceil_root(1000, 3.0), 10);
  EXPECT_EQ(ceil_root(1001, 3.0), 11);
}

TEST(TailSupRatio, EnvelopeIsNonIncreasing) {
  auto f = monomial_objective(2, 3.0);
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  double prev = INFINITY;
  for (std::int64_t r = 1; r < 5000; r += 7) {
    const double v = *tail_sup_ratio(model, f, r);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(TailSupRatio, MissingEnvelopeIsUnavailable) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(3), 13.0);
  Objective<std::int64_t> f{"exp", [](const std::int64_t& x) { return std::exp(static_cast<double>(x)); }, {},
                            SignCertificate::nonnegative_outside, std::nullopt};
  EXPECT_FALSE(tail_sup_ratio(model, f, 100));
  EXPECT_THROW(require_tail_sup_ratio(model, f, 100), EnvelopeRequired);
}

TEST(MonomialObjective, DegreeMustStayBelowWeightDegree) {
  EXPECT_NO_THROW(monomial_objective(2, 3.0));
  try {
    monomial_objective(3, 3.0);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("not in W"), std::string::npos);
  }
}

TEST(SublevelEnumeration, NestedAndConsistentWithWeight) {
  auto model = ct_stationary(family_mm1(1, 2), monomial_weight(2), 3.0);
  auto big = model.enumerator(10000);
  std::set<std::int64_t> members(big.begin(), big.end());
  for (std::int64_t r = 1; r <= 10000; r = r * 3 + 1) {
    auto xs = model.enumerator(r);
    EXPECT_EQ(xs, monomial_window(r, 2.0));
    for (auto x : xs) {
      EXPECT_TRUE(members.count(x));
      EXPECT_LT(model.w(x), static_cast<double>(r));
    }
  }
}

TEST(CeilRoot, MatchesBruteForce) {
  for (std::int64_t r = 1; r < 3000; ++r) {
    std::int64_t m = 0;
    while (std::pow(static_cast<double>(m), 2.0) * 0.5 < static_cast<double>(r)) ++m;
    EXPECT_EQ(ceil_root(r, 2.0, 0.5), m) << r;
  }
}

}  // namespace
}  // namespace cilp
