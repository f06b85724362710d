#include <gtest/gtest.h>

#include "intent_lab/market_model.hpp"
#include "intent_lab/rng.hpp"

using namespace intent_lab;

namespace {

MarketParams params(double g = 1.5) {
  MarketParams p;
  p.beta_lo = 1.0;
  p.beta_hi = 3.0;
  p.delta_lo = 1.0;
  p.delta_hi = 3.0;
  p.g = g;
  p.p_db = 1.0;
  return p;
}

SolverState s1(double beta) { return {SolverId::One, beta, 0.0, 0.0}; }
SolverState s2(double delta) { return {SolverId::Two, delta, 0.0, 0.0}; }

}  // namespace

TEST(MarketParams, RejectsBrokenBounds) {
  MarketParams p = params();
  EXPECT_NO_THROW(p.validate());
  p.g = 0.99;
  try {
    p.validate();
    FAIL();
  } catch (const ParamError& e) {
    EXPECT_EQ(e.field(), "g");
  }
  p = params();
  p.beta_hi = p.beta_lo;
  EXPECT_THROW(p.validate(), ParamError);
  p = params();
  p.p_db = 0.0;
  EXPECT_THROW(p.validate(), ParamError);
  p = params();
  p.delta_lo = -1.0;
  EXPECT_THROW(p.validate(), ParamError);
}

TEST(MarketParams, ExtensionBounds) {
  MarketParams p = params();
  p.beta_hi = 2.0;
  p.ext = ExecutionExt{4.0, 0.5};
  EXPECT_NO_THROW(p.validate());
  p.ext->tau = 1.0;
  EXPECT_THROW(p.validate(), ParamError);
  p.ext = ExecutionExt{2.5, 0.5};  // 2.5 * 1 < 1.5 * 2
  EXPECT_THROW(p.validate(), ParamError);
  p.ext = ExecutionExt{1.2, 0.5};  // k below g
  EXPECT_THROW(p.validate(), ParamError);
  p.ext = ExecutionExt{4.0, 0.5};
  p.g = 1.0;
  EXPECT_THROW(p.validate(), ParamError);
}

TEST(Production, SpecExamples) {
  MarketParams p = params();
  const Quantities both = production(p, s1(2.0), {SolverId::One, SolverId::One});
  EXPECT_DOUBLE_EQ(both.b, 3.0);
  EXPECT_DOUBLE_EQ(both.d, 1.5);

  MarketParams p1 = params(1.0);
  const Quantities solo = production(p1, s2(2.0), {SolverId::One, SolverId::Two});
  EXPECT_DOUBLE_EQ(solo.b, 0.0);
  EXPECT_DOUBLE_EQ(solo.d, 2.0);

  MarketParams pe = params();
  pe.beta_hi = 2.0;
  pe.delta_hi = 2.0;
  pe.ext = ExecutionExt{4.0, 0.5};
  const Quantities alt = production(pe, s2(1.5), {SolverId::Two, SolverId::Two}, ExecutionChoice::Alt);
  EXPECT_DOUBLE_EQ(alt.b, 4.0);
  EXPECT_DOUBLE_EQ(alt.d, 0.5);
}

TEST(Production, OtherOrderAloneYieldsFloor) {
  MarketParams p = params();
  const Quantities a = production(p, s1(2.5), {SolverId::Two, SolverId::One});
  EXPECT_DOUBLE_EQ(a.b, 0.0);
  EXPECT_DOUBLE_EQ(a.d, p.delta_lo);
  const Quantities b = production(p, s2(2.5), {SolverId::Two, SolverId::One});
  EXPECT_DOUBLE_EQ(b.b, p.beta_lo);
  EXPECT_DOUBLE_EQ(b.d, 0.0);
}

TEST(Production, AltNeedsExtensionAndBothOrders) {
  MarketParams p = params();
  EXPECT_THROW(production(p, s1(2.0), {SolverId::One, SolverId::One}, ExecutionChoice::Alt), std::invalid_argument);
  p.beta_hi = 2.0;
  p.ext = ExecutionExt{4.0, 0.5};
  EXPECT_THROW(production(p, s1(2.0), {SolverId::One, SolverId::Two}, ExecutionChoice::Alt), std::invalid_argument);
}

TEST(Production, NoBatchingGainAtUnitG) {
  MarketParams p = params(1.0);
  CounterRng rng(3, 1);
  for (int i = 0; i < 200; ++i) {
    const double beta = rng.uniform(p.beta_lo, p.beta_hi);
    const double delta = rng.uniform(p.delta_lo, p.delta_hi);
    const Quantities b1 = production(p, s1(beta), {SolverId::One, SolverId::One});
    const Quantities o1 = production(p, s1(beta), {SolverId::One, SolverId::Two});
    const Quantities t1 = production(p, s1(beta), {SolverId::Two, SolverId::One});
    EXPECT_DOUBLE_EQ(b1.b, o1.b);
    EXPECT_DOUBLE_EQ(b1.d, t1.d);
    const Quantities b2 = production(p, s2(delta), {SolverId::Two, SolverId::Two});
    const Quantities o2 = production(p, s2(delta), {SolverId::One, SolverId::Two});
    const Quantities t2 = production(p, s2(delta), {SolverId::Two, SolverId::One});
    EXPECT_DOUBLE_EQ(b2.d, o2.d);
    EXPECT_DOUBLE_EQ(b2.b, t2.b);
  }
}

TEST(Feasibility, SpecExamples) {
  MarketParams p = params();
  const auto v = feasibility_check(p, s1(2.0), s2(2.0), {SolverId::One, SolverId::Two}, {2.5, 0, 0, 0});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].bound, "x1_b <= production_b + inv_b");
  EXPECT_DOUBLE_EQ(v[0].limit, 2.0);
  EXPECT_DOUBLE_EQ(v[0].actual, 2.5);

  EXPECT_TRUE(feasibility_check(p, s1(2.0), s2(2.0), {SolverId::Two, SolverId::One}, {}).empty());
  EXPECT_TRUE(feasibility_check(p, s1(2.0), s2(2.0), {SolverId::One, SolverId::One}, {3.0, 1.5, 0, 0}).empty());
}

TEST(Feasibility, LoserMustDeliverNothing) {
  MarketParams p = params();
  const auto v = feasibility_check(p, s1(2.0), s2(2.0), {SolverId::One, SolverId::One}, {1.0, 1.0, 0.1, 0});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].bound, "x2_b <= production_b + inv_b");
}

TEST(Feasibility, InventoryRaisesTheBound) {
  MarketParams p = params();
  SolverState a = s1(2.0);
  a.inv_b = 0.5;
  EXPECT_TRUE(feasibility_check(p, a, s2(2.0), {SolverId::One, SolverId::Two}, {2.5, 0, 0, 0}).empty());
}

TEST(Feasibility, FullCapacityBindsWithEquality) {
  MarketParams p = params();
  CounterRng rng(9, 2);
  const std::array<Matching, 4> ms{Matching{SolverId::One, SolverId::One}, Matching{SolverId::One, SolverId::Two},
                                   Matching{SolverId::Two, SolverId::One}, Matching{SolverId::Two, SolverId::Two}};
  for (int i = 0; i < 100; ++i) {
    const double beta = rng.uniform(1.0, 3.0), delta = rng.uniform(1.0, 3.0);
    for (const Matching& m : ms) {
      const Quantities q1 = production(p, s1(beta), m);
      const Quantities q2 = production(p, s2(delta), m);
      const Delivery d{q1.b, q1.d, q2.b, q2.d};
      EXPECT_TRUE(feasibility_check(p, s1(beta), s2(delta), m, d).empty());
      Delivery over = d;
      over.x1_b += 1e-6;
      over.x2_d += 1e-6;
      EXPECT_EQ(feasibility_check(p, s1(beta), s2(delta), m, over).size(), 2u);
    }
  }
}

TEST(Payoff, SpecExamples) {
  MarketParams p = params();
  EXPECT_DOUBLE_EQ(solver_payoff(p, s1(2.0), {SolverId::One, SolverId::One}, {1.5, 1.5, 0, 0}), 1.5);
  EXPECT_DOUBLE_EQ(solver_payoff(p, s1(2.0), {SolverId::Two, SolverId::Two}, {0, 0, 1.5, 1.5}), 0.0);
  MarketParams q = params();
  q.p_db = 2.0;
  // 1.5*1 - 1.5 + 2*(1.5*2 - 2)
  EXPECT_DOUBLE_EQ(solver_payoff(q, s2(2.0), {SolverId::Two, SolverId::Two}, {0, 0, 1.5, 2.0}), 2.0);
}

TEST(Payoff, RejectsInfeasibleDelivery) {
  MarketParams p = params();
  EXPECT_THROW(solver_payoff(p, s1(2.0), {SolverId::One, SolverId::Two}, {2.5, 0, 0, 0}), std::invalid_argument);
}

TEST(Payoff, DecreasingInOwnDelivery) {
  MarketParams p = params();
  CounterRng rng(5, 3);
  for (int i = 0; i < 300; ++i) {
    const double beta = rng.uniform(1.0, 3.0);
    const Matching m{SolverId::One, SolverId::One};
    const Quantities cap = production(p, s1(beta), m);
    const Delivery d{rng.uniform(0, cap.b), rng.uniform(0, cap.d), 0, 0};
    Delivery more_b = d, more_d = d;
    more_b.x1_b = rng.uniform(d.x1_b, cap.b);
    more_d.x1_d = rng.uniform(d.x1_d, cap.d);
    const double base = solver_payoff(p, s1(beta), m, d);
    EXPECT_LE(solver_payoff(p, s1(beta), m, more_b), base + 1e-12);
    EXPECT_LE(solver_payoff(p, s1(beta), m, more_d), base + 1e-12);
  }
}

TEST(TraderUtilities, Sums) {
  EXPECT_EQ(trader_utilities({1.5, 0, 0, 1.5}), std::make_pair(1.5, 1.5));
  EXPECT_EQ(trader_utilities({}), std::make_pair(0.0, 0.0));
  EXPECT_EQ(trader_utilities({0, 0, 1.0, 2.0}), std::make_pair(1.0, 2.0));
}

TEST(SolverState, Validation) {
  MarketParams p = params();
  EXPECT_NO_THROW(s1(2.0).validate(p));
  EXPECT_THROW(s1(3.5).validate(p), std::invalid_argument);
  SolverState bad = s1(2.0);
  bad.inv_d = 1.0;
  EXPECT_THROW(bad.validate(p), std::invalid_argument);
  SolverState bad2 = s2(2.0);
  bad2.inv_b = 1.0;
  EXPECT_THROW(bad2.validate(p), std::invalid_argument);
}

TEST(Alt, QuantitiesBracketStandard) {
  MarketParams p = params();
  p.beta_hi = 2.0;
  p.delta_hi = 2.0;
  p.ext = ExecutionExt{4.0, 0.5};
  for (double beta : {1.0, 1.5, 2.0}) {
    const Quantities alt = production(p, s1(beta), {SolverId::One, SolverId::One}, ExecutionChoice::Alt);
    EXPECT_GT(alt.b, p.g * p.beta_hi);
    EXPECT_LT(alt.d, p.delta_lo);
  }
}
