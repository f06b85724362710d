#include <gtest/gtest.h>

#include "intent_lab/extensions.hpp"
#include "intent_lab/rng.hpp"

using namespace intent_lab;

namespace {

MarketParams with_extension(double p_db = 0.1) {
  MarketParams p;
  p.beta_hi = 2.0;
  p.delta_hi = 2.0;
  p.p_db = p_db;
  p.ext = ExecutionExt{4.0, 0.5};
  return p;
}

}  // namespace

TEST(Limits, FrictionlessUtilitiesEqualLimits) {
  const FrictionlessSummary s = frictionless_equilibrium({1.3, 1.7});
  EXPECT_DOUBLE_EQ(s.u1, 1.3);
  EXPECT_DOUBLE_EQ(s.u2, 1.7);
  EXPECT_TRUE(s.limits_rule_out_unfair_batches);
  EXPECT_THROW(frictionless_equilibrium({0.0, 1.0}), ParamError);
}

TEST(Limits, InadmissibleBatchedBidsAreIgnored) {
  const MarketParams p;
  const LimitPrices lim{1.5, 1.5};
  Outcome o = run_batch_with_limits(p, {{1, 0, 1.6, 1.2}, {0, 1, 1.5, 1.5}}, lim);
  EXPECT_EQ(o.matching, (Matching{SolverId::Two, SolverId::Two}));
  EXPECT_DOUBLE_EQ(o.u1, 1.5);
  o = run_batch_with_limits(p, {{1, 0, 1.6, 1.2}, {0, 1, 1.4, 1.5}}, lim);
  EXPECT_EQ(o.matching, (Matching{SolverId::One, SolverId::Two}));
  EXPECT_DOUBLE_EQ(o.u1, 1.0);
  EXPECT_DOUBLE_EQ(o.u2, 1.0);
}

TEST(Limits, ClearedBatchesMeetTheLimits) {
  const MarketParams p;
  const LimitPrices lim{1.2, 1.4};
  CounterRng rng(21, 0);
  for (int i = 0; i < 3000; ++i) {
    const BidProfile b{{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 3), rng.uniform(0, 3)},
                       {rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 3), rng.uniform(0, 3)}};
    const Outcome o = run_batch_with_limits(p, b, lim);
    const bool any_admissible = (b.s1.Q_b >= lim.p_ba && b.s1.Q_d >= lim.p_dc) ||
                                (b.s2.Q_b >= lim.p_ba && b.s2.Q_d >= lim.p_dc);
    if (any_admissible) {
      EXPECT_GE(o.u1, lim.p_ba);
      EXPECT_GE(o.u2, lim.p_dc);
    }
  }
}

TEST(ExecutionChoice, ThresholdsByHand) {
  const ExecutionThresholds t = execution_thresholds(with_extension());
  // alt = (4, 0.5); standard ranges over (1.5*beta, 1.5) and (1.5, 1.5*delta).
  EXPECT_DOUBLE_EQ(t.solver1, (4.0 - 3.0) / (1.5 - 0.5));
  EXPECT_DOUBLE_EQ(t.solver2, (4.0 - 1.5) / (3.0 - 0.5));
  EXPECT_DOUBLE_EQ(t.combined, 1.0);
  EXPECT_DOUBLE_EQ(t.solver1_upper, 2.5);
  EXPECT_DOUBLE_EQ(t.standard_above, 2.5);
  EXPECT_THROW(execution_thresholds(MarketParams{}), ParamError);
}

TEST(ExecutionChoice, AltDominatesBelowThreshold) {
  const MarketParams p = with_extension(0.1);
  EquilibriumOptions o;
  o.certify = VerifyOptions{};
  o.certify->type_points = 3;
  const ExecutionChoiceResult r = batch_equilibrium_with_execution_choice(p, uniform_types(p), 0.1, o);
  EXPECT_EQ(r.regime, ExecutionRegime::AltDominates);
  EXPECT_TRUE(r.unfair);
  MarketParams q = p;
  for (double beta : {1.0, 1.5, 2.0})
    for (double delta : {1.0, 2.0}) {
      const Outcome out = r.equilibrium.outcome_at(q, beta, delta);
      EXPECT_DOUBLE_EQ(out.u1, 4.0);
      EXPECT_DOUBLE_EQ(out.u2, 0.5);
      EXPECT_LT(out.u2, p.delta_lo);
      EXPECT_TRUE(out.violations.empty());
    }
  ASSERT_TRUE(r.equilibrium.certificate);
  EXPECT_TRUE(r.equilibrium.certificate->passed) << describe(*r.equilibrium.certificate->worst);
}

TEST(ExecutionChoice, StandardAndMixedRegions) {
  const MarketParams p = with_extension();
  ExecutionChoiceResult r = batch_equilibrium_with_execution_choice(p, uniform_types(p), 3.0);
  EXPECT_EQ(r.regime, ExecutionRegime::StandardDominates);
  EXPECT_FALSE(r.interpretation);
  EXPECT_FALSE(r.unfair);
  r = batch_equilibrium_with_execution_choice(p, uniform_types(p), 1.5);
  EXPECT_EQ(r.regime, ExecutionRegime::Mixed);
  EXPECT_TRUE(r.interpretation);
  EXPECT_THROW(batch_equilibrium_with_execution_choice(MarketParams{}, uniform_types(MarketParams{}), 0.1),
               ParamError);
}

TEST(ExecutionChoice, FairFirstPriceDisqualifiesAltBids) {
  const MarketParams p = with_extension();
  for (auto [beta, delta] : {std::pair{1.2, 1.2}, {1.8, 1.8}, {1.8, 1.2}, {1.2, 1.8}}) {
    const FairExecutionResult r = fair_fp_with_execution_choice(p, beta, delta, uniform_types(p));
    EXPECT_TRUE(r.alt_bids_disqualified) << beta << "," << delta;
    EXPECT_GE(r.equilibrium.outcome->u1, p.beta_lo);
    EXPECT_GE(r.equilibrium.outcome->u2, p.delta_lo);
  }
}

TEST(ExecutionChoice, FairFirstPriceCertifiesWithAltDeviationsAtWeakSolver2) {
  const MarketParams p = with_extension();
  EquilibriumOptions o;
  o.certify = VerifyOptions{};
  const FairExecutionResult r = fair_fp_with_execution_choice(p, 1.8, 1.2, uniform_types(p), o);
  ASSERT_TRUE(r.equilibrium.certificate);
  EXPECT_TRUE(r.equilibrium.certificate->passed) << describe(*r.equilibrium.certificate->worst);
}
