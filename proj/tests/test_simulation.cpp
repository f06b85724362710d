#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "intent_lab/simulation.hpp"

using namespace intent_lab;

namespace {

SimConfig baseline_config(int draws = 1000) {
  SimConfig c;
  c.dists = uniform_types(c.params);
  c.mechanisms = all_mechanisms();
  c.n_draws = draws;
  c.seed = 42;
  return c;
}

}  // namespace

TEST(MonteCarlo, ValidatesConfig) {
  SimConfig c = baseline_config();
  c.n_draws = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ParamError& e) {
    EXPECT_EQ(e.field(), "simulation.n_draws");
  }
  c = baseline_config();
  c.mechanisms.clear();
  EXPECT_THROW(c.validate(), ParamError);
  c = baseline_config();
  c.rebalance_share = 1.5;
  EXPECT_THROW(c.validate(), ParamError);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const SimConfig c = baseline_config(300);
  setenv("INTENT_LAB_THREADS", "1", 1);
  const std::string one = to_csv(run_monte_carlo(c).records);
  setenv("INTENT_LAB_THREADS", "4", 1);
  const std::string four = to_csv(run_monte_carlo(c).records);
  unsetenv("INTENT_LAB_THREADS");
  EXPECT_EQ(one, four);
  SimConfig other = c;
  other.seed = 43;
  EXPECT_NE(to_csv(run_monte_carlo(other).records), one);
}

TEST(MonteCarlo, DrawsAreUniformOnSupports) {
  const SimulationResult r = run_monte_carlo(baseline_config(4000));
  double mean_beta = 0, mean_delta = 0;
  for (const DrawRecord& d : r.records) {
    EXPECT_GE(d.beta, 1.0);
    EXPECT_LE(d.beta, 3.0);
    mean_beta += d.beta;
    mean_delta += d.delta;
  }
  mean_beta /= r.records.size();
  mean_delta /= r.records.size();
  // Standard error of the mean is about 0.009.
  EXPECT_NEAR(mean_beta, 2.0, 0.04);
  EXPECT_NEAR(mean_delta, 2.0, 0.04);
}

TEST(MonteCarlo, SummaryMatchesEquilibriumAnalytics) {
  const SimulationResult r = run_monte_carlo(baseline_config());
  const MechanismStats* sim = r.stats.find(MechanismKind::SimFirstPrice);
  ASSERT_NE(sim, nullptr);
  EXPECT_EQ(sim->draws, 1000);
  EXPECT_DOUBLE_EQ(sim->mean_u1, 1.0);
  EXPECT_DOUBLE_EQ(sim->min_u2, 1.0);

  const MechanismStats* fair = r.stats.find(MechanismKind::FairCombFirstPrice);
  ASSERT_NE(fair, nullptr);
  EXPECT_EQ(fair->failed, 0);
  EXPECT_GE(fair->min_u1, 1.5 - 1e-12);
  EXPECT_GE(fair->min_u2, 1.5 - 1e-12);
  EXPECT_EQ(fair->fairness_violation_rate_1, 0.0);
  ASSERT_TRUE(fair->regime_frequency);
  // Quadrant masses: (3/4)^2, (1/4)^2, 3/16, 3/16. Tolerance is about four standard errors.
  const auto& f = *fair->regime_frequency;
  EXPECT_NEAR(f[0], 0.5625, 0.065);
  EXPECT_NEAR(f[1], 0.0625, 0.035);
  EXPECT_NEAR(f[2], 0.1875, 0.05);
  EXPECT_NEAR(f[3], 0.1875, 0.05);
  EXPECT_NEAR(f[0] + f[1] + f[2] + f[3], 1.0, 1e-12);
  EXPECT_FALSE(r.stats.find(MechanismKind::BatchAuction)->regime_frequency);
}

TEST(MonteCarlo, BatchValueDominatesSimInEveryDraw) {
  const SimulationResult r = run_monte_carlo(baseline_config());
  const ComparisonTable t = compare_mechanisms(r.records);
  ASSERT_TRUE(t.batch_dominates_sim);
  EXPECT_DOUBLE_EQ(*t.batch_dominates_sim, 1.0);
  const PairComparison* pc = t.find(MechanismKind::BatchAuction, MechanismKind::SimFirstPrice);
  ASSERT_NE(pc, nullptr);
  EXPECT_GT(pc->mean_value_gap, 0.0);
  EXPECT_EQ(t.pairs.size(), 20u);

  SimConfig single = baseline_config(10);
  single.mechanisms = {MechanismKind::BatchAuction};
  EXPECT_THROW(compare_mechanisms(run_monte_carlo(single).records), std::invalid_argument);
}

TEST(MonteCarlo, RebalancedBatchKeepsTotals) {
  SimConfig c = baseline_config(200);
  c.mechanisms = {MechanismKind::BatchAuction};
  const SimulationResult a = run_monte_carlo(c);
  c.rebalance_share = 0.5;
  const SimulationResult b = run_monte_carlo(c);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_NEAR(a.records[i].results[0].outcome.total_value, b.records[i].results[0].outcome.total_value, 1e-12);
}

TEST(Export, CsvShape) {
  SimConfig c = baseline_config(5);
  c.mechanisms = {MechanismKind::SimFirstPrice, MechanismKind::FairCombFirstPrice};
  const std::string csv = to_csv(run_monte_carlo(c).records);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "draw,beta,delta,mechanism,regime,u1,u2,total_value,matching,converged");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find("\"{"), std::string::npos);
  }
  EXPECT_EQ(rows, 10);
}

TEST(Export, JsonRoundTripIsStable) {
  SimConfig c = baseline_config(50);
  const SimulationResult r = run_monte_carlo(c);
  const std::string j1 = to_json(r);
  const SimulationResult back = simulation_from_json(j1);
  EXPECT_EQ(to_json(back), j1);
  ASSERT_EQ(back.records.size(), r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_NEAR(back.records[i].beta, r.records[i].beta, 1e-11);
    for (std::size_t m = 0; m < r.records[i].results.size(); ++m) {
      EXPECT_EQ(back.records[i].results[m].outcome.matching, r.records[i].results[m].outcome.matching);
      EXPECT_NEAR(back.records[i].results[m].outcome.u1, r.records[i].results[m].outcome.u1, 1e-11);
    }
  }
}

TEST(Export, WriteFailureNamesPath) {
  const SimulationResult r = run_monte_carlo(baseline_config(2));
  try {
    export_results(r, ExportFormat::Csv, "/nonexistent-dir/x.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(Export, NumberFormatting) {
  EXPECT_EQ(format_number(1.5), "1.5");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_DOUBLE_EQ(round_significant(2.00000000000049), 2.0);
}
