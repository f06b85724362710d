#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "intent_lab/distributions.hpp"
#include "intent_lab/fpa.hpp"
#include "intent_lab/mechanisms.hpp"
#include "intent_lab/strategy.hpp"
#include "intent_lab/verifier.hpp"

namespace intent_lab {

struct TypeDistributions {
  TypeDistribution beta;
  TypeDistribution delta;
};

// Uniform laws on the parameter bounds.
TypeDistributions uniform_types(const MarketParams& params);

enum class Regime { Specialization, CompetitiveBatching, UncompetitiveBatchingSolver1, UncompetitiveBatchingSolver2 };

std::string to_string(Regime r);
std::optional<Regime> parse_regime(const std::string& name);

// Quadrant rule on (beta vs g*beta_lo, delta vs g*delta_lo); the boundary belongs to the upper side.
Regime classify_regime(const MarketParams& params, double beta, double delta);

struct EquilibriumOptions {
  FpaOptions fpa;
  std::optional<VerifyOptions> certify;  // run verify_epsilon_nash when set
  double epsilon = 1e-3;
  int strategy_grid = 50;                // type gridpoints stored in each Strategy
};

struct EquilibriumResult {
  MechanismKind mechanism = MechanismKind::SimFirstPrice;
  std::array<Strategy, 2> strategies;
  std::optional<Regime> regime;          // pointwise results only
  std::optional<TypeDraw> types;
  std::optional<BidProfile> profile;
  std::optional<Outcome> outcome;
  std::optional<NashCertificate> certificate;
  std::optional<FpaSolution> transformed_solution;

  BidProfile profile_at(double beta, double delta) const;
  Outcome outcome_at(const MarketParams& params, double beta, double delta, const MechanismOptions& options = {}) const;
};

EquilibriumResult sim_equilibrium(const MarketParams& params, const TypeDistributions& dists,
                                  MechanismKind kind = MechanismKind::SimFirstPrice,
                                  const EquilibriumOptions& options = {});

// Variables of the batch auction's reduction: x = g*beta - V for solver 1, y = p_db*g*delta for solver 2.
double batch_offset(const MarketParams& params);
TypeDistribution transformed_beta(const MarketParams& params, const TypeDistribution& beta);
TypeDistribution transformed_delta(const MarketParams& params, const TypeDistribution& delta);

// Throws FpaConvergenceError when the transformed auction does not converge.
EquilibriumResult batch_equilibrium(const MarketParams& params, const TypeDistributions& dists,
                                    const EquilibriumOptions& options = {});

// Same bid values as `canonical`, with a share `b_share` of each value placed on asset B (clamped to
// capacity). Still an equilibrium of the batch auction.
EquilibriumResult batch_rebalanced(const MarketParams& params, const EquilibriumResult& canonical, double b_share,
                                   const EquilibriumOptions& options = {});

// Full type-contingent strategies of the fair combinatorial auction with first-price legs.
EquilibriumResult fair_fp_strategies(const MarketParams& params, const TypeDistributions& dists,
                                     const EquilibriumOptions& options = {});

// Pointwise equilibrium at (beta, delta). The overload reuses precomputed strategies.
EquilibriumResult fair_fp_equilibrium(const MarketParams& params, double beta, double delta,
                                      const TypeDistributions& dists, const EquilibriumOptions& options = {});
EquilibriumResult fair_fp_equilibrium(const MarketParams& params, double beta, double delta,
                                      const EquilibriumResult& strategies, const EquilibriumOptions& options = {});

struct RegimePayoffs {
  double x1 = 0.0;  // solver 1 kicks solver 2's batch out: q1_b = Q1_b = g*beta_lo
  double y1 = 0.0;  // solver 1 competes with its best batched bid against the weak-side rival
  double x2 = 0.0;
  double y2 = 0.0;
  bool x1_feasible = false;  // kicking out needs beta >= g*beta_lo
  bool x2_feasible = false;
};

RegimePayoffs regime_payoffs(const MarketParams& params, const EquilibriumResult& fair_fp, double beta, double delta);

// Canonical batch equilibrium with every individual bid at zero, run under fair-SP.
EquilibriumResult fair_sp_equilibrium_witness(const MarketParams& params, const TypeDistributions& dists,
                                              const EquilibriumOptions& options = {});

// ---- sequential auction ----

struct FirstStageStrategy {
  SolverId solver = SolverId::One;
  std::vector<double> types;   // strictly increasing type grid
  std::vector<double> bid_b;   // first-stage individual bid on order 1 per type
  std::vector<double> bid_d;   // first-stage individual bid on order 2 per type
};

enum class SequentialVerdict { Pass, Counterexample, InfeasibleRevealing };
std::string to_string(SequentialVerdict v);

struct SequentialCheckResult {
  SequentialVerdict verdict = SequentialVerdict::Pass;
  double type = 0.0;                 // offending type (counterexample / infeasible)
  double payoff_revealing = 0.0;     // expected payoff when following the first-stage strategy
  double payoff_deviation = 0.0;     // expected payoff after the deviation
  double gain = 0.0;
  double deviation_b = 0.0;          // deviating first-stage bid
  double deviation_d = 0.0;
  bool stage_two_matches_batch = false;
  long profiles_compared = 0;
  long deviations_checked = 0;
  std::string detail;
};

// `grid` is the number of points per searched dimension (>= 2).
SequentialCheckResult sequential_deviation_check(const MarketParams& params, const TypeDistributions& dists,
                                                 const FirstStageStrategy& first_stage, int grid,
                                                 const EquilibriumOptions& options = {});

}  // namespace intent_lab
