#pragma once

#include <optional>
#include <string>

#include "intent_lab/equilibrium.hpp"

namespace intent_lab {

// ---- perfect financial markets ----

struct LimitPrices {
  double p_ba = 1.0;  // B received per unit of A sold by trader 1
  double p_dc = 1.0;  // D received per unit of C sold by trader 2

  void validate() const;
};

struct FrictionlessSummary {
  LimitPrices limits;
  double u1 = 0.0;
  double u2 = 0.0;
  bool limits_rule_out_unfair_batches = true;
};

FrictionlessSummary frictionless_equilibrium(const LimitPrices& limits);

// Batch auction where a batched bid is admissible only if it returns at least the limit prices.
// With no admissible batched bid the orders are settled by first-price individual auctions.
Outcome run_batch_with_limits(const MarketParams& params, const BidProfile& bids, const LimitPrices& limits,
                              const std::optional<TypeDraw>& types = std::nullopt,
                              const MechanismOptions& options = {});

// ---- execution choice ----

struct ExecutionThresholds {
  double solver1 = 0.0;        // below: alt beats standard for every solver-1 type
  double solver2 = 0.0;        // below: alt beats standard for every solver-2 type
  double combined = 0.0;       // below: alt beats standard for both solvers
  double solver1_upper = 0.0;  // above: standard beats alt for every solver-1 type
  double solver2_upper = 0.0;
  double standard_above = 0.0; // above: standard beats alt for both solvers
};

ExecutionThresholds execution_thresholds(const MarketParams& params);

enum class ExecutionRegime { AltDominates, Mixed, StandardDominates };
std::string to_string(ExecutionRegime r);

struct ExecutionChoiceResult {
  EquilibriumResult equilibrium;
  ExecutionRegime regime = ExecutionRegime::StandardDominates;
  ExecutionThresholds thresholds;
  double p_db = 0.0;
  bool unfair = false;          // trader 2 gets less than delta_lo in every draw
  bool interpretation = false;  // mixed region solved with the standard technology only
};

// `p_db` replaces params.p_db. Requires params.ext.
ExecutionChoiceResult batch_equilibrium_with_execution_choice(const MarketParams& params,
                                                              const TypeDistributions& dists, double p_db,
                                                              const EquilibriumOptions& options = {});

struct FairExecutionResult {
  EquilibriumResult equilibrium;
  bool alt_bids_disqualified = false;  // alt batched bid is unfair against the emitted individual bids
  FairnessFlags alt_fairness;          // fairness of each solver's alt bid swapped into the profile
};

FairExecutionResult fair_fp_with_execution_choice(const MarketParams& params, double beta, double delta,
                                                  const TypeDistributions& dists,
                                                  const EquilibriumOptions& options = {});

}  // namespace intent_lab
