#include "intent_lab/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intent_lab {

void LimitPrices::validate() const {
  if (!(p_ba > 0.0) || !std::isfinite(p_ba)) throw ParamError("p_ba", "must be strictly positive");
  if (!(p_dc > 0.0) || !std::isfinite(p_dc)) throw ParamError("p_dc", "must be strictly positive");
}

FrictionlessSummary frictionless_equilibrium(const LimitPrices& limits) {
  limits.validate();
  FrictionlessSummary s;
  s.limits = limits;
  s.u1 = limits.p_ba;
  s.u2 = limits.p_dc;
  return s;
}

Outcome run_batch_with_limits(const MarketParams& params, const BidProfile& bids, const LimitPrices& limits,
                              const std::optional<TypeDraw>& types, const MechanismOptions& options) {
  limits.validate();
  auto admissible = [&](const SolverBid& b) { return b.Q_b >= limits.p_ba && b.Q_d >= limits.p_dc; };
  const bool a1 = admissible(bids.s1);
  const bool a2 = admissible(bids.s2);
  if (!a1 && !a2) return run_sim_first_price(params, bids, types, options);
  BidProfile masked = bids;
  if (!a1) masked.s1.Q_b = masked.s1.Q_d = 0.0;
  if (!a2) masked.s2.Q_b = masked.s2.Q_d = 0.0;
  return run_batch(params, masked, types);
}

ExecutionThresholds execution_thresholds(const MarketParams& p) {
  if (!p.ext) throw ParamError("extension", "execution choice needs the extension parameters");
  const double k = p.ext->k, tau = p.ext->tau;
  const double alt_b = k * p.beta_lo, alt_d = tau * p.delta_lo;
  ExecutionThresholds t;
  // alt_b + x*alt_d = standard_b + x*standard_d, solved for x.
  t.solver1 = (alt_b - p.g * p.beta_hi) / (p.g * p.delta_lo - alt_d);
  t.solver2 = (alt_b - p.g * p.beta_lo) / (p.g * p.delta_hi - alt_d);
  t.combined = std::min(t.solver1, t.solver2);
  t.solver1_upper = (alt_b - p.g * p.beta_lo) / (p.g * p.delta_lo - alt_d);
  t.solver2_upper = t.solver1_upper;
  t.standard_above = std::max(t.solver1_upper, t.solver2_upper);
  return t;
}

std::string to_string(ExecutionRegime r) {
  switch (r) {
    case ExecutionRegime::AltDominates: return "AltDominates";
    case ExecutionRegime::Mixed: return "Mixed";
    case ExecutionRegime::StandardDominates: return "StandardDominates";
  }
  return "?";
}

ExecutionChoiceResult batch_equilibrium_with_execution_choice(const MarketParams& params,
                                                              const TypeDistributions& dists, double p_db,
                                                              const EquilibriumOptions& options) {
  MarketParams p = params;
  p.p_db = p_db;
  p.validate();
  if (!p.ext) throw ParamError("extension", "execution choice needs the extension parameters");
  ExecutionChoiceResult out;
  out.p_db = p_db;
  out.thresholds = execution_thresholds(p);
  if (p_db < out.thresholds.combined) {
    // Both solvers share the same alt production, so Bertrand competition hands it all to the traders.
    out.regime = ExecutionRegime::AltDominates;
    const SolverBid alt{0.0, 0.0, p.ext->k * p.beta_lo, p.ext->tau * p.delta_lo, ExecutionChoice::Alt};
    EquilibriumResult& r = out.equilibrium;
    r.mechanism = MechanismKind::BatchAuction;
    r.strategies[0] = Strategy::constant(SolverId::One, dists.beta, alt, options.strategy_grid);
    r.strategies[1] = Strategy::constant(SolverId::Two, dists.delta, alt, options.strategy_grid);
    if (options.certify)
      r.certificate = verify_epsilon_nash(p, r.mechanism, r.strategies, options.epsilon, *options.certify);
    out.unfair = alt.Q_d < p.delta_lo;
    return out;
  }
  out.regime = p_db > out.thresholds.standard_above ? ExecutionRegime::StandardDominates : ExecutionRegime::Mixed;
  out.interpretation = out.regime == ExecutionRegime::Mixed;
  out.equilibrium = batch_equilibrium(p, dists, options);
  return out;
}

FairExecutionResult fair_fp_with_execution_choice(const MarketParams& params, double beta, double delta,
                                                  const TypeDistributions& dists,
                                                  const EquilibriumOptions& options) {
  if (!params.ext) throw ParamError("extension", "execution choice needs the extension parameters");
  FairExecutionResult out;
  out.equilibrium = fair_fp_equilibrium(params, beta, delta, dists, options);
  const BidProfile eq = *out.equilibrium.profile;
  for (SolverId id : {SolverId::One, SolverId::Two}) {
    BidProfile swapped = eq;
    SolverBid& b = swapped.of(id);
    b.Q_b = params.ext->k * params.beta_lo;
    b.Q_d = params.ext->tau * params.delta_lo;
    b.exec = ExecutionChoice::Alt;
    const FairnessFlags f = first_price_fairness(swapped);
    (id == SolverId::One ? out.alt_fairness.solver1 : out.alt_fairness.solver2) =
        id == SolverId::One ? f.solver1 : f.solver2;
  }
  out.alt_bids_disqualified = !out.alt_fairness.solver1 && !out.alt_fairness.solver2;
  return out;
}

}  // namespace intent_lab
