#include "intent_lab/mechanisms.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "intent_lab/rng.hpp"

namespace intent_lab {

namespace {

constexpr std::uint32_t kCaseShift = 3;
enum Case : std::uint32_t {
  kSimultaneous = 0,
  kBatchAuction = 1,
  kFairBoth = 2,
  kFairOne = 3,
  kFairNone = 4,
};

std::uint32_t path_label(const Matching& m, DeterminedBy branch, Case c, ExecutionChoice e1, ExecutionChoice e2) {
  std::uint32_t v = 0;
  v |= (m.order1_winner == SolverId::Two) ? 1u : 0u;
  v |= (m.order2_winner == SolverId::Two) ? 2u : 0u;
  v |= (branch == DeterminedBy::BatchedBids) ? 4u : 0u;
  v |= static_cast<std::uint32_t>(c) << kCaseShift;
  v |= (e1 == ExecutionChoice::Alt ? 1u : 0u) << 7;
  v |= (e2 == ExecutionChoice::Alt ? 1u : 0u) << 8;
  return v;
}

SolverId order_winner(double bid1, double bid2, int order, SimTieRule tie) {
  if (bid1 > bid2) return SolverId::One;
  if (bid2 > bid1) return SolverId::Two;
  if (tie == SimTieRule::LowerId) return SolverId::One;
  return order == 1 ? SolverId::One : SolverId::Two;
}

// Per-order auctions on individual bids. second_price: the winner delivers the lower bid.
Settlement simultaneous(const BidProfile& b, bool second_price, SimTieRule tie, Case c) {
  Settlement s;
  s.matching.order1_winner = order_winner(b.s1.q_b, b.s2.q_b, 1, tie);
  s.matching.order2_winner = order_winner(b.s1.q_d, b.s2.q_d, 2, tie);
  const double price_b = second_price ? std::min(b.s1.q_b, b.s2.q_b) : b.of(s.matching.order1_winner).q_b;
  const double price_d = second_price ? std::min(b.s1.q_d, b.s2.q_d) : b.of(s.matching.order2_winner).q_d;
  if (s.matching.order1_winner == SolverId::One)
    s.delivery.x1_b = price_b;
  else
    s.delivery.x2_b = price_b;
  if (s.matching.order2_winner == SolverId::One)
    s.delivery.x1_d = price_d;
  else
    s.delivery.x2_d = price_d;
  s.branch = DeterminedBy::IndividualBids;
  s.path = path_label(s.matching, s.branch, c, s.exec1, s.exec2);
  return s;
}

Settlement batched_win(const BidProfile& b, SolverId w, Case c) {
  Settlement s;
  s.matching = {w, w};
  const SolverBid& bid = b.of(w);
  if (w == SolverId::One) {
    s.delivery.x1_b = bid.Q_b;
    s.delivery.x1_d = bid.Q_d;
    s.exec1 = bid.exec;
  } else {
    s.delivery.x2_b = bid.Q_b;
    s.delivery.x2_d = bid.Q_d;
    s.exec2 = bid.exec;
  }
  s.branch = DeterminedBy::BatchedBids;
  s.path = path_label(s.matching, s.branch, c, s.exec1, s.exec2);
  return s;
}

SolverId value_winner(const MarketParams& p, const BidProfile& b) {
  const double v1 = b.s1.Q_b + p.p_db * b.s1.Q_d;
  const double v2 = b.s2.Q_b + p.p_db * b.s2.Q_d;
  return v2 > v1 ? SolverId::Two : SolverId::One;
}

// Weak inequality when the solver holds the best individual bid on the order (ties included),
// strict inequality otherwise.
bool fair_on_order(double own_batched, double own_individual, double other_individual) {
  const double best = std::max(own_individual, other_individual);
  const bool holds_best = own_individual >= other_individual;
  return holds_best ? own_batched >= best : own_batched > best;
}

}  // namespace

FairnessFlags first_price_fairness(const BidProfile& b) {
  FairnessFlags f;
  f.solver1 = fair_on_order(b.s1.Q_b, b.s1.q_b, b.s2.q_b) && fair_on_order(b.s1.Q_d, b.s1.q_d, b.s2.q_d);
  f.solver2 = fair_on_order(b.s2.Q_b, b.s2.q_b, b.s1.q_b) && fair_on_order(b.s2.Q_d, b.s2.q_d, b.s1.q_d);
  return f;
}

FairnessFlags second_price_clearance(const BidProfile& b) {
  const double min_b = std::min(b.s1.q_b, b.s2.q_b);
  const double min_d = std::min(b.s1.q_d, b.s2.q_d);
  return {b.s1.Q_b >= min_b && b.s1.Q_d >= min_d, b.s2.Q_b >= min_b && b.s2.Q_d >= min_d};
}

Settlement settle(MechanismKind kind, const MarketParams& params, const BidProfile& b,
                  const MechanismOptions& options) {
  switch (kind) {
    case MechanismKind::SimFirstPrice:
      return simultaneous(b, false, options.sim_tie, kSimultaneous);
    case MechanismKind::SimSecondPrice:
      return simultaneous(b, true, options.sim_tie, kSimultaneous);
    case MechanismKind::BatchAuction:
      return batched_win(b, value_winner(params, b), kBatchAuction);
    case MechanismKind::FairCombSecondPrice: {
      const FairnessFlags c = second_price_clearance(b);
      if (c.solver1 && c.solver2) return batched_win(b, value_winner(params, b), kFairBoth);
      if (c.solver1) return batched_win(b, SolverId::One, kFairOne);
      if (c.solver2) return batched_win(b, SolverId::Two, kFairOne);
      return simultaneous(b, true, options.sim_tie, kFairNone);
    }
    case MechanismKind::FairCombFirstPrice: {
      const FairnessFlags f = first_price_fairness(b);
      if (f.solver1 && f.solver2) return batched_win(b, value_winner(params, b), kFairBoth);
      if (f.solver1) return batched_win(b, SolverId::One, kFairOne);
      if (f.solver2) return batched_win(b, SolverId::Two, kFairOne);
      return simultaneous(b, false, options.sim_tie, kFairNone);
    }
  }
  throw std::invalid_argument("unknown mechanism kind");
}

Outcome make_outcome(const MarketParams& params, const Settlement& s, const std::optional<TypeDraw>& types) {
  Outcome o;
  o.matching = s.matching;
  o.delivery = s.delivery;
  std::tie(o.u1, o.u2) = trader_utilities(s.delivery);
  o.total_value = o.u1 + params.p_db * o.u2;
  if (types) {
    const SolverState s1{SolverId::One, types->beta, 0.0, 0.0};
    const SolverState s2{SolverId::Two, types->delta, 0.0, 0.0};
    o.violations = feasibility_check(params, s1, s2, s.matching, s.delivery, s.exec1, s.exec2);
    o.payoff1 = payoff_unchecked(params, SolverId::One, types->beta, s.matching, s.delivery, s.exec1);
    o.payoff2 = payoff_unchecked(params, SolverId::Two, types->delta, s.matching, s.delivery, s.exec2);
  }
  return o;
}

Outcome run_mechanism(MechanismKind kind, const MarketParams& params, const BidProfile& bids,
                      const std::optional<TypeDraw>& types, const MechanismOptions& options) {
  return make_outcome(params, settle(kind, params, bids, options), types);
}

Outcome run_sim_first_price(const MarketParams& p, const BidProfile& b, const std::optional<TypeDraw>& t,
                            const MechanismOptions& o) {
  return run_mechanism(MechanismKind::SimFirstPrice, p, b, t, o);
}
Outcome run_sim_second_price(const MarketParams& p, const BidProfile& b, const std::optional<TypeDraw>& t,
                             const MechanismOptions& o) {
  return run_mechanism(MechanismKind::SimSecondPrice, p, b, t, o);
}
Outcome run_batch(const MarketParams& p, const BidProfile& b, const std::optional<TypeDraw>& t) {
  return run_mechanism(MechanismKind::BatchAuction, p, b, t);
}
Outcome run_fair_comb_second_price(const MarketParams& p, const BidProfile& b, const std::optional<TypeDraw>& t,
                                   const MechanismOptions& o) {
  return run_mechanism(MechanismKind::FairCombSecondPrice, p, b, t, o);
}
Outcome run_fair_comb_first_price(const MarketParams& p, const BidProfile& b, const std::optional<TypeDraw>& t,
                                  const MechanismOptions& o) {
  return run_mechanism(MechanismKind::FairCombFirstPrice, p, b, t, o);
}

// In the branch that ignores batched bids, every batched bid already fails the filter. Fairness and
// clearance are monotone in a solver's own batched components, so lowering them keeps failing and
// the matching stays put. In the other branches the winner is chosen through a batched bid, and
// lowering that bid can flip it.
DeterminedBy determined_by(const MarketParams& params, MechanismKind kind, const BidProfile& bids,
                           const MechanismOptions& options) {
  if (!is_fair_combinatorial(kind))
    throw std::invalid_argument("determined_by is defined for fair combinatorial mechanisms only");
  return settle(kind, params, bids, options).branch;
}

std::string to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::SimFirstPrice: return "SimFirstPrice";
    case MechanismKind::SimSecondPrice: return "SimSecondPrice";
    case MechanismKind::BatchAuction: return "BatchAuction";
    case MechanismKind::FairCombFirstPrice: return "FairCombFirstPrice";
    case MechanismKind::FairCombSecondPrice: return "FairCombSecondPrice";
  }
  return "?";
}

const std::vector<MechanismKind>& all_mechanisms() {
  static const std::vector<MechanismKind> all{MechanismKind::SimFirstPrice, MechanismKind::SimSecondPrice,
                                              MechanismKind::BatchAuction, MechanismKind::FairCombFirstPrice,
                                              MechanismKind::FairCombSecondPrice};
  return all;
}

std::optional<MechanismKind> parse_mechanism(const std::string& name) {
  for (MechanismKind k : all_mechanisms())
    if (to_string(k) == name) return k;
  return std::nullopt;
}

bool is_fair_combinatorial(MechanismKind kind) {
  return kind == MechanismKind::FairCombFirstPrice || kind == MechanismKind::FairCombSecondPrice;
}

// ---- feasibility probe ----

namespace {

SolverBid capacity_of(const MarketParams& p, const SolverState& s) {
  if (s.id == SolverId::One) return {s.productivity, p.delta_lo, p.g * s.productivity, p.g * p.delta_lo};
  return {p.beta_lo, s.productivity, p.g * p.beta_lo, p.g * s.productivity};
}

}  // namespace

FeasibilityProbeResult mechanism_feasibility_probe(const MarketParams& params, const MechanismFn& mechanism,
                                                   const SolverState& solver, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  FeasibilityProbeResult r;
  constexpr double eps = 1e-3;
  const SolverBid cap = capacity_of(params, solver);
  const std::array<double, 4> floor{params.beta_lo, params.delta_lo, params.beta_lo, params.delta_lo};
  const std::array<double, 4> caps{cap.q_b, cap.q_d, cap.Q_b, cap.Q_d};
  std::array<double, 4> w{};
  bool strict = false;
  for (int i = 0; i < 4; ++i) {
    w[i] = std::min(floor[i] * (1.0 + eps), caps[i]);
    if (w[i] < floor[i] - kTol) {
      r.note = "no bid at or above the floor fits the solver's capacity";
      return r;
    }
    strict = strict || w[i] > floor[i] + kTol;
  }
  if (!strict) {
    r.note = "capacity equals the floor on every component; no bid strictly above it exists";
    return r;
  }
  r.witness = {w[0], w[1], w[2], w[3], ExecutionChoice::Standard};

  const double scale = 2.0 * std::max({params.beta_hi, params.delta_hi}) * params.g *
                       (params.ext ? std::max(1.0, params.ext->k) : 1.0);
  std::vector<SolverBid> opponents{
      {0, 0, 0, 0},
      {w[0], w[1], w[2], w[3]},
      {scale, scale, scale, scale},
      {scale, 0, 0, scale},
      {0, scale, scale, 0},
  };
  CounterRng rng(seed, 0x9e11);
  for (int i = 0; i < n_samples; ++i)
    opponents.push_back({rng.uniform(0, scale), rng.uniform(0, scale), rng.uniform(0, scale), rng.uniform(0, scale)});

  const SolverId id = solver.id;
  const SolverState at_zero{id, solver.productivity, 0.0, 0.0};
  for (const SolverBid& opp : opponents) {
    BidProfile profile;
    profile.of(id) = r.witness;
    profile.of(other(id)) = opp;
    const Settlement s = mechanism(params, profile);
    const ExecutionChoice e = s.exec_of(id);
    const Quantities prod = production_unchecked(params, id, at_zero.productivity, s.matching, e);
    const double xb = s.delivery.b_of(id);
    const double xd = s.delivery.d_of(id);
    std::vector<Violation> v;
    const std::string tag = to_string(id);
    if (xb > prod.b + kTol) v.push_back({"x" + tag + "_b <= production_b", prod.b, xb});
    if (xd > prod.d + kTol) v.push_back({"x" + tag + "_d <= production_d", prod.d, xd});
    if (!v.empty()) {
      r.ok = false;
      r.counterexample = profile;
      r.violations = std::move(v);
      r.note = "payment rule asks for more than the matching lets the solver produce";
      return r;
    }
  }
  r.ok = true;
  return r;
}

FeasibilityProbeResult mechanism_feasibility_probe(const MarketParams& params, MechanismKind kind,
                                                   const SolverState& solver, int n_samples, std::uint64_t seed) {
  return mechanism_feasibility_probe(
      params, [kind](const MarketParams& p, const BidProfile& b) { return settle(kind, p, b); }, solver, n_samples,
      seed);
}

}  // namespace intent_lab
