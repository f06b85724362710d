#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "intent_lab/market_model.hpp"

namespace intent_lab {

enum class MechanismKind { SimFirstPrice, SimSecondPrice, BatchAuction, FairCombFirstPrice, FairCombSecondPrice };

std::string to_string(MechanismKind kind);
std::optional<MechanismKind> parse_mechanism(const std::string& name);
const std::vector<MechanismKind>& all_mechanisms();
bool is_fair_combinatorial(MechanismKind kind);

// Who wins an order-level tie between equal individual bids.
enum class SimTieRule {
  StrongSolver,  // solver 1 on order 1, solver 2 on order 2
  LowerId,
};

struct MechanismOptions {
  SimTieRule sim_tie = SimTieRule::StrongSolver;
};

// One solver's part of the message: two individual bids and a batched bid.
struct SolverBid {
  double q_b = 0.0;
  double q_d = 0.0;
  double Q_b = 0.0;
  double Q_d = 0.0;
  ExecutionChoice exec = ExecutionChoice::Standard;  // execution committed with the batched bid

  bool operator==(const SolverBid&) const = default;
};

struct BidProfile {
  SolverBid s1;
  SolverBid s2;

  const SolverBid& of(SolverId id) const { return id == SolverId::One ? s1 : s2; }
  SolverBid& of(SolverId id) { return id == SolverId::One ? s1 : s2; }
  bool operator==(const BidProfile&) const = default;
};

enum class DeterminedBy { IndividualBids, BatchedBids };

struct TypeDraw {
  double beta = 0.0;
  double delta = 0.0;
};

// Result of the allocation and payment rule, before payoffs are attached.
struct Settlement {
  Matching matching;
  Delivery delivery;
  DeterminedBy branch = DeterminedBy::IndividualBids;
  ExecutionChoice exec1 = ExecutionChoice::Standard;
  ExecutionChoice exec2 = ExecutionChoice::Standard;
  // Discrete label of the rule path taken (matching, branch, price source). Equal labels mean the
  // same allocation formula; used to locate outcome switches along an opponent's type.
  std::uint32_t path = 0;

  ExecutionChoice exec_of(SolverId id) const { return id == SolverId::One ? exec1 : exec2; }
};

Settlement settle(MechanismKind kind, const MarketParams& params, const BidProfile& bids,
                  const MechanismOptions& options = {});

// Attaches utilities, payoffs (when types are given) and capacity violations.
Outcome make_outcome(const MarketParams& params, const Settlement& s, const std::optional<TypeDraw>& types);

Outcome run_mechanism(MechanismKind kind, const MarketParams& params, const BidProfile& bids,
                      const std::optional<TypeDraw>& types = std::nullopt, const MechanismOptions& options = {});

Outcome run_sim_first_price(const MarketParams& params, const BidProfile& bids,
                            const std::optional<TypeDraw>& types = std::nullopt,
                            const MechanismOptions& options = {});
Outcome run_sim_second_price(const MarketParams& params, const BidProfile& bids,
                             const std::optional<TypeDraw>& types = std::nullopt,
                             const MechanismOptions& options = {});
Outcome run_batch(const MarketParams& params, const BidProfile& bids,
                  const std::optional<TypeDraw>& types = std::nullopt);
Outcome run_fair_comb_second_price(const MarketParams& params, const BidProfile& bids,
                                   const std::optional<TypeDraw>& types = std::nullopt,
                                   const MechanismOptions& options = {});
Outcome run_fair_comb_first_price(const MarketParams& params, const BidProfile& bids,
                                  const std::optional<TypeDraw>& types = std::nullopt,
                                  const MechanismOptions& options = {});

// Defined for the two fair combinatorial kinds only; throws std::invalid_argument otherwise.
DeterminedBy determined_by(const MarketParams& params, MechanismKind kind, const BidProfile& bids,
                           const MechanismOptions& options = {});

// Fairness of each batched bid under the first-price legs rule (own ties weak, opponent ties strict).
struct FairnessFlags {
  bool solver1 = false;
  bool solver2 = false;
};
FairnessFlags first_price_fairness(const BidProfile& bids);
// Second-price legs: a batched bid clears when it reaches the lower individual bid on both orders.
FairnessFlags second_price_clearance(const BidProfile& bids);

// ---- feasibility probe ----

using MechanismFn = std::function<Settlement(const MarketParams&, const BidProfile&)>;

struct FeasibilityProbeResult {
  bool ok = false;
  SolverBid witness;                          // the probed non-trivial bid
  std::optional<BidProfile> counterexample;   // opponent profile producing an infeasible payment
  std::vector<Violation> violations;
  std::string note;
};

FeasibilityProbeResult mechanism_feasibility_probe(const MarketParams& params, MechanismKind kind,
                                                   const SolverState& solver, int n_samples, std::uint64_t seed);
FeasibilityProbeResult mechanism_feasibility_probe(const MarketParams& params, const MechanismFn& mechanism,
                                                   const SolverState& solver, int n_samples, std::uint64_t seed);

}  // namespace intent_lab
