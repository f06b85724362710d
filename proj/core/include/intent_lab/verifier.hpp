#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "intent_lab/mechanisms.hpp"
#include "intent_lab/strategy.hpp"

namespace intent_lab {

struct VerifyOptions {
  int bid_resolution = 50;       // grid points per searched bid component (>= 50)
  int type_points = 0;           // own-type points per solver; 0 uses each strategy's grid
  std::vector<double> types1;    // explicit own-type points for solver 1 (override)
  std::vector<double> types2;    // explicit own-type points for solver 2 (override)
  int quadrature_nodes = 256;    // nodes per opponent strategy segment (multiple of 4)
  MechanismOptions mechanism;
};

struct Deviation {
  SolverId solver = SolverId::One;
  double type = 0.0;
  SolverBid bid;
  double payoff_equilibrium = 0.0;
  double payoff_deviation = 0.0;
  double gain = 0.0;
};

struct NashCertificate {
  double epsilon = 1e-3;
  double max_gain = 0.0;  // largest gain found, floored at 0
  std::optional<Deviation> worst;
  bool passed = false;
  long deviations_checked = 0;
  int type_points_checked = 0;
};

// Capacity box a solver of the given type can use when deviating. Components the mechanism does
// not read are pinned to `pinned`.
struct DeviationBox {
  std::array<double, 4> hi{};       // upper end per component (q_b, q_d, Q_b, Q_d)
  std::array<int, 4> points{};      // 1 means pinned
  std::array<double, 4> pinned{};
  ExecutionChoice exec = ExecutionChoice::Standard;
};

std::vector<DeviationBox> deviation_boxes(const MarketParams& params, MechanismKind kind, SolverId solver,
                                          double type, const SolverBid& equilibrium_bid, int resolution);

// Expected payoff of `solver` with own type `type` bidding `bid` against the opponent's strategy.
double expected_payoff(const MarketParams& params, MechanismKind kind, const Strategy& opponent, SolverId solver,
                       double type, const SolverBid& bid, const VerifyOptions& options = {});

NashCertificate verify_epsilon_nash(const MarketParams& params, MechanismKind kind,
                                    const std::array<Strategy, 2>& strategies, double epsilon = 1e-3,
                                    const VerifyOptions& options = {});

std::string describe(const Deviation& d);

}  // namespace intent_lab
