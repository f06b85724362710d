#pragma once

#include <functional>
#include <vector>

#include "intent_lab/distributions.hpp"
#include "intent_lab/mechanisms.hpp"

namespace intent_lab {

// A solver's bidding rule as a function of its private type.
struct Strategy {
  SolverId solver = SolverId::One;
  TypeDistribution dist;
  std::function<SolverBid(double)> policy;
  std::vector<double> breakpoints;  // interior types where the rule may jump
  std::vector<double> grid;         // type gridpoints used for certification and export

  SolverBid operator()(double type) const { return policy(type); }

  struct Table {
    std::vector<double> types;
    std::vector<SolverBid> bids;
  };
  Table tabulate() const;

  // Piecewise-linear interpolant of the rule on an n-point grid (breakpoints kept as nodes, with
  // the jump preserved).
  Strategy discretized(int n) const;

  static Strategy constant(SolverId solver, const TypeDistribution& dist, const SolverBid& bid, int grid_points);
};

std::vector<double> uniform_grid(double lo, double hi, int n);

}  // namespace intent_lab
