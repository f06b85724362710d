#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "intent_lab/distributions.hpp"

namespace intent_lab {

struct FpaOptions {
  int grid_size = 512;        // bid-grid cells; must be >= 64
  double tol = 1e-8;          // bracket width on the top bid and per-cell fixed-point tolerance
  int max_iterations = 10000; // cap on fixed-point iterations inside one cell
};

// Two-bidder first-price auction with independent private values on supports sharing a common
// lower endpoint. Stores the inverse bid functions on a shared bid grid.
struct FpaSolution {
  std::array<TypeDistribution, 2> supports;
  double lower = 0.0;    // common lower endpoint of both supports (and of the bid range)
  double max_bid = 0.0;  // common top bid
  std::vector<double> bid_grid;                   // increasing, bid_grid.front() == lower
  std::array<std::vector<double>, 2> inverse;     // value of each bidder behind each grid bid
  double V = 0.0;        // offset carried for the batch-auction change of variables
  bool converged = false;
  double residual = 0.0;  // final bracket width on the top bid
  double slope_defect = 0.0;  // |d inverse / d bid - 2| at the first interior node
  long iterations = 0;    // total per-cell fixed-point iterations
  std::string diagnostic;

  // Equilibrium bid of a bidder (0 or 1) with value `value`. Values above the support bid the
  // top bid; values at or below the lower endpoint bid their value.
  double bid(int bidder, double value) const;
  // Value behind a bid, clamped to the bid range.
  double inverse_bid(int bidder, double b) const;
  // Probability that the bidder's equilibrium bid falls below b.
  double bid_cdf(int bidder, double b) const;
};

// Throws std::invalid_argument for unsupported inputs. Non-convergence is reported through
// `converged` and `diagnostic`, not thrown.
FpaSolution solve_asymmetric_fpa(const TypeDistribution& dist1, const TypeDistribution& dist2,
                                 const FpaOptions& options = {});

class FpaConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace intent_lab
