#include "intent_lab/fpa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace intent_lab {

namespace {

// Exact integral of 1/L over a cell of width ds where L varies linearly from l0 to l1.
double log_integral(double l0, double l1, double ds) {
  const double slope = (l1 - l0) / ds;
  if (std::abs(slope * ds) < 1e-10 * l0) return ds / l0;
  return std::log(l1 / l0) / slope;
}

struct March {
  std::array<std::vector<double>, 2> inverse;
  long iterations = 0;
  bool capped = false;
};

// Integrates the first-order conditions downward from the top bid. The cdf of bidder j at its
// inverse image obeys d ln F_j(phi_j(b)) / db = 1 / (phi_i(b) - b) for the opposing bidder i. Each
// cell is solved implicitly by a fixed-point iteration on the unknown lower-node inverses. Returns
// false when an inverse drops to or below the bid, which happens when the trial top bid is too high.
bool march(const std::array<TypeDistribution, 2>& d, const std::vector<double>& b, const FpaOptions& opt,
           March& out) {
  const std::size_t n = b.size() - 1;
  for (auto& v : out.inverse) v.assign(n + 1, 0.0);
  std::array<double, 2> cdf{1.0, 1.0};
  out.inverse[0][n] = d[0].upper();
  out.inverse[1][n] = d[1].upper();
  const double scale = 1.0 + std::abs(d[0].upper()) + std::abs(d[1].upper());
  const double inner_tol = std::min(opt.tol, 1e-14 * scale);

  for (std::size_t j = n - 1; j >= 1; --j) {
    const double ds = b[j + 1] - b[j];
    std::array<double, 2> guess;
    for (int i = 0; i < 2; ++i) {
      const auto& inv = out.inverse[i];
      guess[i] = j + 2 <= n ? inv[j + 1] - (inv[j + 2] - inv[j + 1]) * ds / (b[j + 2] - b[j + 1]) : inv[j + 1];
    }
    std::array<double, 2> next_cdf = cdf;
    bool done = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      ++out.iterations;
      std::array<double, 2> upd;
      for (int i = 0; i < 2; ++i) {
        const int opp = 1 - i;
        const double l0 = guess[opp] - b[j];
        const double l1 = out.inverse[opp][j + 1] - b[j + 1];
        if (!(l0 > 0.0) || !(l1 > 0.0)) return false;
        next_cdf[i] = cdf[i] * std::exp(-log_integral(l0, l1, ds));
        upd[i] = d[i].quantile(next_cdf[i]);
      }
      const double change = std::max(std::abs(upd[0] - guess[0]), std::abs(upd[1] - guess[1]));
      guess = upd;
      if (change <= inner_tol) {
        done = true;
        break;
      }
    }
    if (!done) out.capped = true;
    for (int i = 0; i < 2; ++i) {
      if (!(guess[i] > b[j])) return false;
      out.inverse[i][j] = guess[i];
    }
    cdf = next_cdf;
  }
  out.inverse[0][0] = b[0];
  out.inverse[1][0] = b[0];
  return true;
}

std::vector<double> graded_grid(double lo, double hi, int n) {
  std::vector<double> b(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double s = static_cast<double>(j) / n;
    b[j] = lo + s * s * (hi - lo);
  }
  b[n] = hi;
  return b;
}

}  // namespace

FpaSolution solve_asymmetric_fpa(const TypeDistribution& dist1, const TypeDistribution& dist2,
                                 const FpaOptions& options) {
  dist1.validate();
  dist2.validate();
  if (options.grid_size < 64) throw std::invalid_argument("grid_size must be >= 64");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  const double a = dist1.lo;
  if (std::abs(dist2.lo - a) > 1e-12 * (1.0 + std::abs(a)))
    throw std::invalid_argument("supports must share their lower endpoint");

  FpaSolution sol;
  sol.supports = {dist1, dist2};
  sol.lower = a;
  const std::array<TypeDistribution, 2> d{dist1, dist2};

  double lo = a;
  double hi = std::min(dist1.upper(), dist2.upper());
  const double stop = std::max(1e-15 * (1.0 + std::abs(a) + std::abs(hi)), 0.0);
  March trial;
  March best;
  std::vector<double> best_grid;
  bool have = false;
  long iterations = 0;
  bool capped = false;
  int rounds = 0;
  while (hi - lo > stop && rounds < 200) {
    ++rounds;
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    std::vector<double> grid = graded_grid(a, mid, options.grid_size);
    trial.iterations = 0;
    trial.capped = false;
    const bool ok = march(d, grid, options, trial);
    iterations += trial.iterations;
    if (ok) {
      lo = mid;
      best = trial;
      best_grid = std::move(grid);
      have = true;
      capped = trial.capped;
    } else {
      hi = mid;
    }
  }

  sol.iterations = iterations;
  sol.residual = hi - lo;
  if (!have) {
    sol.converged = false;
    sol.diagnostic = "no admissible top bid found";
    sol.max_bid = a;
    return sol;
  }
  sol.max_bid = lo;
  sol.bid_grid = std::move(best_grid);
  sol.inverse = std::move(best.inverse);
  const double x1 = sol.bid_grid[1] - a;
  sol.slope_defect = std::max(std::abs((sol.inverse[0][1] - a) / x1 - 2.0), std::abs((sol.inverse[1][1] - a) / x1 - 2.0));
  sol.converged = sol.residual <= options.tol && !capped;
  std::ostringstream os;
  os.precision(6);
  os << "top bid " << sol.max_bid << ", bracket " << sol.residual << ", slope defect " << sol.slope_defect
     << ", cell iterations " << iterations << (capped ? ", cell iteration cap reached" : "");
  sol.diagnostic = os.str();
  return sol;
}

double FpaSolution::inverse_bid(int bidder, double b) const {
  const auto& inv = inverse.at(bidder);
  if (b <= bid_grid.front()) return inv.front();
  if (b >= bid_grid.back()) return inv.back();
  const auto it = std::upper_bound(bid_grid.begin(), bid_grid.end(), b);
  const std::size_t j = static_cast<std::size_t>(it - bid_grid.begin()) - 1;
  const double w = (b - bid_grid[j]) / (bid_grid[j + 1] - bid_grid[j]);
  return inv[j] + w * (inv[j + 1] - inv[j]);
}

double FpaSolution::bid(int bidder, double value) const {
  const auto& inv = inverse.at(bidder);
  if (value <= lower) return value;
  if (value >= inv.back()) return max_bid;
  const auto it = std::upper_bound(inv.begin(), inv.end(), value);
  const std::size_t j = static_cast<std::size_t>(it - inv.begin()) - 1;
  const double w = (value - inv[j]) / (inv[j + 1] - inv[j]);
  return bid_grid[j] + w * (bid_grid[j + 1] - bid_grid[j]);
}

double FpaSolution::bid_cdf(int bidder, double b) const {
  if (b <= lower) return 0.0;
  if (b > max_bid) return 1.0;
  return supports.at(bidder).cdf(inverse_bid(bidder, b));
}

}  // namespace intent_lab
