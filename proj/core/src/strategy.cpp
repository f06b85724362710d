#include "intent_lab/strategy.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace intent_lab {

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("grid needs at least one point");
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

Strategy::Table Strategy::tabulate() const {
  Table t;
  t.types = grid;
  t.bids.reserve(grid.size());
  for (double x : grid) t.bids.push_back(policy(x));
  return t;
}

namespace {

SolverBid lerp(const SolverBid& a, const SolverBid& b, double w) {
  return {a.q_b + w * (b.q_b - a.q_b), a.q_d + w * (b.q_d - a.q_d), a.Q_b + w * (b.Q_b - a.Q_b),
          a.Q_d + w * (b.Q_d - a.Q_d), w < 0.5 ? a.exec : b.exec};
}

struct Piece {
  std::vector<double> x;
  std::vector<SolverBid> y;
};

}  // namespace

Strategy Strategy::discretized(int n) const {
  if (n < 2) throw std::invalid_argument("discretization needs at least two points");
  const double lo = dist.lo;
  const double hi = dist.upper();
  std::vector<double> cuts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  const std::vector<double> base = uniform_grid(lo, hi, n);

  // One interpolation table per piece between breakpoints so jumps stay sharp.
  auto pieces = std::make_shared<std::vector<Piece>>();
  constexpr double nudge = 1e-12;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    Piece p;
    p.x.push_back(a);
    for (double x : base)
      if (x > a && x < b) p.x.push_back(x);
    p.x.push_back(b);
    const double span = b - a;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      double x = p.x[i];
      if (i == 0 && k > 0) x = a + nudge * span;
      if (i + 1 == p.x.size() && k + 2 < cuts.size()) x = b - nudge * span;
      p.y.push_back(policy(x));
    }
    pieces->push_back(std::move(p));
  }
  auto bounds = std::make_shared<std::vector<double>>(cuts);

  Strategy s = *this;
  s.grid = base;
  s.policy = [pieces, bounds](double t) {
    const auto& c = *bounds;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(c.begin() + 1, c.end() - 1, t) - (c.begin() + 1));
    const Piece& p = (*pieces)[k];
    if (t <= p.x.front()) return p.y.front();
    if (t >= p.x.back()) return p.y.back();
    const auto it = std::upper_bound(p.x.begin(), p.x.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - p.x.begin()) - 1;
    return lerp(p.y[j], p.y[j + 1], (t - p.x[j]) / (p.x[j + 1] - p.x[j]));
  };
  return s;
}

Strategy Strategy::constant(SolverId solver, const TypeDistribution& dist, const SolverBid& bid, int grid_points) {
  Strategy s;
  s.solver = solver;
  s.dist = dist;
  s.policy = [bid](double) { return bid; };
  s.grid = uniform_grid(dist.lo, dist.upper(), grid_points);
  return s;
}

}  // namespace intent_lab
