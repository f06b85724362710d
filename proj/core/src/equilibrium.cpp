#include "intent_lab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace intent_lab {

TypeDistributions uniform_types(const MarketParams& p) {
  return {TypeDistribution::uniform(p.beta_lo, p.beta_hi), TypeDistribution::uniform(p.delta_lo, p.delta_hi)};
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Specialization: return "Specialization";
    case Regime::CompetitiveBatching: return "CompetitiveBatching";
    case Regime::UncompetitiveBatchingSolver1: return "UncompetitiveBatchingSolver1";
    case Regime::UncompetitiveBatchingSolver2: return "UncompetitiveBatchingSolver2";
  }
  return "?";
}

std::optional<Regime> parse_regime(const std::string& name) {
  for (Regime r : {Regime::Specialization, Regime::CompetitiveBatching, Regime::UncompetitiveBatchingSolver1,
                   Regime::UncompetitiveBatchingSolver2})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

Regime classify_regime(const MarketParams& p, double beta, double delta) {
  const bool strong1 = beta >= p.g_beta_lo();
  const bool strong2 = delta >= p.g_delta_lo();
  if (strong1 && strong2) return Regime::Specialization;
  if (strong1) return Regime::UncompetitiveBatchingSolver1;
  if (strong2) return Regime::UncompetitiveBatchingSolver2;
  return Regime::CompetitiveBatching;
}

BidProfile EquilibriumResult::profile_at(double beta, double delta) const {
  return {strategies[0](beta), strategies[1](delta)};
}

Outcome EquilibriumResult::outcome_at(const MarketParams& params, double beta, double delta,
                                      const MechanismOptions& options) const {
  return run_mechanism(mechanism, params, profile_at(beta, delta), TypeDraw{beta, delta}, options);
}

namespace {

void certify_if_requested(const MarketParams& params, EquilibriumResult& r, const EquilibriumOptions& o) {
  if (o.certify) r.certificate = verify_epsilon_nash(params, r.mechanism, r.strategies, o.epsilon, *o.certify);
}

Strategy make_strategy(SolverId id, const TypeDistribution& dist, std::function<SolverBid(double)> policy,
                       std::vector<double> breakpoints, int grid_points) {
  Strategy s;
  s.solver = id;
  s.dist = dist;
  s.policy = std::move(policy);
  s.breakpoints = std::move(breakpoints);
  s.grid = uniform_grid(dist.lo, dist.upper(), grid_points);
  return s;
}

void require_converged(const FpaSolution& fpa) {
  if (!fpa.converged) throw FpaConvergenceError("first-price auction solve did not converge: " + fpa.diagnostic);
}

}  // namespace

EquilibriumResult sim_equilibrium(const MarketParams& params, const TypeDistributions& dists, MechanismKind kind,
                                  const EquilibriumOptions& options) {
  if (kind != MechanismKind::SimFirstPrice && kind != MechanismKind::SimSecondPrice)
    throw std::invalid_argument("sim_equilibrium covers the simultaneous auctions only");
  params.validate();
  EquilibriumResult r;
  r.mechanism = kind;
  // Both solvers bid the weak-side floor on each order; the strong solver wins its own order.
  const SolverBid floor_bid{params.beta_lo, params.delta_lo, 0.0, 0.0};
  r.strategies[0] = Strategy::constant(SolverId::One, dists.beta, floor_bid, options.strategy_grid);
  r.strategies[1] = Strategy::constant(SolverId::Two, dists.delta, floor_bid, options.strategy_grid);
  certify_if_requested(params, r, options);
  return r;
}

double batch_offset(const MarketParams& p) { return p.g * p.beta_lo - p.p_db * p.g * p.delta_lo; }

TypeDistribution transformed_beta(const MarketParams& p, const TypeDistribution& beta) {
  return beta.affine(p.g, -batch_offset(p));
}

TypeDistribution transformed_delta(const MarketParams& p, const TypeDistribution& delta) {
  return delta.affine(p.p_db * p.g, 0.0);
}

EquilibriumResult batch_equilibrium(const MarketParams& params, const TypeDistributions& dists,
                                    const EquilibriumOptions& options) {
  params.validate();
  const double V = batch_offset(params);
  auto fpa = std::make_shared<FpaSolution>(
      solve_asymmetric_fpa(transformed_beta(params, dists.beta), transformed_delta(params, dists.delta), options.fpa));
  fpa->V = V;
  require_converged(*fpa);
  const MarketParams p = params;
  EquilibriumResult r;
  r.mechanism = MechanismKind::BatchAuction;
  r.strategies[0] = make_strategy(
      SolverId::One, dists.beta,
      [fpa, p, V](double beta) {
        return SolverBid{0.0, 0.0, fpa->bid(0, p.g * beta - V) + V, p.g * p.delta_lo};
      },
      {}, options.strategy_grid);
  r.strategies[1] = make_strategy(
      SolverId::Two, dists.delta,
      [fpa, p](double delta) {
        return SolverBid{0.0, 0.0, p.g * p.beta_lo, fpa->bid(1, p.p_db * p.g * delta) / p.p_db};
      },
      {}, options.strategy_grid);
  r.transformed_solution = *fpa;
  certify_if_requested(params, r, options);
  return r;
}

namespace {

SolverBid rebalance(const MarketParams& p, SolverBid bid, double share, double cap_b, double cap_d) {
  const double value = bid.Q_b + p.p_db * bid.Q_d;
  const double lo = std::max(0.0, value - p.p_db * cap_d);
  const double hi = std::min(cap_b, value);
  const double b = std::clamp(share * value, lo, hi);
  bid.Q_b = b;
  bid.Q_d = (value - b) / p.p_db;
  return bid;
}

}  // namespace

EquilibriumResult batch_rebalanced(const MarketParams& params, const EquilibriumResult& canonical, double b_share,
                                   const EquilibriumOptions& options) {
  if (!(b_share >= 0.0 && b_share <= 1.0)) throw std::invalid_argument("b_share must lie in [0, 1]");
  EquilibriumResult r = canonical;
  const MarketParams p = params;
  const auto s1 = canonical.strategies[0].policy;
  const auto s2 = canonical.strategies[1].policy;
  r.strategies[0].policy = [p, s1, b_share](double beta) {
    return rebalance(p, s1(beta), b_share, p.g * beta, p.g * p.delta_lo);
  };
  r.strategies[1].policy = [p, s2, b_share](double delta) {
    return rebalance(p, s2(delta), b_share, p.g * p.beta_lo, p.g * delta);
  };
  r.certificate.reset();
  certify_if_requested(params, r, options);
  return r;
}

EquilibriumResult fair_fp_strategies(const MarketParams& params, const TypeDistributions& dists,
                                     const EquilibriumOptions& options) {
  params.validate();
  const MarketParams p = params;
  const double gb = p.g_beta_lo();
  const double gd = p.g_delta_lo();
  const double V = batch_offset(p);
  const bool weak1 = dists.beta.lo < gb && gb > dists.beta.lo;
  const bool weak2 = dists.delta.lo < gd && gd > dists.delta.lo;

  // Weak types send their full solo capacity as the individual bid. The amount never settles on the
  // equilibrium path, but it keeps the strong rival from shading its off-order batched component.
  // Batched competition happens only between the weak types, so each side's rival is drawn from
  // the law truncated at the opposing floor times g.
  std::shared_ptr<FpaSolution> fpa;
  if (weak1 && weak2) {
    const TypeDistribution t1 = transformed_beta(p, dists.beta.truncate_at(gb));
    const TypeDistribution t2 = transformed_delta(p, dists.delta.truncate_at(gd));
    fpa = std::make_shared<FpaSolution>(solve_asymmetric_fpa(t1, t2, options.fpa));
    fpa->V = V;
    require_converged(*fpa);
  }

  // With the alternative technology, solver 1 also bids its solo D capacity. Any rival batched bid
  // committing the alternative execution then fails fairness on order 2.
  const double off_d = p.ext ? p.delta_lo : 0.0;

  EquilibriumResult r;
  r.mechanism = MechanismKind::FairCombFirstPrice;
  std::vector<double> bp1, bp2;
  if (gb > dists.beta.lo && gb < dists.beta.upper()) bp1.push_back(gb);
  if (gd > dists.delta.lo && gd < dists.delta.upper()) bp2.push_back(gd);
  r.strategies[0] = make_strategy(
      SolverId::One, dists.beta,
      [fpa, p, gb, gd, V, off_d](double beta) {
        if (beta >= gb || !fpa) return SolverBid{gb, off_d, gb, gd};
        return SolverBid{beta, off_d, fpa->bid(0, p.g * beta - V) + V, gd};
      },
      bp1, options.strategy_grid);
  r.strategies[1] = make_strategy(
      SolverId::Two, dists.delta,
      [fpa, p, gb, gd](double delta) {
        if (delta >= gd || !fpa) return SolverBid{0.0, gd, gb, gd};
        return SolverBid{0.0, delta, gb, fpa->bid(1, p.p_db * p.g * delta) / p.p_db};
      },
      bp2, options.strategy_grid);
  if (fpa) r.transformed_solution = *fpa;
  certify_if_requested(params, r, options);
  return r;
}

EquilibriumResult fair_fp_equilibrium(const MarketParams& params, double beta, double delta,
                                      const EquilibriumResult& strategies, const EquilibriumOptions& options) {
  if (beta < params.beta_lo - kTol || beta > params.beta_hi + kTol || delta < params.delta_lo - kTol ||
      delta > params.delta_hi + kTol)
    throw std::invalid_argument("types outside their supports");
  EquilibriumResult r = strategies;
  r.certificate.reset();
  r.regime = classify_regime(params, beta, delta);
  r.types = TypeDraw{beta, delta};
  r.profile = r.profile_at(beta, delta);
  r.outcome = run_mechanism(r.mechanism, params, *r.profile, r.types);
  if (options.certify) {
    VerifyOptions v = *options.certify;
    if (v.types1.empty()) v.types1 = {beta};
    if (v.types2.empty()) v.types2 = {delta};
    r.certificate = verify_epsilon_nash(params, r.mechanism, r.strategies, options.epsilon, v);
  }
  return r;
}

EquilibriumResult fair_fp_equilibrium(const MarketParams& params, double beta, double delta,
                                      const TypeDistributions& dists, const EquilibriumOptions& options) {
  EquilibriumOptions no_cert = options;
  no_cert.certify.reset();
  return fair_fp_equilibrium(params, beta, delta, fair_fp_strategies(params, dists, no_cert), options);
}

RegimePayoffs regime_payoffs(const MarketParams& p, const EquilibriumResult& fair, double beta, double delta) {
  RegimePayoffs out;
  const double gb = p.g_beta_lo();
  const double gd = p.g_delta_lo();
  const TypeDistribution& db = fair.strategies[0].dist;
  const TypeDistribution& dd = fair.strategies[1].dist;
  const double p2_strong = 1.0 - dd.cdf(gd);
  const double p1_strong = 1.0 - db.cdf(gb);
  out.x1 = (beta - gb) * p2_strong + (p.g * beta - gb) * (1.0 - p2_strong);
  out.x2 = p.p_db * (delta - gd) * p1_strong + p.p_db * (p.g * delta - gd) * (1.0 - p1_strong);
  out.x1_feasible = beta >= gb;
  out.x2_feasible = delta >= gd;

  const double V = batch_offset(p);
  const std::optional<FpaSolution>& fpa = fair.transformed_solution;
  if (!fpa) return out;
  // Best batched reply against the rival's weak types, searched over a fine value grid plus the
  // equilibrium bid itself.
  auto best_reply = [&](int bidder, double surplus_value) {
    const int opp = 1 - bidder;
    const double lo = fpa->lower;
    const double hi = std::min(surplus_value, fpa->max_bid);
    double best = 0.0;
    constexpr int n = 4000;
    for (int i = 0; i <= n; ++i) {
      const double b = hi <= lo ? lo : lo + (hi - lo) * i / n;
      best = std::max(best, (surplus_value - b) * fpa->bid_cdf(opp, b));
    }
    if (surplus_value > lo) {
      const double b = fpa->bid(bidder, std::min(surplus_value, fpa->supports[bidder].upper()));
      best = std::max(best, (surplus_value - b) * fpa->bid_cdf(opp, b));
    }
    return best;
  };
  // In transformed units solver 1's winning surplus is (g*beta - V) - bid and solver 2's is
  // p*g*delta - bid.
  out.y1 = (1.0 - p2_strong) * best_reply(0, p.g * beta - V);
  out.y2 = (1.0 - p1_strong) * best_reply(1, p.p_db * p.g * delta);
  return out;
}

EquilibriumResult fair_sp_equilibrium_witness(const MarketParams& params, const TypeDistributions& dists,
                                              const EquilibriumOptions& options) {
  EquilibriumOptions no_cert = options;
  no_cert.certify.reset();
  EquilibriumResult r = batch_equilibrium(params, dists, no_cert);
  r.mechanism = MechanismKind::FairCombSecondPrice;
  certify_if_requested(params, r, options);
  return r;
}

// ---- sequential auction ----

std::string to_string(SequentialVerdict v) {
  switch (v) {
    case SequentialVerdict::Pass: return "pass";
    case SequentialVerdict::Counterexample: return "counterexample";
    case SequentialVerdict::InfeasibleRevealing: return "infeasible-revealing";
  }
  return "?";
}

namespace {

// Largest batched value a solver of the given type can offer.
double max_value(const MarketParams& p, SolverId id, double type) {
  return id == SolverId::One ? p.g * type + p.p_db * p.g_delta_lo() : p.g_beta_lo() + p.p_db * p.g * type;
}

// Opponent's max value expressed back in its own type.
double type_for_value(const MarketParams& p, SolverId id, double value) {
  return id == SolverId::One ? (value - p.p_db * p.g_delta_lo()) / p.g : (value - p.g_beta_lo()) / (p.p_db * p.g);
}

// Stage-two payoff of `id` with type `type` when the rival believes the type is at most `belief`.
// The rival outbids the largest value consistent with that belief by `eta` whenever it can, and
// otherwise bids its own maximum.
double stage_two_payoff(const MarketParams& p, SolverId id, double type, double belief,
                        const TypeDistribution& rival, double eta) {
  const double own_max = max_value(p, id, type);
  const double cap = max_value(p, id, belief) + eta;
  const double floor = p.g_beta_lo() + p.p_db * p.g_delta_lo();
  auto win_prob = [&](double v) {
    if (v > cap) return 1.0;
    return rival.cdf(type_for_value(p, other(id), v));
  };
  double best = 0.0;
  constexpr int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double v = floor + (own_max - floor) * i / n;
    best = std::max(best, (own_max - v) * win_prob(v));
  }
  const double sure = cap + eta;
  if (sure <= own_max) best = std::max(best, own_max - sure);
  return best;
}

}  // namespace

SequentialCheckResult sequential_deviation_check(const MarketParams& params, const TypeDistributions& dists,
                                                 const FirstStageStrategy& fs, int grid,
                                                 const EquilibriumOptions& options) {
  params.validate();
  if (grid < 2) throw std::invalid_argument("grid must have at least two points");
  const std::size_t n = fs.types.size();
  if (n == 0 || fs.bid_b.size() != n || fs.bid_d.size() != n)
    throw std::invalid_argument("first-stage strategy needs one (b, d) bid per type");
  for (std::size_t i = 1; i < n; ++i)
    if (!(fs.types[i] > fs.types[i - 1])) throw std::invalid_argument("first-stage type grid must increase");

  const SolverId id = fs.solver;
  const TypeDistribution& own_dist = id == SolverId::One ? dists.beta : dists.delta;
  const TypeDistribution& rival_dist = id == SolverId::One ? dists.delta : dists.beta;
  const double gb = params.g_beta_lo();
  const double gd = params.g_delta_lo();
  SequentialCheckResult out;

  bool constant = true;
  for (std::size_t i = 1; i < n; ++i)
    constant = constant && fs.bid_b[i] == fs.bid_b[0] && fs.bid_d[i] == fs.bid_d[0];

  if (!constant) {
    // Beliefs after a first-stage bid: the highest grid type that sends it.
    auto belief_for = [&](double b, double d) {
      double t = -std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < n; ++m)
        if (fs.bid_b[m] == b && fs.bid_d[m] == d) t = std::max(t, fs.types[m]);
      return t;
    };
    std::size_t low = 0;
    for (std::size_t m = 1; m < n; ++m) {
      const double vm = fs.bid_b[m] + params.p_db * fs.bid_d[m];
      const double vl = fs.bid_b[low] + params.p_db * fs.bid_d[low];
      if (vm < vl) low = m;
    }
    const double pool_b = fs.bid_b[low];
    const double pool_d = fs.bid_d[low];
    const double pool_belief = belief_for(pool_b, pool_d);
    const double eta = 1e-6 * (1.0 + max_value(params, id, own_dist.upper()));
    out.verdict = SequentialVerdict::Pass;
    out.deviation_b = pool_b;
    out.deviation_d = pool_d;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = fs.types[k];
      const double revealing = stage_two_payoff(params, id, t, belief_for(fs.bid_b[k], fs.bid_d[k]), rival_dist, eta);
      const double deviating = stage_two_payoff(params, id, t, pool_belief, rival_dist, eta);
      ++out.deviations_checked;
      if (deviating - revealing > out.gain) {
        out.gain = deviating - revealing;
        out.type = t;
        out.payoff_revealing = revealing;
        out.payoff_deviation = deviating;
      }
    }
    if (out.gain > 1e-9) {
      out.verdict = SequentialVerdict::Counterexample;
      std::ostringstream os;
      os.precision(9);
      os << "solver " << to_string(id) << " of type " << out.type << " gains " << out.gain
         << " by sending the pooled first-stage bid (" << pool_b << ", " << pool_d << ") instead of revealing";
      out.detail = os.str();
    } else {
      out.detail = "first-stage bids vary with type but no pooling deviation gained on the grid";
    }
    return out;
  }

  const double cb = fs.bid_b[0];
  const double cd = fs.bid_d[0];
  if (cb >= gb || cd >= gd) {
    out.verdict = SequentialVerdict::InfeasibleRevealing;
    // A solver must be able to deliver its own-order bid if it ends up specialised.
    const double own_bid = id == SolverId::One ? cb : cd;
    out.type = own_dist.lo;
    std::ostringstream os;
    os.precision(9);
    os << "constant first-stage bid (" << cb << ", " << cd << ") is at or above (" << gb << ", " << gd
       << "); types below " << own_bid << " cannot deliver it, so the bid separates types";
    out.detail = os.str();
    return out;
  }

  // Pooling below the thresholds: stage two is the batch auction.
  EquilibriumOptions no_cert = options;
  no_cert.certify.reset();
  const EquilibriumResult batch = batch_equilibrium(params, dists, no_cert);
  const auto pooled = [&](SolverId who, const SolverBid& batched, double b, double d) {
    SolverBid s = batched;
    const double cap_b = who == SolverId::One ? std::numeric_limits<double>::infinity() : params.beta_lo;
    const double cap_d = who == SolverId::Two ? std::numeric_limits<double>::infinity() : params.delta_lo;
    s.q_b = std::min(b, cap_b);
    s.q_d = std::min(d, cap_d);
    return s;
  };
  const std::vector<double> betas = uniform_grid(dists.beta.lo, dists.beta.upper(), grid);
  const std::vector<double> deltas = uniform_grid(dists.delta.lo, dists.delta.upper(), grid);
  bool match = true;
  for (double b : betas) {
    for (double d : deltas) {
      const BidProfile batched = batch.profile_at(b, d);
      BidProfile seq;
      seq.s1 = pooled(SolverId::One, batched.s1, cb, cd);
      seq.s2 = pooled(SolverId::Two, batched.s2, cb, cd);
      const Outcome a = run_fair_comb_first_price(params, seq, TypeDraw{b, d});
      const Outcome c = run_batch(params, batched, TypeDraw{b, d});
      ++out.profiles_compared;
      match = match && a.matching == c.matching && a.delivery == c.delivery;
    }
  }
  out.stage_two_matches_batch = match;

  // First-stage deviations within the sub-threshold box, beliefs unchanged.
  std::array<Strategy, 2> strat = batch.strategies;
  for (int i = 0; i < 2; ++i) {
    const SolverId who = i == 0 ? SolverId::One : SolverId::Two;
    auto base = strat[i].policy;
    strat[i].policy = [base, pooled, who, cb, cd](double t) { return pooled(who, base(t), cb, cd); };
  }
  const int idx = index_of(id);
  const Strategy& own = strat[idx];
  const Strategy& rival = strat[1 - idx];
  VerifyOptions vopt;
  double worst = 0.0;
  for (double t : uniform_grid(own_dist.lo, own_dist.upper(), grid)) {
    const SolverBid eq = own(t);
    const double eq_pay = expected_payoff(params, MechanismKind::FairCombFirstPrice, rival, id, t, eq, vopt);
    const double cap_b = id == SolverId::One ? t : params.beta_lo;
    const double cap_d = id == SolverId::One ? params.delta_lo : t;
    const double hb = std::min(cap_b, gb);
    const double hd = std::min(cap_d, gd);
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        SolverBid dev = eq;
        dev.q_b = hb * i / grid;  // stays strictly below the threshold
        dev.q_d = hd * j / grid;
        const double pay = expected_payoff(params, MechanismKind::FairCombFirstPrice, rival, id, t, dev, vopt);
        ++out.deviations_checked;
        if (pay - eq_pay > worst) {
          worst = pay - eq_pay;
          out.type = t;
          out.payoff_revealing = eq_pay;
          out.payoff_deviation = pay;
          out.deviation_b = dev.q_b;
          out.deviation_d = dev.q_d;
        }
      }
    }
  }
  out.gain = worst;
  if (worst > 1e-9 || !match) {
    out.verdict = SequentialVerdict::Counterexample;
    out.detail = !match ? "stage two differs from the batch auction" : "a first-stage deviation gains";
  } else {
    out.verdict = SequentialVerdict::Pass;
    out.detail = "pooled first-stage bids: no profitable first-stage deviation; stage two equals the batch auction";
  }
  return out;
}

}  // namespace intent_lab
