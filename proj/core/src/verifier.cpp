#include "intent_lab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "intent_lab/parallel.hpp"

namespace intent_lab {

namespace {

struct Eval {
  std::uint32_t path;
  double pay;
};

SolverBid lerp(const SolverBid& a, const SolverBid& b, double w) {
  return {a.q_b + w * (b.q_b - a.q_b), a.q_d + w * (b.q_d - a.q_d), a.Q_b + w * (b.Q_b - a.Q_b),
          a.Q_d + w * (b.Q_d - a.Q_d), w < 0.5 ? a.exec : b.exec};
}

// Opponent strategy sampled at equal-probability nodes within each piece between breakpoints.
struct OpponentModel {
  struct Segment {
    double mass = 0.0;
    bool constant = false;
    std::vector<SolverBid> nodes;
  };
  std::vector<Segment> segments;

  OpponentModel(const Strategy& s, int m) {
    const TypeDistribution& d = s.dist;
    std::vector<double> cuts{d.lo};
    for (double b : s.breakpoints)
      if (b > d.lo && b < d.upper()) cuts.push_back(b);
    cuts.push_back(d.upper());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      Segment seg;
      const double u0 = d.cdf(cuts[k]);
      const double u1 = d.cdf(cuts[k + 1]);
      seg.mass = u1 - u0;
      if (seg.mass <= 0.0) continue;
      const double span = cuts[k + 1] - cuts[k];
      seg.nodes.reserve(m + 1);
      for (int i = 0; i <= m; ++i) {
        double t = d.quantile(u0 + (u1 - u0) * i / m);
        t = std::clamp(t, cuts[k] + 1e-12 * span, cuts[k + 1] - 1e-12 * span);
        seg.nodes.push_back(s.policy(t));
      }
      seg.constant = std::all_of(seg.nodes.begin(), seg.nodes.end(),
                                 [&](const SolverBid& b) { return b == seg.nodes.front(); });
      if (seg.constant) seg.nodes.resize(1);
      segments.push_back(std::move(seg));
    }
  }
};

class Integrator {
 public:
  Integrator(const MarketParams& params, MechanismKind kind, const OpponentModel& opp, SolverId solver, double type,
             int m, const MechanismOptions& mopt)
      : params_(params), kind_(kind), opp_(opp), solver_(solver), type_(type), m_(m), mopt_(mopt) {}

  double value(const SolverBid& own) const {
    double total = 0.0;
    for (const auto& seg : opp_.segments) total += seg.mass * segment_mean(own, seg);
    return total;
  }

 private:
  static constexpr double kSwitchWidth = 1e-4;  // in node units
  static constexpr int kMaxDepth = 48;

  Eval eval(const SolverBid& own, const SolverBid& opp) const {
    BidProfile p;
    if (solver_ == SolverId::One) {
      p.s1 = own;
      p.s2 = opp;
    } else {
      p.s1 = opp;
      p.s2 = own;
    }
    const Settlement s = settle(kind_, params_, p, mopt_);
    return {s.path, payoff_unchecked(params_, solver_, type_, s.matching, s.delivery, s.exec_of(solver_))};
  }

  Eval eval_at(const SolverBid& own, const OpponentModel::Segment& seg, double r) const {
    int i = static_cast<int>(r);
    if (i >= m_) i = m_ - 1;
    const double w = r - i;
    if (w == 0.0) return eval(own, seg.nodes[i]);
    return eval(own, lerp(seg.nodes[i], seg.nodes[i + 1], w));
  }

  double resolve(const SolverBid& own, const OpponentModel::Segment& seg, double r0, const Eval& e0, double r1,
                 const Eval& e1, int depth) const {
    const double len = r1 - r0;
    if (e0.path == e1.path) {
      if (std::abs(e0.pay - e1.pay) <= 1e-13 * (1.0 + std::abs(e0.pay))) return e0.pay * len;
      const double rm = 0.5 * (r0 + r1);
      const Eval em = eval_at(own, seg, rm);
      if (em.path == e0.path) {
        const double trap = 0.5 * (e0.pay + e1.pay) * len;
        const double simp = (e0.pay + 4.0 * em.pay + e1.pay) * len / 6.0;
        if (std::abs(simp - trap) <= 1e-12 * (1.0 + len) || depth >= kMaxDepth || len <= kSwitchWidth) return simp;
      }
      return resolve(own, seg, r0, e0, rm, em, depth + 1) + resolve(own, seg, rm, em, r1, e1, depth + 1);
    }
    if (len <= kSwitchWidth || depth >= kMaxDepth) return 0.5 * (e0.pay + e1.pay) * len;
    const double rm = 0.5 * (r0 + r1);
    const Eval em = eval_at(own, seg, rm);
    return resolve(own, seg, r0, e0, rm, em, depth + 1) + resolve(own, seg, rm, em, r1, e1, depth + 1);
  }

  // Mean payoff over one opponent segment (probability-normalized).
  double segment_mean(const SolverBid& own, const OpponentModel::Segment& seg) const {
    if (seg.constant) return eval(own, seg.nodes.front()).pay;
    const int q = m_ / 4;
    Eval prev = eval(own, seg.nodes[0]);
    double sum = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const Eval cur = eval(own, seg.nodes[k * q]);
      sum += resolve(own, seg, (k - 1) * q, prev, k * q, cur, 0);
      prev = cur;
    }
    return sum / m_;
  }

  const MarketParams& params_;
  MechanismKind kind_;
  const OpponentModel& opp_;
  SolverId solver_;
  double type_;
  int m_;
  MechanismOptions mopt_;
};

std::vector<double> axis(const DeviationBox& box, int c) {
  if (box.points[c] <= 1) return {box.pinned[c]};
  std::vector<double> v(box.points[c]);
  for (int i = 0; i < box.points[c]; ++i) v[i] = box.hi[c] * i / (box.points[c] - 1);
  v.back() = box.hi[c];
  return v;
}

void check_options(const VerifyOptions& o) {
  if (o.bid_resolution < 50) throw std::invalid_argument("bid_resolution must be >= 50 points per dimension");
  if (o.quadrature_nodes < 4 || o.quadrature_nodes % 4 != 0)
    throw std::invalid_argument("quadrature_nodes must be a positive multiple of 4");
}

}  // namespace

std::vector<DeviationBox> deviation_boxes(const MarketParams& p, MechanismKind kind, SolverId solver, double type,
                                          const SolverBid& eq, int n) {
  // Capacity per component at zero inventory.
  std::array<double, 4> cap;
  if (solver == SolverId::One)
    cap = {type, p.delta_lo, p.g * type, p.g * p.delta_lo};
  else
    cap = {p.beta_lo, type, p.g * p.beta_lo, p.g * type};
  const std::array<double, 4> eq_v{eq.q_b, eq.q_d, eq.Q_b, eq.Q_d};

  bool reads_individual = kind != MechanismKind::BatchAuction;
  bool reads_batched = kind != MechanismKind::SimFirstPrice && kind != MechanismKind::SimSecondPrice;
  DeviationBox base;
  base.hi = cap;
  base.pinned = eq_v;
  for (int c = 0; c < 4; ++c) {
    const bool searched = c < 2 ? reads_individual : reads_batched;
    base.points[c] = searched ? n : 1;
  }
  std::vector<DeviationBox> out{base};
  if (reads_batched && p.ext) {
    DeviationBox alt = base;
    alt.hi[2] = p.ext->k * p.beta_lo;
    alt.hi[3] = p.ext->tau * p.delta_lo;
    alt.exec = ExecutionChoice::Alt;
    out.push_back(alt);
  }
  return out;
}

double expected_payoff(const MarketParams& params, MechanismKind kind, const Strategy& opponent, SolverId solver,
                       double type, const SolverBid& bid, const VerifyOptions& options) {
  check_options(options);
  const OpponentModel model(opponent, options.quadrature_nodes);
  const Integrator integ(params, kind, model, solver, type, options.quadrature_nodes, options.mechanism);
  return integ.value(bid);
}

NashCertificate verify_epsilon_nash(const MarketParams& params, MechanismKind kind,
                                    const std::array<Strategy, 2>& strategies, double epsilon,
                                    const VerifyOptions& options) {
  check_options(options);
  struct Task {
    SolverId solver;
    double type;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < 2; ++i) {
    const SolverId id = i == 0 ? SolverId::One : SolverId::Two;
    const Strategy& s = strategies[i];
    std::vector<double> types = i == 0 ? options.types1 : options.types2;
    if (types.empty()) types = options.type_points > 0 ? uniform_grid(s.dist.lo, s.dist.upper(), options.type_points) : s.grid;
    for (double t : types) tasks.push_back({id, t});
  }
  const OpponentModel model1(strategies[1], options.quadrature_nodes);  // faced by solver 1
  const OpponentModel model2(strategies[0], options.quadrature_nodes);  // faced by solver 2

  std::vector<Deviation> best(tasks.size());
  std::vector<long> counts(tasks.size(), 0);
  parallel_for(tasks.size(), [&](std::size_t ti) {
    const Task& task = tasks[ti];
    const int idx = index_of(task.solver);
    const OpponentModel& model = idx == 0 ? model1 : model2;
    const Integrator integ(params, kind, model, task.solver, task.type, options.quadrature_nodes, options.mechanism);
    const SolverBid eq_bid = strategies[idx](task.type);
    const double eq_pay = integ.value(eq_bid);
    Deviation d;
    d.solver = task.solver;
    d.type = task.type;
    d.bid = eq_bid;
    d.payoff_equilibrium = eq_pay;
    d.payoff_deviation = eq_pay;
    double best_pay = -std::numeric_limits<double>::infinity();
    long count = 0;
    for (const DeviationBox& box : deviation_boxes(params, kind, task.solver, task.type, eq_bid,
                                                   options.bid_resolution)) {
      const auto a0 = axis(box, 0), a1 = axis(box, 1), a2 = axis(box, 2), a3 = axis(box, 3);
      SolverBid b;
      b.exec = box.exec;
      for (double v0 : a0) {
        b.q_b = v0;
        for (double v1 : a1) {
          b.q_d = v1;
          for (double v2 : a2) {
            b.Q_b = v2;
            for (double v3 : a3) {
              b.Q_d = v3;
              const double pay = integ.value(b);
              ++count;
              if (pay > best_pay) {
                best_pay = pay;
                d.bid = b;
                d.payoff_deviation = pay;
              }
            }
          }
        }
      }
    }
    d.gain = d.payoff_deviation - eq_pay;
    best[ti] = d;
    counts[ti] = count;
  });

  NashCertificate cert;
  cert.epsilon = epsilon;
  cert.type_points_checked = static_cast<int>(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    cert.deviations_checked += counts[i];
    if (!cert.worst || best[i].gain > cert.worst->gain) cert.worst = best[i];
  }
  cert.max_gain = cert.worst ? std::max(0.0, cert.worst->gain) : 0.0;
  cert.passed = cert.max_gain <= epsilon;
  return cert;
}

std::string describe(const Deviation& d) {
  std::ostringstream os;
  os.precision(9);
  os << "solver " << to_string(d.solver) << " at type " << d.type << " deviating to (q_b=" << d.bid.q_b
     << ", q_d=" << d.bid.q_d << ", Q_b=" << d.bid.Q_b << ", Q_d=" << d.bid.Q_d
     << (d.bid.exec == ExecutionChoice::Alt ? ", alt execution" : "") << ") earns " << d.payoff_deviation
     << " vs " << d.payoff_equilibrium << " (gain " << d.gain << ")";
  return os.str();
}

}  // namespace intent_lab
