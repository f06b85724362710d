#include "intent_lab/market_model.hpp"

#include <cmath>
#include <sstream>

namespace intent_lab {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require(bool ok, const char* field, const std::string& msg) {
  if (!ok) throw ParamError(field, msg);
}

}  // namespace

void MarketParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  require(finite(beta_lo) && finite(beta_hi) && finite(delta_lo) && finite(delta_hi) && finite(g) &&
              finite(p_db),
          "market", "market parameters must be finite");
  require(beta_lo > 0.0, "beta_lo", "beta_lo must be > 0 (got " + fmt_num(beta_lo) + ")");
  require(beta_hi > beta_lo, "beta_hi", "beta_hi must exceed beta_lo (got " + fmt_num(beta_hi) + ")");
  require(delta_lo > 0.0, "delta_lo", "delta_lo must be > 0 (got " + fmt_num(delta_lo) + ")");
  require(delta_hi > delta_lo, "delta_hi", "delta_hi must exceed delta_lo (got " + fmt_num(delta_hi) + ")");
  require(g >= 1.0, "g", "g must be >= 1 (got " + fmt_num(g) + ")");
  require(p_db > 0.0, "p_db", "p_db must be > 0 (got " + fmt_num(p_db) + ")");
  if (ext) {
    require(std::isfinite(ext->k) && std::isfinite(ext->tau), "extension", "extension values must be finite");
    require(ext->tau > 0.0, "tau", "tau must be > 0 (got " + fmt_num(ext->tau) + ")");
    require(ext->tau < 1.0, "tau", "tau must be < 1 (got " + fmt_num(ext->tau) + ")");
    require(g > 1.0, "g", "g must be > 1 when the extension is present (got " + fmt_num(g) + ")");
    require(ext->k > g, "k", "k must exceed g (got " + fmt_num(ext->k) + ")");
    require(ext->k * beta_lo > g * beta_hi, "k",
            "k*beta_lo must exceed g*beta_hi (got " + fmt_num(ext->k * beta_lo) + " <= " + fmt_num(g * beta_hi) +
                ")");
  }
}

void SolverState::validate(const MarketParams& params) const {
  if (id == SolverId::One) {
    if (productivity < params.beta_lo - kTol || productivity > params.beta_hi + kTol)
      throw std::invalid_argument("solver 1 productivity outside [beta_lo, beta_hi]");
    if (inv_d != 0.0) throw std::invalid_argument("solver 1 cannot hold asset D");
  } else {
    if (productivity < params.delta_lo - kTol || productivity > params.delta_hi + kTol)
      throw std::invalid_argument("solver 2 productivity outside [delta_lo, delta_hi]");
    if (inv_b != 0.0) throw std::invalid_argument("solver 2 cannot hold asset B");
  }
  if (inv_b < 0.0 || inv_d < 0.0) throw std::invalid_argument("inventory must be nonnegative");
}

Quantities production_unchecked(const MarketParams& params, SolverId id, double productivity,
                                const Matching& m, ExecutionChoice execution) {
  const bool wins1 = m.order1_winner == id;
  const bool wins2 = m.order2_winner == id;
  if (wins1 && wins2) {
    if (execution == ExecutionChoice::Alt && params.ext)
      return {params.ext->k * params.beta_lo, params.ext->tau * params.delta_lo};
    if (id == SolverId::One) return {params.g * productivity, params.g * params.delta_lo};
    return {params.g * params.beta_lo, params.g * productivity};
  }
  if (id == SolverId::One) {
    if (wins1) return {productivity, 0.0};
    if (wins2) return {0.0, params.delta_lo};
    return {};
  }
  if (wins2) return {0.0, productivity};
  if (wins1) return {params.beta_lo, 0.0};
  return {};
}

Quantities production(const MarketParams& params, const SolverState& solver, const Matching& matching,
                      ExecutionChoice execution) {
  if (execution == ExecutionChoice::Alt) {
    if (!params.ext) throw std::invalid_argument("alternative execution requires the extension parameters");
    if (!matching.wins_both(solver.id))
      throw std::invalid_argument("alternative execution requires winning both orders");
  }
  return production_unchecked(params, solver.id, solver.productivity, matching, execution);
}

std::vector<Violation> feasibility_check(const MarketParams& params, const SolverState& s1, const SolverState& s2,
                                         const Matching& matching, const Delivery& delivery, ExecutionChoice exec1,
                                         ExecutionChoice exec2) {
  std::vector<Violation> out;
  auto check = [&](const SolverState& s, ExecutionChoice exec) {
    if (exec == ExecutionChoice::Alt && !(params.ext && matching.wins_both(s.id))) exec = ExecutionChoice::Standard;
    const Quantities prod = production_unchecked(params, s.id, s.productivity, matching, exec);
    const std::string tag = s.id == SolverId::One ? "1" : "2";
    const double xb = delivery.b_of(s.id);
    const double xd = delivery.d_of(s.id);
    const double lim_b = prod.b + s.inv_b;
    const double lim_d = prod.d + s.inv_d;
    if (xb > lim_b + kTol) out.push_back({"x" + tag + "_b <= production_b + inv_b", lim_b, xb});
    if (xd > lim_d + kTol) out.push_back({"x" + tag + "_d <= production_d + inv_d", lim_d, xd});
    if (xb < -kTol) out.push_back({"x" + tag + "_b >= 0", 0.0, xb});
    if (xd < -kTol) out.push_back({"x" + tag + "_d >= 0", 0.0, xd});
  };
  check(s1, exec1);
  check(s2, exec2);
  return out;
}

double payoff_unchecked(const MarketParams& params, SolverId id, double productivity, const Matching& matching,
                        const Delivery& delivery, ExecutionChoice execution) {
  const Quantities prod = production_unchecked(params, id, productivity, matching, execution);
  return (prod.b - delivery.b_of(id)) + params.p_db * (prod.d - delivery.d_of(id));
}

double solver_payoff(const MarketParams& params, const SolverState& solver, const Matching& matching,
                     const Delivery& delivery, ExecutionChoice execution) {
  const Quantities prod = production(params, solver, matching, execution);
  const double xb = delivery.b_of(solver.id);
  const double xd = delivery.d_of(solver.id);
  if (xb < -kTol || xd < -kTol) throw std::invalid_argument("negative delivery");
  if (xb > prod.b + solver.inv_b + kTol || xd > prod.d + solver.inv_d + kTol)
    throw std::invalid_argument("delivery exceeds production plus inventory for solver " + to_string(solver.id));
  return (prod.b - xb) + params.p_db * (prod.d - xd);
}

std::pair<double, double> trader_utilities(const Delivery& d) { return {d.x1_b + d.x2_b, d.x1_d + d.x2_d}; }

std::string to_string(SolverId id) { return id == SolverId::One ? "1" : "2"; }

std::string to_string(const Matching& m) {
  return "{" + to_string(m.order1_winner) + "," + to_string(m.order2_winner) + "}";
}

}  // namespace intent_lab
