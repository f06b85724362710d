#include "intent_lab/serialization.hpp"

#include <cmath>
#include <stdexcept>

#include "intent_lab/simulation.hpp"
#include "json.hpp"

namespace intent_lab {

using ojson = nlohmann::ordered_json;

namespace {

ojson num(double v) { return round_significant(v); }

const char* exec_name(ExecutionChoice e) { return e == ExecutionChoice::Alt ? "alt" : "standard"; }

ExecutionChoice exec_from(const std::string& s) {
  if (s == "alt") return ExecutionChoice::Alt;
  if (s == "standard") return ExecutionChoice::Standard;
  throw std::invalid_argument("unknown execution " + s);
}

double nonneg(const ojson& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(key) + " must be finite and >= 0");
  return v;
}

ojson bid_json(const SolverBid& b) {
  ojson j{{"q_b", num(b.q_b)}, {"q_d", num(b.q_d)}, {"Q_b", num(b.Q_b)}, {"Q_d", num(b.Q_d)}};
  if (b.exec == ExecutionChoice::Alt) j["exec"] = "alt";
  return j;
}

}  // namespace

std::string bid_profile_to_json(const BidProfile& b) {
  ojson j{{"q1_b", num(b.s1.q_b)}, {"q1_d", num(b.s1.q_d)}, {"q2_b", num(b.s2.q_b)}, {"q2_d", num(b.s2.q_d)},
          {"Q1_b", num(b.s1.Q_b)}, {"Q1_d", num(b.s1.Q_d)}, {"Q2_b", num(b.s2.Q_b)}, {"Q2_d", num(b.s2.Q_d)}};
  if (b.s1.exec == ExecutionChoice::Alt) j["exec1"] = exec_name(b.s1.exec);
  if (b.s2.exec == ExecutionChoice::Alt) j["exec2"] = exec_name(b.s2.exec);
  return j.dump();
}

BidProfile bid_profile_from_json(const std::string& text) {
  const ojson j = ojson::parse(text);
  BidProfile b;
  b.s1 = {nonneg(j, "q1_b"), nonneg(j, "q1_d"), nonneg(j, "Q1_b"), nonneg(j, "Q1_d")};
  b.s2 = {nonneg(j, "q2_b"), nonneg(j, "q2_d"), nonneg(j, "Q2_b"), nonneg(j, "Q2_d")};
  if (j.contains("exec1")) b.s1.exec = exec_from(j["exec1"].get<std::string>());
  if (j.contains("exec2")) b.s2.exec = exec_from(j["exec2"].get<std::string>());
  return b;
}

std::string outcome_to_json(const Outcome& o) {
  ojson j;
  j["matching"] = to_string(o.matching);
  j["x1_b"] = num(o.delivery.x1_b);
  j["x1_d"] = num(o.delivery.x1_d);
  j["x2_b"] = num(o.delivery.x2_b);
  j["x2_d"] = num(o.delivery.x2_d);
  j["u1"] = num(o.u1);
  j["u2"] = num(o.u2);
  j["total_value"] = num(o.total_value);
  if (o.payoff1) j["payoff1"] = num(*o.payoff1);
  if (o.payoff2) j["payoff2"] = num(*o.payoff2);
  if (!o.violations.empty()) {
    ojson v = ojson::array();
    for (const Violation& x : o.violations)
      v.push_back({{"bound", x.bound}, {"limit", num(x.limit)}, {"actual", num(x.actual)}});
    j["violations"] = v;
  }
  return j.dump();
}

Outcome outcome_from_json(const std::string& text) {
  const ojson j = ojson::parse(text);
  Outcome o;
  const std::string m = j.at("matching").get<std::string>();
  if (m.size() != 5 || m[0] != '{' || m[2] != ',' || m[4] != '}' || (m[1] != '1' && m[1] != '2') ||
      (m[3] != '1' && m[3] != '2'))
    throw std::invalid_argument("matching must look like {1,2}");
  o.matching.order1_winner = m[1] == '1' ? SolverId::One : SolverId::Two;
  o.matching.order2_winner = m[3] == '1' ? SolverId::One : SolverId::Two;
  o.delivery = {j.at("x1_b").get<double>(), j.at("x1_d").get<double>(), j.at("x2_b").get<double>(),
                j.at("x2_d").get<double>()};
  o.u1 = j.at("u1").get<double>();
  o.u2 = j.at("u2").get<double>();
  o.total_value = j.at("total_value").get<double>();
  if (j.contains("payoff1")) o.payoff1 = j["payoff1"].get<double>();
  if (j.contains("payoff2")) o.payoff2 = j["payoff2"].get<double>();
  if (j.contains("violations"))
    for (const ojson& v : j["violations"])
      o.violations.push_back({v.at("bound").get<std::string>(), v.at("limit").get<double>(), v.at("actual").get<double>()});
  return o;
}

std::string equilibrium_to_json(const EquilibriumResult& r) {
  ojson j;
  j["mechanism"] = to_string(r.mechanism);
  j["regime"] = r.regime ? ojson(to_string(*r.regime)) : ojson(nullptr);
  if (r.types) j["types"] = {{"beta", num(r.types->beta)}, {"delta", num(r.types->delta)}};
  if (r.profile) j["profile"] = ojson::parse(bid_profile_to_json(*r.profile));
  if (r.outcome) j["outcome"] = ojson::parse(outcome_to_json(*r.outcome));
  ojson strategies = ojson::array();
  for (const Strategy& s : r.strategies) {
    ojson js;
    js["solver"] = static_cast<int>(s.solver);
    ojson rows = ojson::array();
    if (s.policy) {
      const Strategy::Table t = s.tabulate();
      for (std::size_t i = 0; i < t.types.size(); ++i) {
        ojson row = bid_json(t.bids[i]);
        row["type"] = num(t.types[i]);
        rows.push_back(row);
      }
    }
    js["table"] = rows;
    strategies.push_back(js);
  }
  j["strategies"] = strategies;
  if (r.certificate) {
    const NashCertificate& c = *r.certificate;
    ojson jc{{"epsilon", num(c.epsilon)},
             {"max_gain", num(c.max_gain)},
             {"passed", c.passed},
             {"deviations_checked", c.deviations_checked},
             {"type_points_checked", c.type_points_checked}};
    if (c.worst) {
      jc["worst_deviation"] = {{"solver", static_cast<int>(c.worst->solver)},
                               {"type", num(c.worst->type)},
                               {"bid", bid_json(c.worst->bid)},
                               {"payoff_equilibrium", num(c.worst->payoff_equilibrium)},
                               {"payoff_deviation", num(c.worst->payoff_deviation)},
                               {"gain", num(c.worst->gain)}};
    } else {
      jc["worst_deviation"] = nullptr;
    }
    j["certificate"] = jc;
  } else {
    j["certificate"] = nullptr;
  }
  if (r.transformed_solution) {
    const FpaSolution& f = *r.transformed_solution;
    j["transformed_solution"] = {{"V", num(f.V)},
                                 {"lower", num(f.lower)},
                                 {"max_bid", num(f.max_bid)},
                                 {"converged", f.converged},
                                 {"residual", num(f.residual)}};
  }
  return j.dump(2);
}

}  // namespace intent_lab
