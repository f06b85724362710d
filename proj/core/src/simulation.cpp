#include "intent_lab/simulation.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "intent_lab/extensions.hpp"
#include "intent_lab/parallel.hpp"
#include "intent_lab/rng.hpp"
#include "json.hpp"

namespace intent_lab {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kBetaStream = 0xb1;
constexpr std::uint64_t kDeltaStream = 0xd1;

void check_support(const TypeDistribution& d, double lo, double hi, const std::string& field) {
  d.validate();
  if (std::abs(d.lo - lo) > kTol || std::abs(d.hi - hi) > kTol)
    throw ParamError(field, "distribution support must equal the market bounds");
}

struct Prepared {
  std::optional<EquilibriumResult> eq;
  std::string error;
};

Prepared prepare(const SimConfig& c, MechanismKind kind) {
  EquilibriumOptions opts;
  opts.fpa.grid_size = c.grid_resolution;
  opts.fpa.max_iterations = c.fpa_max_iterations;
  Prepared out;
  try {
    auto batch = [&] {
      EquilibriumResult r = c.params.ext
                                ? batch_equilibrium_with_execution_choice(c.params, c.dists, c.params.p_db, opts).equilibrium
                                : batch_equilibrium(c.params, c.dists, opts);
      if (c.rebalance_share) r = batch_rebalanced(c.params, r, *c.rebalance_share, opts);
      return r;
    };
    switch (kind) {
      case MechanismKind::SimFirstPrice:
      case MechanismKind::SimSecondPrice: out.eq = sim_equilibrium(c.params, c.dists, kind, opts); break;
      case MechanismKind::BatchAuction: out.eq = batch(); break;
      case MechanismKind::FairCombFirstPrice: out.eq = fair_fp_strategies(c.params, c.dists, opts); break;
      case MechanismKind::FairCombSecondPrice:
        out.eq = batch();
        out.eq->mechanism = MechanismKind::FairCombSecondPrice;
        break;
    }
  } catch (const FpaConvergenceError& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

void SimConfig::validate() const {
  params.validate();
  check_support(dists.beta, params.beta_lo, params.beta_hi, "distributions.beta");
  check_support(dists.delta, params.delta_lo, params.delta_hi, "distributions.delta");
  if (mechanisms.empty()) throw ParamError("simulation.mechanisms", "at least one mechanism is required");
  if (n_draws < 1) throw ParamError("simulation.n_draws", "must be >= 1");
  if (grid_resolution < 64) throw ParamError("simulation.grid_resolution", "must be >= 64");
  if (fpa_max_iterations < 1) throw ParamError("simulation.fpa_max_iterations", "must be >= 1");
  if (rebalance_share && !(*rebalance_share >= 0.0 && *rebalance_share <= 1.0))
    throw ParamError("simulation.rebalance_share", "must lie in [0, 1]");
}

const MechanismStats* SummaryStats::find(MechanismKind kind) const {
  for (const auto& s : per_mechanism)
    if (s.mechanism == kind) return &s;
  return nullptr;
}

SimulationResult run_monte_carlo(const SimConfig& config) {
  config.validate();
  std::vector<Prepared> prepared;
  for (MechanismKind k : config.mechanisms) prepared.push_back(prepare(config, k));

  SimulationResult out;
  out.records.resize(static_cast<std::size_t>(config.n_draws));
  parallel_for(out.records.size(), [&](std::size_t i) {
    DrawRecord& r = out.records[i];
    r.draw = static_cast<std::int64_t>(i);
    r.beta = config.dists.beta.quantile(counter_uniform(config.seed, kBetaStream, i));
    r.delta = config.dists.delta.quantile(counter_uniform(config.seed, kDeltaStream, i));
    for (std::size_t m = 0; m < prepared.size(); ++m) {
      MechanismDraw md;
      md.mechanism = config.mechanisms[m];
      if (!prepared[m].eq) {
        md.converged = false;
      } else {
        md.outcome = prepared[m].eq->outcome_at(config.params, r.beta, r.delta, config.mechanism_options);
        if (md.mechanism == MechanismKind::FairCombFirstPrice)
          md.regime = classify_regime(config.params, r.beta, r.delta);
      }
      r.results.push_back(std::move(md));
    }
  });
  out.stats = summarize(config.params, out.records);
  return out;
}

SummaryStats summarize(const MarketParams& params, const std::vector<DrawRecord>& records) {
  SummaryStats stats;
  if (records.empty()) return stats;
  const std::size_t nm = records.front().results.size();
  for (std::size_t m = 0; m < nm; ++m) {
    MechanismStats s;
    s.mechanism = records.front().results[m].mechanism;
    std::int64_t ok = 0, low1 = 0, low2 = 0;
    std::array<std::int64_t, 4> regimes{};
    double min1 = std::numeric_limits<double>::infinity(), min2 = min1, mint = min1;
    double sum1 = 0.0, sum2 = 0.0, sumt = 0.0;
    for (const DrawRecord& r : records) {
      const MechanismDraw& d = r.results.at(m);
      ++s.draws;
      if (!d.converged) {
        ++s.failed;
        continue;
      }
      ++ok;
      const Outcome& o = d.outcome;
      sum1 += o.u1;
      sum2 += o.u2;
      sumt += o.total_value;
      min1 = std::min(min1, o.u1);
      min2 = std::min(min2, o.u2);
      mint = std::min(mint, o.total_value);
      if (o.u1 < params.beta_lo - kTol) ++low1;
      if (o.u2 < params.delta_lo - kTol) ++low2;
      if (d.regime) ++regimes[static_cast<int>(*d.regime)];
    }
    if (ok > 0) {
      const double n = static_cast<double>(ok);
      s.mean_u1 = sum1 / n;
      s.mean_u2 = sum2 / n;
      s.mean_total_value = sumt / n;
      s.min_u1 = min1;
      s.min_u2 = min2;
      s.min_total_value = mint;
      s.fairness_violation_rate_1 = low1 / n;
      s.fairness_violation_rate_2 = low2 / n;
      if (s.mechanism == MechanismKind::FairCombFirstPrice) {
        std::array<double, 4> f{};
        for (int k = 0; k < 4; ++k) f[k] = regimes[k] / n;
        s.regime_frequency = f;
      }
    }
    stats.per_mechanism.push_back(s);
  }
  return stats;
}

const PairComparison* ComparisonTable::find(MechanismKind first, MechanismKind second) const {
  for (const auto& p : pairs)
    if (p.first == first && p.second == second) return &p;
  return nullptr;
}

ComparisonTable compare_mechanisms(const std::vector<DrawRecord>& records) {
  if (records.empty() || records.front().results.size() < 2)
    throw std::invalid_argument("compare_mechanisms needs records with at least two mechanisms");
  const std::size_t nm = records.front().results.size();
  ComparisonTable t;
  for (std::size_t a = 0; a < nm; ++a) {
    for (std::size_t b = 0; b < nm; ++b) {
      if (a == b) continue;
      PairComparison pc;
      pc.first = records.front().results[a].mechanism;
      pc.second = records.front().results[b].mechanism;
      std::int64_t ge = 0, gt = 0, u1 = 0, u2 = 0;
      double gap = 0.0;
      for (const DrawRecord& r : records) {
        const MechanismDraw& x = r.results.at(a);
        const MechanismDraw& y = r.results.at(b);
        if (!x.converged || !y.converged) continue;
        ++pc.draws;
        const double d = x.outcome.total_value - y.outcome.total_value;
        gap += d;
        if (d >= -kTol) ++ge;
        if (d > kTol) ++gt;
        if (x.outcome.u1 >= y.outcome.u1 - kTol) ++u1;
        if (x.outcome.u2 >= y.outcome.u2 - kTol) ++u2;
      }
      if (pc.draws > 0) {
        const double n = static_cast<double>(pc.draws);
        pc.value_weakly_higher = ge / n;
        pc.value_strictly_higher = gt / n;
        pc.u1_weakly_higher = u1 / n;
        pc.u2_weakly_higher = u2 / n;
        pc.mean_value_gap = gap / n;
      }
      t.pairs.push_back(pc);
    }
  }
  if (const PairComparison* p = t.find(MechanismKind::BatchAuction, MechanismKind::SimFirstPrice))
    t.batch_dominates_sim = p->value_weakly_higher;
  return t;
}

// ---- export ----

double round_significant(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string to_csv(const std::vector<DrawRecord>& records) {
  std::ostringstream os;
  os << "draw,beta,delta,mechanism,regime,u1,u2,total_value,matching,converged\n";
  for (const DrawRecord& r : records) {
    for (const MechanismDraw& d : r.results) {
      os << r.draw << ',' << format_number(r.beta) << ',' << format_number(r.delta) << ',' << to_string(d.mechanism)
         << ',' << (d.regime ? to_string(*d.regime) : "") << ',' << format_number(d.outcome.u1) << ','
         << format_number(d.outcome.u2) << ',' << format_number(d.outcome.total_value) << ",\""
         << to_string(d.outcome.matching) << "\"," << (d.converged ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

namespace {

ojson num(double v) { return round_significant(v); }

ojson outcome_json(const Outcome& o) {
  ojson j;
  j["matching"] = {static_cast<int>(o.matching.order1_winner), static_cast<int>(o.matching.order2_winner)};
  j["delivery"] = {{"x1_b", num(o.delivery.x1_b)},
                   {"x1_d", num(o.delivery.x1_d)},
                   {"x2_b", num(o.delivery.x2_b)},
                   {"x2_d", num(o.delivery.x2_d)}};
  j["payoff1"] = o.payoff1 ? num(*o.payoff1) : ojson(nullptr);
  j["payoff2"] = o.payoff2 ? num(*o.payoff2) : ojson(nullptr);
  j["u1"] = num(o.u1);
  j["u2"] = num(o.u2);
  j["total_value"] = num(o.total_value);
  ojson v = ojson::array();
  for (const Violation& x : o.violations)
    v.push_back({{"bound", x.bound}, {"limit", num(x.limit)}, {"actual", num(x.actual)}});
  j["violations"] = v;
  return j;
}

SolverId solver_from(int v) {
  if (v != 1 && v != 2) throw std::runtime_error("solver index must be 1 or 2");
  return v == 1 ? SolverId::One : SolverId::Two;
}

Outcome outcome_from(const ojson& j) {
  Outcome o;
  o.matching.order1_winner = solver_from(j.at("matching").at(0).get<int>());
  o.matching.order2_winner = solver_from(j.at("matching").at(1).get<int>());
  const ojson& d = j.at("delivery");
  o.delivery = {d.at("x1_b").get<double>(), d.at("x1_d").get<double>(), d.at("x2_b").get<double>(),
                d.at("x2_d").get<double>()};
  if (!j.at("payoff1").is_null()) o.payoff1 = j["payoff1"].get<double>();
  if (!j.at("payoff2").is_null()) o.payoff2 = j["payoff2"].get<double>();
  o.u1 = j.at("u1").get<double>();
  o.u2 = j.at("u2").get<double>();
  o.total_value = j.at("total_value").get<double>();
  for (const ojson& v : j.at("violations"))
    o.violations.push_back({v.at("bound").get<std::string>(), v.at("limit").get<double>(), v.at("actual").get<double>()});
  return o;
}

MechanismKind mechanism_from(const ojson& j) {
  const auto k = parse_mechanism(j.get<std::string>());
  if (!k) throw std::runtime_error("unknown mechanism " + j.get<std::string>());
  return *k;
}

}  // namespace

std::string to_json(const SimulationResult& result) {
  ojson root;
  ojson recs = ojson::array();
  for (const DrawRecord& r : result.records) {
    ojson jr;
    jr["draw"] = r.draw;
    jr["beta"] = num(r.beta);
    jr["delta"] = num(r.delta);
    ojson res = ojson::array();
    for (const MechanismDraw& d : r.results) {
      ojson jd;
      jd["mechanism"] = to_string(d.mechanism);
      jd["regime"] = d.regime ? ojson(to_string(*d.regime)) : ojson(nullptr);
      jd["converged"] = d.converged;
      jd["outcome"] = outcome_json(d.outcome);
      res.push_back(jd);
    }
    jr["results"] = res;
    recs.push_back(jr);
  }
  root["records"] = recs;
  ojson stats = ojson::array();
  for (const MechanismStats& s : result.stats.per_mechanism) {
    ojson js;
    js["mechanism"] = to_string(s.mechanism);
    js["draws"] = s.draws;
    js["failed"] = s.failed;
    js["mean_u1"] = num(s.mean_u1);
    js["min_u1"] = num(s.min_u1);
    js["mean_u2"] = num(s.mean_u2);
    js["min_u2"] = num(s.min_u2);
    js["mean_total_value"] = num(s.mean_total_value);
    js["min_total_value"] = num(s.min_total_value);
    js["fairness_violation_rate_1"] = num(s.fairness_violation_rate_1);
    js["fairness_violation_rate_2"] = num(s.fairness_violation_rate_2);
    if (s.regime_frequency) {
      ojson f;
      for (int k = 0; k < 4; ++k) f[to_string(static_cast<Regime>(k))] = num((*s.regime_frequency)[k]);
      js["regime_frequency"] = f;
    } else {
      js["regime_frequency"] = nullptr;
    }
    stats.push_back(js);
  }
  root["stats"] = stats;
  return root.dump(2) + "\n";
}

SimulationResult simulation_from_json(const std::string& text) {
  const ojson root = ojson::parse(text);
  SimulationResult out;
  for (const ojson& jr : root.at("records")) {
    DrawRecord r;
    r.draw = jr.at("draw").get<std::int64_t>();
    r.beta = jr.at("beta").get<double>();
    r.delta = jr.at("delta").get<double>();
    for (const ojson& jd : jr.at("results")) {
      MechanismDraw d;
      d.mechanism = mechanism_from(jd.at("mechanism"));
      if (!jd.at("regime").is_null()) {
        const auto reg = parse_regime(jd["regime"].get<std::string>());
        if (!reg) throw std::runtime_error("unknown regime");
        d.regime = reg;
      }
      d.converged = jd.at("converged").get<bool>();
      d.outcome = outcome_from(jd.at("outcome"));
      r.results.push_back(std::move(d));
    }
    out.records.push_back(std::move(r));
  }
  for (const ojson& js : root.at("stats")) {
    MechanismStats s;
    s.mechanism = mechanism_from(js.at("mechanism"));
    s.draws = js.at("draws").get<std::int64_t>();
    s.failed = js.at("failed").get<std::int64_t>();
    s.mean_u1 = js.at("mean_u1").get<double>();
    s.min_u1 = js.at("min_u1").get<double>();
    s.mean_u2 = js.at("mean_u2").get<double>();
    s.min_u2 = js.at("min_u2").get<double>();
    s.mean_total_value = js.at("mean_total_value").get<double>();
    s.min_total_value = js.at("min_total_value").get<double>();
    s.fairness_violation_rate_1 = js.at("fairness_violation_rate_1").get<double>();
    s.fairness_violation_rate_2 = js.at("fairness_violation_rate_2").get<double>();
    if (!js.at("regime_frequency").is_null()) {
      std::array<double, 4> f{};
      for (int k = 0; k < 4; ++k) f[k] = js["regime_frequency"].at(to_string(static_cast<Regime>(k))).get<double>();
      s.regime_frequency = f;
    }
    out.stats.per_mechanism.push_back(s);
  }
  return out;
}

void export_results(const SimulationResult& result, ExportFormat format, const std::string& path) {
  const std::string body = format == ExportFormat::Csv ? to_csv(result.records) : to_json(result);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing: " + std::strerror(errno));
  f << body;
  f.flush();
  if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace intent_lab
