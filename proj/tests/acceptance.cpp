// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "intent_lab/extensions.hpp"
#include "intent_lab/fpa.hpp"
#include "intent_lab/rng.hpp"
#include "intent_lab/simulation.hpp"

using namespace intent_lab;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream note;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) note << "failed: " << what << "; ";
    ok = ok && cond;
  }
};

int failures = 0;

void report(int id, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.note << "exception: " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.ok) ++failures;
  std::printf("criterion %d: %s (%.1f s) %s\n", id, c.ok ? "PASS" : "FAIL", secs, c.note.str().c_str());
  std::fflush(stdout);
}

MarketParams baseline() { return MarketParams{}; }

MarketParams execution_params(double p_db) {
  MarketParams p;
  p.beta_hi = 2.0;
  p.delta_hi = 2.0;
  p.p_db = p_db;
  p.ext = ExecutionExt{4.0, 0.5};
  return p;
}

SimConfig sim_config(const MarketParams& p, std::vector<MechanismKind> ms, int draws, std::uint64_t seed) {
  SimConfig c;
  c.params = p;
  c.dists = uniform_types(p);
  c.mechanisms = std::move(ms);
  c.n_draws = draws;
  c.seed = seed;
  return c;
}

std::vector<double> grid50(double lo, double hi) {
  std::vector<double> v(50);
  for (int i = 0; i < 50; ++i) v[i] = lo + (hi - lo) * i / 49.0;
  return v;
}

const Matching kSpecialized{SolverId::One, SolverId::Two};

// ---- 1 ----
void simultaneous(Check& c) {
  const MarketParams p = baseline();
  for (MechanismKind k : {MechanismKind::SimFirstPrice, MechanismKind::SimSecondPrice}) {
    const SimulationResult r = run_monte_carlo(sim_config(p, {k}, 1000, 1));
    int bad = 0;
    for (const DrawRecord& d : r.records) {
      const Outcome& o = d.results[0].outcome;
      if (!(o.matching == kSpecialized) || o.u1 != 1.0 || o.u2 != 1.0) ++bad;
    }
    c.require(bad == 0, to_string(k) + " outcome off in " + std::to_string(bad) + " draws");
    const EquilibriumResult eq = sim_equilibrium(p, uniform_types(p), k);
    VerifyOptions v;
    v.bid_resolution = 200;
    v.type_points = 5;
    const NashCertificate cert = verify_epsilon_nash(p, k, eq.strategies, 1e-9, v);
    c.require(cert.passed, to_string(k) + " certificate gain " + std::to_string(cert.max_gain));
    c.note << to_string(k) << " gain=" << cert.max_gain << " ";
  }
}

// ---- 2 ----
void batch(Check& c) {
  const MarketParams p = baseline();
  const TypeDistributions d = uniform_types(p);
  const EquilibriumResult eq = batch_equilibrium(p, d);
  const SimulationResult r = run_monte_carlo(sim_config(p, {MechanismKind::BatchAuction}, 1000, 2));
  int off_pins = 0, low_value = 0;
  for (const DrawRecord& rec : r.records) {
    const BidProfile b = eq.profile_at(rec.beta, rec.delta);
    if (b.s2.Q_b != p.g_beta_lo() || b.s1.Q_d != p.g_delta_lo()) ++off_pins;
    if (rec.results[0].outcome.total_value < p.g_beta_lo() + p.p_db * p.g_delta_lo()) ++low_value;
  }
  c.require(off_pins == 0, "pinned components differ");
  c.require(low_value == 0, "total value below the floor");

  const auto u = TypeDistribution::uniform(1.0, 3.0);
  const FpaSolution s = solve_asymmetric_fpa(u, u);
  double sup = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 1.0 + 2.0 * i / 2000.0;
    sup = std::max({sup, std::abs(s.bid(0, t) - (1.0 + t) / 2.0), std::abs(s.bid(1, t) - (1.0 + t) / 2.0)});
  }
  c.require(s.converged && sup <= 1e-6, "symmetric solver sup error " + std::to_string(sup));
  c.note << "fpa_sup=" << sup << " ";

  VerifyOptions v;
  v.bid_resolution = 200;
  v.type_points = 4;
  double prev = 1e300;
  for (int res : {50, 100, 200}) {
    const std::array<Strategy, 2> disc{eq.strategies[0].discretized(res), eq.strategies[1].discretized(res)};
    const NashCertificate cert = verify_epsilon_nash(p, MechanismKind::BatchAuction, disc, 1e-3, v);
    c.require(cert.passed, "certificate at strategy grid " + std::to_string(res));
    c.require(cert.max_gain <= prev + 1e-12, "gain grew at strategy grid " + std::to_string(res));
    prev = cert.max_gain;
    c.note << "gain@" << res << "=" << cert.max_gain << " ";
  }
  const NashCertificate exact = verify_epsilon_nash(p, MechanismKind::BatchAuction, eq.strategies, 1e-3, v);
  c.require(exact.passed && exact.max_gain <= prev + 1e-12, "exact strategies certificate");
  c.note << "gain@exact=" << exact.max_gain;
}

// ---- 3 ----
EquilibriumResult unfair_batch(const MarketParams& p) {
  return batch_rebalanced(p, batch_equilibrium(p, uniform_types(p)), 0.0);
}

void unfairness(Check& c) {
  const MarketParams p = baseline();
  const EquilibriumResult canonical = batch_equilibrium(p, uniform_types(p));
  const EquilibriumResult shifted = unfair_batch(p);
  const double beta = 1.2, delta = 2.8;
  const Outcome a = canonical.outcome_at(p, beta, delta);
  const Outcome b = shifted.outcome_at(p, beta, delta);
  c.require(b.matching.wins_both(SolverId::Two), "solver 2 should win the exhibit draw");
  c.require(b.u1 < p.beta_lo, "u1 not below beta_lo");
  c.require(std::abs(a.total_value - b.total_value) < 1e-12, "bid value changed");
  c.note << "u1=" << b.u1 << " value=" << b.total_value << " ";
  VerifyOptions v;
  v.bid_resolution = 200;
  v.type_points = 4;
  const NashCertificate cert = verify_epsilon_nash(p, MechanismKind::BatchAuction, shifted.strategies, 1e-3, v);
  c.require(cert.passed, "shifted profile certificate");
  SimConfig sc = sim_config(p, {MechanismKind::BatchAuction}, 1000, 3);
  sc.rebalance_share = 0.0;
  const SimulationResult r = run_monte_carlo(sc);
  const double rate = r.stats.per_mechanism[0].fairness_violation_rate_1;
  c.require(rate > 0.0, "no fairness violations in the family");
  c.note << "gain=" << cert.max_gain << " violation_rate_1=" << rate;
}

// ---- 4 ----
void matching_table(Check& c) {
  MarketParams p = baseline();
  p.p_db = 1.2;
  const double gb = p.g_beta_lo(), gd = p.g_delta_lo();
  CounterRng rng(4, 0);
  int mismatches = 0;
  for (int cell = 0; cell < 4; ++cell) {
    const bool strong1 = cell & 1, strong2 = cell & 2;
    for (int n = 0; n < 100; ++n) {
      const double q1b = strong1 ? rng.uniform(gb, 3 * gb) : rng.uniform(0, gb * (1 - 1e-9));
      const double q2d = strong2 ? rng.uniform(gd, 3 * gd) : rng.uniform(0, gd * (1 - 1e-9));
      const double Q1b = rng.uniform(std::max(q1b, p.beta_lo), 4 * gb);
      const double Q2d = rng.uniform(std::max(q2d, p.delta_lo), 4 * gd);
      const BidProfile b{{q1b, 0.0, Q1b, gd}, {0.0, q2d, gb, Q2d}};
      Matching expect;
      if (!strong1 && !strong2) {
        const SolverId w = Q1b + p.p_db * gd >= gb + p.p_db * Q2d ? SolverId::One : SolverId::Two;
        expect = {w, w};
      } else if (strong1 && !strong2) {
        expect = {SolverId::One, SolverId::One};
      } else if (!strong1 && strong2) {
        expect = {SolverId::Two, SolverId::Two};
      } else {
        expect = kSpecialized;
      }
      if (!(run_fair_comb_first_price(p, b).matching == expect)) ++mismatches;
    }
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " of 400 profiles mismatch");
  c.note << "400 profiles";
}

// ---- 5 ----
void fair_first_price_regimes(Check& c) {
  const MarketParams p = baseline();
  const double gb = p.g_beta_lo(), gd = p.g_delta_lo();
  const EquilibriumResult s = fair_fp_strategies(p, uniform_types(p));
  int cls = 0;
  double min1 = 1e300, min2 = 1e300;
  for (double beta : grid50(p.beta_lo, p.beta_hi))
    for (double delta : grid50(p.delta_lo, p.delta_hi)) {
      const Regime want = beta >= gb ? (delta >= gd ? Regime::Specialization : Regime::UncompetitiveBatchingSolver1)
                                     : (delta >= gd ? Regime::UncompetitiveBatchingSolver2
                                                    : Regime::CompetitiveBatching);
      if (classify_regime(p, beta, delta) != want) ++cls;
      const Outcome o = s.outcome_at(p, beta, delta);
      min1 = std::min(min1, o.u1);
      min2 = std::min(min2, o.u2);
    }
  c.require(cls == 0, "classifier mismatches " + std::to_string(cls));
  c.require(min1 >= gb - 1e-12 && min2 >= gd - 1e-12, "utility floor");
  c.note << "min_u=(" << min1 << "," << min2 << ") ";

  VerifyOptions v;
  v.types1 = {1.2, 1.5, 2.4};
  v.types2 = {1.1, 1.5, 2.8};
  const NashCertificate cert = verify_epsilon_nash(p, MechanismKind::FairCombFirstPrice, s.strategies, 1e-3, v);
  c.require(cert.passed, "certificate gain " + std::to_string(cert.max_gain));
  c.note << "gain=" << cert.max_gain << " ";

  MarketParams flat = p;
  flat.g = 1.0;
  const EquilibriumResult fair1 = fair_fp_strategies(flat, uniform_types(flat));
  const EquilibriumResult sim1 = sim_equilibrium(flat, uniform_types(flat));
  int diff = 0;
  for (double beta : grid50(flat.beta_lo, flat.beta_hi))
    for (double delta : grid50(flat.delta_lo, flat.delta_hi)) {
      const Outcome x = fair1.outcome_at(flat, beta, delta);
      const Outcome y = run_sim_first_price(flat, sim1.profile_at(beta, delta));
      if (!(x.matching == y.matching) || !(x.delivery == y.delivery)) ++diff;
    }
  c.require(diff == 0, "g = 1 differs from simultaneous first price at " + std::to_string(diff) + " points");
}

// ---- 6 ----
void second_price_equivalence(Check& c) {
  const MarketParams p = baseline();
  CounterRng rng(6, 0);
  int diff = 0;
  for (int i = 0; i < 10000; ++i) {
    const BidProfile b{{0, 0, rng.uniform(0, 5), rng.uniform(0, 5)}, {0, 0, rng.uniform(0, 5), rng.uniform(0, 5)}};
    const Outcome x = run_fair_comb_second_price(p, b);
    const Outcome y = run_batch(p, b);
    if (!(x.matching == y.matching) || !(x.delivery == y.delivery) || x.u1 != y.u1 || x.u2 != y.u2) ++diff;
  }
  c.require(diff == 0, std::to_string(diff) + " profiles differ");
  VerifyOptions v;
  v.bid_resolution = 50;
  v.types1 = {1.4, 2.6};
  v.types2 = {1.2, 2.8};
  const NashCertificate cert =
      verify_epsilon_nash(p, MechanismKind::FairCombSecondPrice, unfair_batch(p).strategies, 1e-3, v);
  c.require(cert.passed, "unfair profile under fair-SP gain " + std::to_string(cert.max_gain));
  c.note << "10000 profiles, gain=" << cert.max_gain;
}

// ---- 7 ----
void tradeoff(Check& c) {
  const MarketParams p = baseline();
  const EquilibriumResult fair = fair_fp_strategies(p, uniform_types(p));
  const EquilibriumResult bat = batch_equilibrium(p, uniform_types(p));
  int above = 0, not_strict = 0;
  double min_margin = 1e300;
  for (double beta : grid50(p.beta_lo, p.beta_hi))
    for (double delta : grid50(p.delta_lo, p.delta_hi)) {
      const double vf = fair.outcome_at(p, beta, delta).total_value;
      const double vb = bat.outcome_at(p, beta, delta).total_value;
      if (vf > vb + 1e-12) ++above;
      if (classify_regime(p, beta, delta) != Regime::CompetitiveBatching) {
        min_margin = std::min(min_margin, vb - vf);
        if (vb - vf <= 1e-6) ++not_strict;
      }
    }
  c.require(above == 0, "fair value above batch at " + std::to_string(above) + " points");
  c.require(not_strict == 0, "margin not strict at " + std::to_string(not_strict) + " points");
  c.note << "min strict margin=" << min_margin;
}

// ---- 8 ----
void sequential(Check& c) {
  const MarketParams p = baseline();
  const TypeDistributions d = uniform_types(p);
  CounterRng rng(8, 0);
  int missed = 0;
  for (int s = 0; s < 20; ++s) {
    FirstStageStrategy fs;
    fs.types = uniform_grid(d.beta.lo, d.beta.upper(), 25);
    std::vector<double> inc_b(25), inc_d(25);
    double sb = 0, sd = 0;
    for (int i = 0; i < 25; ++i) {
      sb += 0.01 + rng.uniform();
      sd += 0.01 + rng.uniform();
      inc_b[i] = sb;
      inc_d[i] = sd;
    }
    const double scale_b = rng.uniform(0.2, 0.95) * p.beta_lo / sb;
    const double scale_d = rng.uniform(0.2, 0.95) * p.delta_lo / sd;
    for (int i = 0; i < 25; ++i) {
      fs.bid_b.push_back(inc_b[i] * scale_b);
      fs.bid_d.push_back(inc_d[i] * scale_d);
    }
    if (sequential_deviation_check(p, d, fs, 25).verdict != SequentialVerdict::Counterexample) ++missed;
  }
  c.require(missed == 0, std::to_string(missed) + " increasing strategies not refuted");
  int failed = 0;
  for (auto [b, dd] : {std::pair{0.0, 0.0}, {0.5, 0.5}, {0.9, 0.2}, {0.3, 0.95}}) {
    FirstStageStrategy fs;
    fs.types = uniform_grid(d.beta.lo, d.beta.upper(), 25);
    fs.bid_b.assign(25, b);
    fs.bid_d.assign(25, dd);
    const SequentialCheckResult r = sequential_deviation_check(p, d, fs, 25);
    if (r.verdict != SequentialVerdict::Pass || !r.stage_two_matches_batch) ++failed;
  }
  c.require(failed == 0, std::to_string(failed) + " constant strategies did not pass");
  c.note << "20 increasing refuted, 4 constant pass";
}

// ---- 9 ----
void execution_choice(Check& c) {
  const ExecutionThresholds t = execution_thresholds(execution_params(0.1));
  c.note << "threshold=" << t.combined << " ";
  for (double frac : {0.1, 0.5, 0.99}) {
    const double p_db = frac * t.combined;
    const MarketParams p = execution_params(p_db);
    const SimulationResult r =
        run_monte_carlo(sim_config(p, {MechanismKind::BatchAuction, MechanismKind::FairCombFirstPrice}, 1000, 9));
    int fair_draws = 0;
    double fair_min = 1e300;
    for (const DrawRecord& rec : r.records) {
      if (rec.results[0].outcome.u2 >= p.delta_lo) ++fair_draws;
      fair_min = std::min(fair_min, rec.results[1].outcome.u2);
    }
    c.require(fair_draws == 0, "batch u2 >= delta_lo in some draw at p_db " + std::to_string(p_db));
    c.require(fair_min >= p.g_delta_lo() - 1e-12, "fair-FP min u2 below g*delta_lo at p_db " + std::to_string(p_db));
    c.note << "p_db=" << p_db << ": fair min_u2=" << fair_min << " ";
  }
}

// ---- 10 ----
int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void determinism(Check& c) {
  const std::string bin = INTENT_LAB_BIN;
  const fs::path root = fs::temp_directory_path() / "intent_lab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "cfg.json";
  std::ofstream(cfg) << R"({
  "market": {"beta_lo": 1, "beta_hi": 3, "delta_lo": 1, "delta_hi": 3, "g": 1.5, "p_db": 1},
  "simulation": {"mechanisms": ["SimFirstPrice", "SimSecondPrice", "BatchAuction", "FairCombFirstPrice",
                                "FairCombSecondPrice"], "n_draws": 1000, "seed": 42}
})";
  const std::string quiet = " > /dev/null 2>&1";
  for (const char* d : {"a", "b"}) {
    const std::string threads = std::string(d) == "a" ? "1" : "4";
    const int code = shell("cd " + root.string() + " && SOURCE_DATE_EPOCH=0 INTENT_LAB_THREADS=" + threads + " " +
                           bin + " run cfg.json --out " + d + quiet);
    c.require(code == 0, "run exit code " + std::to_string(code));
  }
  for (const char* f : {"records.csv", "results.json", "manifest.json"}) {
    const std::string x = slurp(root / "a" / f), y = slurp(root / "b" / f);
    // The manifest lists output paths, which name the directory.
    if (std::string(f) == "manifest.json") {
      std::string y2 = y;
      for (std::size_t pos; (pos = y2.find("b/")) != std::string::npos;) y2.replace(pos, 2, "a/");
      c.require(!x.empty() && x == y2, std::string(f) + " differs");
    } else {
      c.require(!x.empty() && x == y, std::string(f) + " differs");
    }
  }
  const std::string base = bin + " ";
  c.require(shell(base + "verify " + cfg.string() + " --mechanism SimFirstPrice --perturb 0.2" + quiet) == 1,
            "exit 1 on certificate failure");
  c.require(shell(base + "run " + cfg.string() + " --mechanism Nope" + quiet) == 2, "exit 2 on usage error");
  std::ofstream(root / "nc.json") << R"({
  "market": {"beta_lo": 1, "beta_hi": 3, "delta_lo": 1, "delta_hi": 3, "g": 1.5, "p_db": 1},
  "simulation": {"mechanisms": ["BatchAuction"], "n_draws": 10, "fpa_max_iterations": 1}
})";
  c.require(shell(base + "run " + (root / "nc.json").string() + " --out " + (root / "nc").string() + quiet) == 3,
            "exit 3 on numerical failure");
  c.note << "byte-identical outputs; exit codes 0/1/2/3";
}

}  // namespace

int main() {
  report(1, simultaneous);
  report(2, batch);
  report(3, unfairness);
  report(4, matching_table);
  report(5, fair_first_price_regimes);
  report(6, second_price_equivalence);
  report(7, tradeoff);
  report(8, sequential);
  report(9, execution_choice);
  report(10, determinism);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
