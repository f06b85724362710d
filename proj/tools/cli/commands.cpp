#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "intent_lab/extensions.hpp"
#include "intent_lab/serialization.hpp"
#include "json.hpp"

namespace intent_lab::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << body;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

MechanismKind mechanism_or_throw(const std::string& name) {
  const auto k = parse_mechanism(name);
  if (!k) {
    std::string names;
    for (MechanismKind m : all_mechanisms()) names += (names.empty() ? "" : ", ") + to_string(m);
    throw std::invalid_argument("unknown mechanism \"" + name + "\" (expected one of " + names + ")");
  }
  return *k;
}

VerifyOptions verify_options(const Config& c) {
  VerifyOptions v;
  v.bid_resolution = c.verify.bid_resolution;
  v.type_points = c.verify.type_points;
  v.quadrature_nodes = c.verify.quadrature_nodes;
  v.mechanism = c.sim.mechanism_options;
  return v;
}

EquilibriumOptions eq_options(const Config& c) {
  EquilibriumOptions o;
  o.fpa.grid_size = c.sim.grid_resolution;
  o.fpa.max_iterations = c.sim.fpa_max_iterations;
  return o;
}

EquilibriumResult equilibrium_for(const Config& c, MechanismKind kind) {
  const EquilibriumOptions o = eq_options(c);
  const MarketParams& p = c.sim.params;
  auto batch = [&] {
    EquilibriumResult r = p.ext ? batch_equilibrium_with_execution_choice(p, c.sim.dists, p.p_db, o).equilibrium
                                : batch_equilibrium(p, c.sim.dists, o);
    if (c.sim.rebalance_share) r = batch_rebalanced(p, r, *c.sim.rebalance_share, o);
    return r;
  };
  switch (kind) {
    case MechanismKind::SimFirstPrice:
    case MechanismKind::SimSecondPrice: return sim_equilibrium(p, c.sim.dists, kind, o);
    case MechanismKind::BatchAuction: return batch();
    case MechanismKind::FairCombFirstPrice: return fair_fp_strategies(p, c.sim.dists, o);
    case MechanismKind::FairCombSecondPrice: {
      EquilibriumResult r = batch();
      r.mechanism = kind;
      return r;
    }
  }
  throw std::logic_error("unhandled mechanism");
}

std::string bid_text(const SolverBid& b) {
  std::ostringstream os;
  os << "q_b=" << format_number(b.q_b) << " q_d=" << format_number(b.q_d) << " Q_b=" << format_number(b.Q_b)
     << " Q_d=" << format_number(b.Q_d);
  if (b.exec == ExecutionChoice::Alt) os << " (alt)";
  return os.str();
}

void print_stats(std::ostream& out, const SummaryStats& stats) {
  out << std::left << std::setw(22) << "mechanism" << std::setw(14) << "mean_u1" << std::setw(14) << "mean_u2"
      << std::setw(14) << "mean_value" << std::setw(12) << "min_u1" << std::setw(12) << "min_u2" << std::setw(10)
      << "viol_1" << std::setw(10) << "viol_2" << "failed\n";
  for (const MechanismStats& s : stats.per_mechanism) {
    out << std::setw(22) << to_string(s.mechanism) << std::setw(14) << format_number(s.mean_u1) << std::setw(14)
        << format_number(s.mean_u2) << std::setw(14) << format_number(s.mean_total_value) << std::setw(12)
        << format_number(s.min_u1) << std::setw(12) << format_number(s.min_u2) << std::setw(10)
        << format_number(s.fairness_violation_rate_1) << std::setw(10) << format_number(s.fairness_violation_rate_2)
        << s.failed << "\n";
    if (s.regime_frequency) {
      out << "  regimes:";
      for (int k = 0; k < 4; ++k)
        out << ' ' << to_string(static_cast<Regime>(k)) << '=' << format_number((*s.regime_frequency)[k]);
      out << "\n";
    }
  }
}

// ---- run ----

struct RunArgs {
  std::string config;
  std::vector<std::string> mechanisms;
  std::string out = "out";
  std::string format = "both";
  std::optional<int> draws;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Config c = load_config(a.config);
  if (!a.mechanisms.empty()) {
    c.sim.mechanisms.clear();
    for (const std::string& m : a.mechanisms) c.sim.mechanisms.push_back(mechanism_or_throw(m));
  }
  if (a.draws) c.sim.n_draws = *a.draws;
  if (a.seed) c.sim.seed = *a.seed;
  c.sim.validate();
  const SimulationResult res = run_monte_carlo(c.sim);
  const fs::path dir(a.out);
  ensure_dir(dir);
  std::vector<std::string> outputs;
  if (a.format == "csv" || a.format == "both") {
    export_results(res, ExportFormat::Csv, (dir / "records.csv").string());
    outputs.push_back((dir / "records.csv").string());
  }
  if (a.format == "json" || a.format == "both") {
    export_results(res, ExportFormat::Json, (dir / "results.json").string());
    outputs.push_back((dir / "results.json").string());
  }
  write_file(dir / "manifest.json", manifest_json(make_manifest(c, "run", outputs)));
  print_stats(out, res.stats);
  for (const MechanismStats& s : res.stats.per_mechanism) {
    const double frac = s.draws > 0 ? static_cast<double>(s.failed) / s.draws : 0.0;
    if (frac > c.max_failure_fraction) {
      err << "numerical failure: " << to_string(s.mechanism) << " did not converge in " << s.failed << " of "
          << s.draws << " draws (allowed fraction " << format_number(c.max_failure_fraction) << ")\n";
      return kNumericalFailure;
    }
  }
  return kOk;
}

// ---- solve ----

struct SolveArgs {
  std::string config;
  double beta = 0.0;
  double delta = 0.0;
  bool json = false;
  bool no_certify = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream&) {
  const Config c = load_config(a.config);
  const MarketParams& p = c.sim.params;
  if (a.beta < p.beta_lo || a.beta > p.beta_hi)
    throw std::invalid_argument("--beta " + format_number(a.beta) + " lies outside [" + format_number(p.beta_lo) +
                                ", " + format_number(p.beta_hi) + "]");
  if (a.delta < p.delta_lo || a.delta > p.delta_hi)
    throw std::invalid_argument("--delta " + format_number(a.delta) + " lies outside [" + format_number(p.delta_lo) +
                                ", " + format_number(p.delta_hi) + "]");
  EquilibriumOptions o = eq_options(c);
  o.epsilon = c.verify.epsilon;
  if (!a.no_certify) o.certify = verify_options(c);
  const EquilibriumResult r = fair_fp_equilibrium(p, a.beta, a.delta, c.sim.dists, o);
  if (a.json) {
    out << equilibrium_to_json(r) << "\n";
  } else {
    out << "regime: " << to_string(*r.regime) << "\n";
    out << "solver 1 bid: " << bid_text(r.profile->s1) << "\n";
    out << "solver 2 bid: " << bid_text(r.profile->s2) << "\n";
    out << "matching: " << to_string(r.outcome->matching) << "  u1=" << format_number(r.outcome->u1)
        << " u2=" << format_number(r.outcome->u2) << " total_value=" << format_number(r.outcome->total_value) << "\n";
    if (r.certificate) {
      out << "certificate: " << (r.certificate->passed ? "pass" : "FAIL") << " max_gain="
          << format_number(r.certificate->max_gain) << " epsilon=" << format_number(r.certificate->epsilon)
          << " deviations=" << r.certificate->deviations_checked << "\n";
    }
  }
  return r.certificate && !r.certificate->passed ? kCertificateFailed : kOk;
}

// ---- verify ----

struct VerifyArgs {
  std::string config;
  std::string mechanism;
  std::optional<double> epsilon;
  double perturb = 0.0;
  std::string stage1 = "increasing";
  bool json = false;
};

FirstStageStrategy parse_stage1(const std::string& text, const MarketParams& p, const TypeDistribution& beta) {
  FirstStageStrategy fs;
  fs.solver = SolverId::One;
  fs.types = uniform_grid(beta.lo, beta.upper(), 25);
  for (double t : fs.types) {
    if (text == "increasing") {
      const double s = (t - beta.lo) / (beta.upper() - beta.lo);
      fs.bid_b.push_back(p.beta_lo * (0.25 + 0.5 * s));
      fs.bid_d.push_back(0.5 * p.delta_lo);
    } else if (text.rfind("constant:", 0) == 0) {
      const std::string rest = text.substr(9);
      const auto comma = rest.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("--stage1 constant needs b,d");
      std::size_t used = 0;
      const double b = std::stod(rest.substr(0, comma), &used);
      const double d = std::stod(rest.substr(comma + 1));
      if (b < 0.0 || d < 0.0) throw std::invalid_argument("--stage1 bids must be >= 0");
      fs.bid_b.push_back(b);
      fs.bid_d.push_back(d);
    } else {
      throw std::invalid_argument("--stage1 must be \"increasing\" or \"constant:b,d\"");
    }
  }
  return fs;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream&) {
  const Config c = load_config(a.config);
  const MarketParams& p = c.sim.params;
  const double eps = a.epsilon.value_or(c.verify.epsilon);
  if (!(eps >= 0.0)) throw std::invalid_argument("--epsilon must be >= 0");

  if (a.mechanism == "Sequential") {
    const FirstStageStrategy fs = parse_stage1(a.stage1, p, c.sim.dists.beta);
    const SequentialCheckResult r = sequential_deviation_check(p, c.sim.dists, fs, 25, eq_options(c));
    if (a.json) {
      nlohmann::ordered_json j{{"verdict", to_string(r.verdict)},
                               {"type", round_significant(r.type)},
                               {"gain", round_significant(r.gain)},
                               {"payoff_revealing", round_significant(r.payoff_revealing)},
                               {"payoff_deviation", round_significant(r.payoff_deviation)},
                               {"deviation_b", round_significant(r.deviation_b)},
                               {"deviation_d", round_significant(r.deviation_d)},
                               {"stage_two_matches_batch", r.stage_two_matches_batch},
                               {"detail", r.detail}};
      out << j.dump(2) << "\n";
    } else {
      out << "sequential check: " << to_string(r.verdict) << "\n" << r.detail << "\n";
    }
    return r.verdict == SequentialVerdict::Pass ? kOk : kCertificateFailed;
  }

  const MechanismKind kind = mechanism_or_throw(a.mechanism);
  if (!(a.perturb >= 0.0)) throw std::invalid_argument("--perturb must be >= 0");
  EquilibriumResult eq = equilibrium_for(c, kind);
  if (a.perturb > 0.0) {
    // Lower solver 1's own-order component that the mechanism reads.
    const bool sim = kind == MechanismKind::SimFirstPrice || kind == MechanismKind::SimSecondPrice;
    auto base = eq.strategies[0].policy;
    const double d = a.perturb;
    eq.strategies[0].policy = [base, d, sim](double t) {
      SolverBid b = base(t);
      if (sim)
        b.q_b = std::max(0.0, b.q_b - d);
      else
        b.Q_b = std::max(0.0, b.Q_b - d);
      return b;
    };
  }
  const NashCertificate cert = verify_epsilon_nash(p, kind, eq.strategies, eps, verify_options(c));
  if (a.json) {
    eq.certificate = cert;
    out << equilibrium_to_json(eq) << "\n";
  } else {
    out << to_string(kind) << ": " << (cert.passed ? "pass" : "FAIL") << " max_gain=" << format_number(cert.max_gain)
        << " epsilon=" << format_number(eps) << " type_points=" << cert.type_points_checked
        << " deviations=" << cert.deviations_checked << "\n";
    if (!cert.passed && cert.worst) out << "worst deviation: " << describe(*cert.worst) << "\n";
  }
  return cert.passed ? kOk : kCertificateFailed;
}

// ---- sweep ----

struct SweepArgs {
  std::string config;
  std::string param;
  std::string range;
  int steps = 20;
  std::string out = "sweep";
  std::optional<int> draws;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream&) {
  const Config base = load_config(a.config);
  if (a.param != "g" && a.param != "p_db" && a.param != "k" && a.param != "tau")
    throw std::invalid_argument("--param must be one of g, p_db, k, tau (got \"" + a.param + "\")");
  if ((a.param == "k" || a.param == "tau") && !base.sim.params.ext)
    throw std::invalid_argument("--param " + a.param + " needs an extension block in the config");
  const auto colon = a.range.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--range must look like lo:hi");
  const double lo = std::stod(a.range.substr(0, colon));
  const double hi = std::stod(a.range.substr(colon + 1));
  if (!(hi >= lo)) throw std::invalid_argument("--range needs lo <= hi");
  if (a.steps < 2) throw std::invalid_argument("--steps must be >= 2");
  const std::string key = (a.param == "k" || a.param == "tau") ? "extension." + a.param : "market." + a.param;

  std::vector<Config> configs;
  for (int i = 0; i < a.steps; ++i) {
    Config c = base;
    const double v = lo + (hi - lo) * i / (a.steps - 1);
    if (a.param == "g") c.sim.params.g = v;
    if (a.param == "p_db") c.sim.params.p_db = v;
    if (a.param == "k") c.sim.params.ext->k = v;
    if (a.param == "tau") c.sim.params.ext->tau = v;
    if (a.draws) c.sim.n_draws = *a.draws;
    std::vector<MechanismKind> ms{MechanismKind::SimFirstPrice, MechanismKind::BatchAuction,
                                  MechanismKind::FairCombFirstPrice};
    for (MechanismKind m : c.sim.mechanisms)
      if (std::find(ms.begin(), ms.end(), m) == ms.end()) ms.push_back(m);
    c.sim.mechanisms = ms;
    revalidate(c, key);
    configs.push_back(std::move(c));
  }

  const fs::path dir(a.out);
  ensure_dir(dir);
  std::ostringstream csv;
  csv << "param,value,mechanism,mean_u1,mean_u2,mean_total_value,min_u1,min_u2,violation_rate_1,violation_rate_2,failed\n";
  std::ostringstream exec_csv;
  exec_csv << "param,value,execution_regime,threshold_combined,threshold_standard,unfair\n";
  for (const Config& c : configs) {
    const double v = a.param == "g" ? c.sim.params.g
                     : a.param == "p_db" ? c.sim.params.p_db
                     : a.param == "k" ? c.sim.params.ext->k
                                      : c.sim.params.ext->tau;
    const SimulationResult res = run_monte_carlo(c.sim);
    for (const MechanismStats& s : res.stats.per_mechanism) {
      csv << a.param << ',' << format_number(v) << ',' << to_string(s.mechanism) << ',' << format_number(s.mean_u1)
          << ',' << format_number(s.mean_u2) << ',' << format_number(s.mean_total_value) << ','
          << format_number(s.min_u1) << ',' << format_number(s.min_u2) << ','
          << format_number(s.fairness_violation_rate_1) << ',' << format_number(s.fairness_violation_rate_2) << ','
          << s.failed << '\n';
    }
    if (c.sim.params.ext) {
      const ExecutionThresholds t = execution_thresholds(c.sim.params);
      const ExecutionRegime reg = c.sim.params.p_db < t.combined       ? ExecutionRegime::AltDominates
                                  : c.sim.params.p_db > t.standard_above ? ExecutionRegime::StandardDominates
                                                                         : ExecutionRegime::Mixed;
      exec_csv << a.param << ',' << format_number(v) << ',' << to_string(reg) << ',' << format_number(t.combined)
               << ',' << format_number(t.standard_above) << ','
               << (reg == ExecutionRegime::AltDominates ? "true" : "false") << '\n';
    }
  }
  std::vector<std::string> outputs;
  write_file(dir / "sweep.csv", csv.str());
  outputs.push_back((dir / "sweep.csv").string());
  if (base.sim.params.ext) {
    write_file(dir / "execution.csv", exec_csv.str());
    outputs.push_back((dir / "execution.csv").string());
  }
  const MarketParams& p = base.sim.params;
  std::ostringstream map;
  map << "beta,delta,regime\n";
  constexpr int cells = 50;
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) {
      const double beta = p.beta_lo + (i + 0.5) / cells * (p.beta_hi - p.beta_lo);
      const double delta = p.delta_lo + (j + 0.5) / cells * (p.delta_hi - p.delta_lo);
      map << format_number(beta) << ',' << format_number(delta) << ',' << to_string(classify_regime(p, beta, delta))
          << '\n';
    }
  write_file(dir / "regime_map.csv", map.str());
  write_file(dir / "regime_map.svg", regime_map_svg(p, cells));
  outputs.push_back((dir / "regime_map.csv").string());
  outputs.push_back((dir / "regime_map.svg").string());
  write_file(dir / "manifest.json", manifest_json(make_manifest(base, "sweep", outputs)));
  out << "wrote " << outputs.size() << " files to " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trade-intent auction laboratory", "intent_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Monte Carlo run of equilibrium play");
  run_cmd->add_option("config", run.config, "config file")->required();
  run_cmd->add_option("--mechanism", run.mechanisms, "mechanism(s) to run; overrides the config");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--format", run.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  run_cmd->add_option("--draws", run.draws, "override simulation.n_draws");
  run_cmd->add_option("--seed", run.seed, "override simulation.seed");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Fair combinatorial first-price equilibrium at one type pair");
  solve_cmd->add_option("config", solve.config, "config file")->required();
  solve_cmd->add_option("--beta", solve.beta, "solver 1 type")->required();
  solve_cmd->add_option("--delta", solve.delta, "solver 2 type")->required();
  solve_cmd->add_flag("--json", solve.json, "machine-readable output");
  solve_cmd->add_flag("--no-certify", solve.no_certify, "skip the deviation search");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Certify equilibrium strategies by deviation search");
  verify_cmd->add_option("config", verify.config, "config file")->required();
  verify_cmd->add_option("--mechanism", verify.mechanism, "mechanism name or Sequential")->required();
  verify_cmd->add_option("--epsilon", verify.epsilon, "certificate tolerance");
  verify_cmd->add_option("--perturb", verify.perturb, "lower solver 1's own-order bid by this amount");
  verify_cmd->add_option("--stage1", verify.stage1, "Sequential first stage: increasing or constant:b,d");
  verify_cmd->add_flag("--json", verify.json, "machine-readable output");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep with regime map");
  sweep_cmd->add_option("config", sweep.config, "config file")->required();
  sweep_cmd->add_option("--param", sweep.param, "g, p_db, k or tau")->required();
  sweep_cmd->add_option("--range", sweep.range, "lo:hi")->required();
  sweep_cmd->add_option("--steps", sweep.steps, "number of steps");
  sweep_cmd->add_option("--out", sweep.out, "output directory");
  sweep_cmd->add_option("--draws", sweep.draws, "override simulation.n_draws");

  std::vector<const char*> argv;
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*run_cmd) return cmd_run(run, out, err);
    if (*solve_cmd) return cmd_solve(solve, out, err);
    if (*verify_cmd) return cmd_verify(verify, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParamError& e) {
    err << "invalid parameter " << e.field() << ": " << e.what() << "\n";
    return kUsageError;
  } catch (const FpaConvergenceError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace intent_lab::cli
