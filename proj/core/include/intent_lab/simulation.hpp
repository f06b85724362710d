#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intent_lab/equilibrium.hpp"

namespace intent_lab {

struct SimConfig {
  MarketParams params;
  TypeDistributions dists;
  std::vector<MechanismKind> mechanisms{MechanismKind::SimFirstPrice};
  int n_draws = 1000;
  std::uint64_t seed = 0;
  int grid_resolution = 512;             // grid of the first-price auction solver
  int fpa_max_iterations = 10000;        // per-cell fixed-point cap of the same solver
  std::optional<double> rebalance_share; // batch and fair-SP play the rebalanced equilibrium when set
  MechanismOptions mechanism_options;

  // Throws ParamError naming the offending field.
  void validate() const;
};

struct MechanismDraw {
  MechanismKind mechanism = MechanismKind::SimFirstPrice;
  std::optional<Regime> regime;  // fair-FP only
  Outcome outcome;
  bool converged = true;
};

struct DrawRecord {
  std::int64_t draw = 0;
  double beta = 0.0;
  double delta = 0.0;
  std::vector<MechanismDraw> results;  // one per configured mechanism, in config order
};

struct MechanismStats {
  MechanismKind mechanism = MechanismKind::SimFirstPrice;
  std::int64_t draws = 0;
  std::int64_t failed = 0;  // non-converged draws, excluded from the means
  double mean_u1 = 0.0, min_u1 = 0.0;
  double mean_u2 = 0.0, min_u2 = 0.0;
  double mean_total_value = 0.0, min_total_value = 0.0;
  double fairness_violation_rate_1 = 0.0;  // share of draws with u1 below beta_lo
  double fairness_violation_rate_2 = 0.0;  // share of draws with u2 below delta_lo
  std::optional<std::array<double, 4>> regime_frequency;  // Regime enum order, fair-FP only
};

struct SummaryStats {
  std::vector<MechanismStats> per_mechanism;
  const MechanismStats* find(MechanismKind kind) const;
};

struct SimulationResult {
  std::vector<DrawRecord> records;
  SummaryStats stats;
};

SimulationResult run_monte_carlo(const SimConfig& config);
SummaryStats summarize(const MarketParams& params, const std::vector<DrawRecord>& records);

struct PairComparison {
  MechanismKind first = MechanismKind::SimFirstPrice;
  MechanismKind second = MechanismKind::SimFirstPrice;
  std::int64_t draws = 0;
  double value_weakly_higher = 0.0;    // share of draws with total_value(first) >= total_value(second)
  double value_strictly_higher = 0.0;  // margin > kTol
  double u1_weakly_higher = 0.0;
  double u2_weakly_higher = 0.0;
  double mean_value_gap = 0.0;         // mean of total_value(first) - total_value(second)
};

struct ComparisonTable {
  std::vector<PairComparison> pairs;  // every ordered pair of distinct mechanisms
  std::optional<double> batch_dominates_sim;  // share of draws where batch value >= sim first-price value
  const PairComparison* find(MechanismKind first, MechanismKind second) const;
};

// Throws std::invalid_argument when fewer than two mechanisms are present.
ComparisonTable compare_mechanisms(const std::vector<DrawRecord>& records);

enum class ExportFormat { Csv, Json };

std::string to_csv(const std::vector<DrawRecord>& records);
std::string to_json(const SimulationResult& result);
SimulationResult simulation_from_json(const std::string& text);
// Throws std::runtime_error naming the path on I/O failure.
void export_results(const SimulationResult& result, ExportFormat format, const std::string& path);

// Decimal rendering used by every exported number: 12 significant digits.
std::string format_number(double v);
double round_significant(double v);

}  // namespace intent_lab
