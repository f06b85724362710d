#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace intent_lab {

// Tolerance for boundary comparisons on delivered quantities.
inline constexpr double kTol = 1e-9;

enum class SolverId : int { One = 1, Two = 2 };

inline int index_of(SolverId id) { return id == SolverId::One ? 0 : 1; }
inline SolverId other(SolverId id) { return id == SolverId::One ? SolverId::Two : SolverId::One; }

enum class ExecutionChoice { Standard, Alt };

struct ExecutionExt {
  double k = 0.0;    // B multiplier of the alternative execution
  double tau = 0.0;  // D multiplier of the alternative execution
};

// Raised when a parameter set breaks one of its bounds; `field` names the offending bound.
class ParamError : public std::invalid_argument {
 public:
  ParamError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct MarketParams {
  double beta_lo = 1.0;
  double beta_hi = 3.0;
  double delta_lo = 1.0;
  double delta_hi = 3.0;
  double g = 1.5;
  double p_db = 1.0;
  std::optional<ExecutionExt> ext;

  // Throws ParamError on the first violated bound.
  void validate() const;

  // Standard batched production at the weak-side floor: g*beta_lo and g*delta_lo.
  double g_beta_lo() const { return g * beta_lo; }
  double g_delta_lo() const { return g * delta_lo; }
};

struct SolverState {
  SolverId id = SolverId::One;
  double productivity = 0.0;  // beta for solver 1, delta for solver 2
  double inv_b = 0.0;
  double inv_d = 0.0;

  void validate(const MarketParams& params) const;
};

struct Matching {
  SolverId order1_winner = SolverId::One;
  SolverId order2_winner = SolverId::Two;

  bool wins_both(SolverId id) const { return order1_winner == id && order2_winner == id; }
  bool operator==(const Matching&) const = default;
};

struct Delivery {
  double x1_b = 0.0;
  double x1_d = 0.0;
  double x2_b = 0.0;
  double x2_d = 0.0;

  double b_of(SolverId id) const { return id == SolverId::One ? x1_b : x2_b; }
  double d_of(SolverId id) const { return id == SolverId::One ? x1_d : x2_d; }
  bool operator==(const Delivery&) const = default;
};

struct Quantities {
  double b = 0.0;
  double d = 0.0;
  bool operator==(const Quantities&) const = default;
};

struct Violation {
  std::string bound;
  double limit = 0.0;
  double actual = 0.0;
};

struct Outcome {
  Matching matching;
  Delivery delivery;
  std::optional<double> payoff1;  // present when solver types are known
  std::optional<double> payoff2;
  double u1 = 0.0;
  double u2 = 0.0;
  double total_value = 0.0;
  std::vector<Violation> violations;  // capacity breaches of the winning bids, if any
};

Quantities production(const MarketParams& params, const SolverState& solver, const Matching& matching,
                      ExecutionChoice execution = ExecutionChoice::Standard);

// Empty result means the delivery is feasible for the matching.
std::vector<Violation> feasibility_check(const MarketParams& params, const SolverState& solver1,
                                         const SolverState& solver2, const Matching& matching,
                                         const Delivery& delivery,
                                         ExecutionChoice exec1 = ExecutionChoice::Standard,
                                         ExecutionChoice exec2 = ExecutionChoice::Standard);

// Throws std::invalid_argument when the solver's own deliveries exceed what it can supply.
double solver_payoff(const MarketParams& params, const SolverState& solver, const Matching& matching,
                     const Delivery& delivery, ExecutionChoice execution = ExecutionChoice::Standard);

std::pair<double, double> trader_utilities(const Delivery& delivery);

// Unchecked hot-path variants used by the deviation search.
Quantities production_unchecked(const MarketParams& params, SolverId id, double productivity,
                                const Matching& matching, ExecutionChoice execution);
double payoff_unchecked(const MarketParams& params, SolverId id, double productivity, const Matching& matching,
                        const Delivery& delivery, ExecutionChoice execution);

std::string to_string(SolverId id);
std::string to_string(const Matching& m);

}  // namespace intent_lab
