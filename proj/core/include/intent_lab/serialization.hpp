#pragma once

#include <string>

#include "intent_lab/equilibrium.hpp"

namespace intent_lab {

// Flat object with keys q1_b, q1_d, q2_b, q2_d, Q1_b, Q1_d, Q2_b, Q2_d (plus exec1/exec2 when alt).
std::string bid_profile_to_json(const BidProfile& bids);
BidProfile bid_profile_from_json(const std::string& text);

std::string outcome_to_json(const Outcome& outcome);
Outcome outcome_from_json(const std::string& text);

// Strategies as sampled tables on their grids, regime label and certificate summary.
std::string equilibrium_to_json(const EquilibriumResult& result);

}  // namespace intent_lab
