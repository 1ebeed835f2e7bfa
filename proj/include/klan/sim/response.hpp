#pragma once

#include "klan/rng.hpp"
#include "klan/sim/types.hpp"

namespace klan::sim {

struct SessionOutcome {
  double usage_seconds = 0.0;
  int page_switches = 0;
  bool dropped_off = false;
};

// Pure pieces of the response model, shared with the expectation oracle.
// affinity_term in [0, 1+]: w_static * affinity[page] + w_dynamic * match.
double affinity_term(const SimConfig& cfg, const UserProfile& user, int page,
                     bool match);
double mean_usage(const SimConfig& cfg, const UserProfile& user, int page,
                  bool match);
double drop_prob(const SimConfig& cfg, const UserProfile& user, int page,
                 bool match);
// target page of the entry: the trigger page when a trigger fired, otherwise
// the user's current hidden interest
bool is_match(const UserProfile& user, int page, int hidden_interest,
              bool trigger_active);

// Samples one session. Consumes a fixed number of draws from rng so paired
// simulations stay aligned whatever page the policy chose.
SessionOutcome session_response(const SimConfig& cfg, const UserProfile& user,
                                int page, int hidden_interest,
                                bool trigger_active, RngStream& rng);

}  // namespace klan::sim
