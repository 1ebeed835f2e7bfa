#pragma once

#include "klan/sim/types.hpp"

namespace klan::sim {

// Ground-truth expectations, closed form. These never sample; tests verify
// them against brute-force enumeration and Monte-Carlo.

// E[max(0, N(mean, sd))]
double truncated_normal_mean(double mean, double sd);

// Expected usage of one session given the match outcome (marginal over the
// drop-off mixture and the usage noise).
double expected_session_usage(const SimConfig& cfg, const UserProfile& user,
                              int page, bool match);

// probability an entry "matches" page k: trigger routing plus interest marginal
double match_probability(const SimConfig& cfg, const UserProfile& user, int page);

// Expected usage of one entry when the policy always lands page k, interest
// marginalized over its stationary (affinity-proportional) distribution.
double expected_entry_usage(const SimConfig& cfg, const UserProfile& user,
                            int page);

enum class ControlKind {
  kLastExit,       // frozen first page, uniform marginal over pages
  kUniformRandom,  // uniform page each entry
  kFixedPage,
};

// Per-day individual treatment effect of always landing on `page` versus the
// control behavior, in seconds of daily usage.
double true_ite(const SimConfig& cfg, const UserProfile& user, int page,
                ControlKind control = ControlKind::kLastExit,
                int control_page = 0);

}  // namespace klan::sim
