#pragma once

#include <functional>
#include <vector>

#include "klan/rng.hpp"
#include "klan/sim/types.hpp"

namespace klan::sim {

// What a landing policy gets to see when an entry happens. The rng is private
// to (arm, user, day, entry), so stochastic policies stay reproducible and
// two arms never perturb each other's draws.
struct EntryContext {
  const UserProfile& user;
  int day;
  int entry_index;
  int hour;
  bool trigger_active;
  RngStream& rng;
};

using PolicyFn = std::function<int(const EntryContext&)>;
// Invoked right after each session, before the same user's next entry, so
// stateful policies can track what happened earlier today.
using SessionCallback = std::function<void(const SessionLog&)>;

// Simulates one day for every user. World randomness (entry counts and
// hours, interest drift, triggers, session noise) is keyed by
// (seed, user, day, entry) only, so simulations with different policies are
// exactly paired: the policy changes the landing page and nothing else.
// `arm_salt` isolates the policy's own rng between arms.
//
// Output is sorted by (day, hour, user_id, entry_index).
std::vector<SessionLog> simulate_day(const SimConfig& cfg,
                                     const TrafficModel& traffic,
                                     const std::vector<UserProfile>& users,
                                     int day, const PolicyFn& policy,
                                     std::uint64_t arm_salt = 0,
                                     const SessionCallback& on_session = nullptr);

// Entry-count distribution: P(1) = 1 - multi_entry_prob, remainder split over
// 2..5 with fixed shape. Exposed for the oracle.
int sample_entry_count(double multi_entry_prob, double u01);
double expected_entries_per_day(double multi_entry_prob);

// interest redraw distribution: affinity-proportional
std::vector<double> interest_distribution(const UserProfile& user);

}  // namespace klan::sim
