#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace klan::sim {

// Synthetic user world. Pages are 0-based indices 0..pages-1 everywhere in
// code; uplift datasets additionally use treatment id 0 for "control", so
// treatment id = page index + 1 there.
struct SimConfig {
  int pages = 3;
  int users = 5000;
  std::uint64_t seed = 1;
  double single_page_fraction = 0.58;  // share of dominant-affinity users
  double multi_entry_prob = 0.70;      // P(entries per day >= 2)
  double noise_std = 60.0;             // seconds, session usage noise
  double w_static = 0.6;               // affinity weight in the response
  double w_dynamic = 0.4;              // interest-match weight
  double drift_prob = 0.35;            // per-gap interest drift base rate
  double trigger_prob = 0.15;          // chance an entry is trigger-driven
  int days = 7;
  // second-order knobs
  double switch_rate = 3.0;        // mean page switches when mismatched
  double drop_threshold = 10.0;    // seconds; below this a session is a bounce
  double volatility_scale = 1.0;   // scales every user's volatility (0 = frozen)
};

struct UserProfile {
  int user_id = 0;
  double base_engagement = 0.0;    // seconds, session-scale
  std::vector<double> affinity;    // per page, in [0, 1]
  double volatility = 0.0;         // scales interest drift
  int trigger_page = 0;            // where live triggers point (argmax affinity)
  bool dominant = false;           // archetype: single strong affinity
  int activity_bucket = 0;         // observable profile attribute, 0..7
};

struct SessionLog {
  int user_id = 0;
  int day = 0;
  int hour = 0;
  int entry_index = 0;             // 0-based within (user, day), hour-ordered
  int landing_page = 0;
  double usage_seconds = 0.0;
  int page_switches = 0;
  bool dropped_off = false;
  // observable: the server knows when an entry came from a trigger
  bool trigger_active = false;
  // oracle-only; serialized only when explicitly requested
  int hidden_interest = 0;
};

// Hour-of-day activity weights. Sum is pinned to 24 so the mean weight is 1.
struct TrafficModel {
  std::vector<double> hourly_weight;  // 24 entries

  void validate() const;
};

TrafficModel default_tidal_traffic();

}  // namespace klan::sim
