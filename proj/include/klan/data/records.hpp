#pragma once

#include <vector>

namespace klan::data {

// One uplift-modeling example: features frozen before the observation
// window, treatment id (0 = business-as-usual control, k >= 1 = always land
// page k-1), response = mean daily usage seconds over the window.
struct RctInstance {
  int user_id = 0;
  int treatment = 0;
  double response = 0.0;
  std::vector<double> numeric;   // numeric fields, schema order, raw units
  std::vector<int> categorical;  // categorical fields, schema order
};

// One step of the intra-day decision process: state at an entry, the page
// served, the session's usage as reward, and the state at the user's next
// entry that day. Terminal steps carry a zeroed next state.
struct Transition {
  int user_id = 0;
  int day = 0;
  int hour = 0;
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// One scored session for the blending model: real-time context, long-term
// stats, the page, and whether the session looked "settled" (low switch
// ratio).
struct StreamInstance {
  int user_id = 0;
  int day = 0;
  std::vector<double> context;
  std::vector<double> stats;
  int page = 0;
  int page_switches = 0;
  double usage_seconds = 0.0;
  int label = 0;
};

}  // namespace klan::data
