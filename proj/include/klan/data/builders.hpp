#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/sim/types.hpp"

namespace klan::data {

// user_id -> treatment id; 0 = control, k >= 1 = always land page k-1
using AssignmentMap = std::unordered_map<int, int>;

// Uplift training examples from an assignment window. Features come only
// from days strictly before window_start (frozen pre-treatment), the
// response is mean daily usage over [window_start, window_start+window_days).
// Every assigned user yields one instance; users without any pre-window
// history get all-zero aggregates.
std::vector<RctInstance> build_daily_rct(const std::vector<sim::SessionLog>& logs,
                                         const std::vector<sim::UserProfile>& users,
                                         const AssignmentMap& assignment,
                                         int pages, int window_start,
                                         int window_days);

// One transition per session: the decision state at the entry, the page as
// action, session usage as (raw) reward, and the state at the user's next
// entry that day. The last entry of a (user, day) is terminal with a zeroed
// next state. Days before emit_from_day only warm up the rolling history.
std::vector<Transition> build_hourly_transitions(
    const std::vector<sim::SessionLog>& logs, int pages, int emit_from_day = 0);

// One stream instance per session; labels are left 0 until
// apply_stream_labels runs with a threshold.
std::vector<StreamInstance> build_stream_instances(
    const std::vector<sim::SessionLog>& logs, int pages, int emit_from_day = 0);

// Median switches-per-usage-second over positive-usage training sessions.
// When the median collapses to zero (over half the sessions never switch)
// falls back to half the smallest positive ratio so the label stays two-sided.
double default_switch_threshold(const std::vector<StreamInstance>& train);

// label = 1 iff the session had usage and switched below threshold
void apply_stream_labels(std::vector<StreamInstance>* instances, double threshold);

// Deterministic user-level split: sorted ids, seeded shuffle, first
// floor(train_fraction * n) go to train.
struct UserSplit {
  std::vector<int> train_ids;
  std::vector<int> eval_ids;
};
UserSplit split_users(std::vector<int> ids, double train_fraction,
                      std::uint64_t seed);

template <typename Record>
void partition_by_user(const std::vector<Record>& all, const UserSplit& split,
                       std::vector<Record>* train, std::vector<Record>* eval) {
  std::unordered_set<int> train_set(split.train_ids.begin(),
                                    split.train_ids.end());
  for (const Record& r : all)
    (train_set.count(r.user_id) ? train : eval)->push_back(r);
}

template <typename Record>
std::vector<int> distinct_user_ids(const std::vector<Record>& rows) {
  std::unordered_set<int> seen;
  std::vector<int> ids;
  for (const Record& r : rows)
    if (seen.insert(r.user_id).second) ids.push_back(r.user_id);
  return ids;
}

}  // namespace klan::data
