#include "klan/data/builders.hpp"

#include <algorithm>
#include <map>

#include "klan/data/history.hpp"
#include "klan/error.hpp"
#include "klan/rng.hpp"

namespace klan::data {

namespace {

// day -> (user -> hour-ordered sessions). std::map keeps days ascending.
using DayIndex = std::map<int, std::map<int, std::vector<const sim::SessionLog*>>>;

DayIndex index_by_day_user(const std::vector<sim::SessionLog>& logs) {
  DayIndex idx;
  for (const auto& s : logs) idx[s.day][s.user_id].push_back(&s);
  for (auto& [day, by_user] : idx)
    for (auto& [uid, sessions] : by_user)
      std::sort(sessions.begin(), sessions.end(),
                [](const sim::SessionLog* a, const sim::SessionLog* b) {
                  return a->entry_index < b->entry_index;
                });
  return idx;
}

std::vector<const sim::SessionLog*> day_slice(
    const std::map<int, std::vector<const sim::SessionLog*>>& by_user) {
  std::vector<const sim::SessionLog*> out;
  for (const auto& [uid, sessions] : by_user)
    out.insert(out.end(), sessions.begin(), sessions.end());
  return out;
}

void ingest(HistoryTracker* tracker,
            const std::vector<const sim::SessionLog*>& sessions) {
  std::vector<sim::SessionLog> copy;
  copy.reserve(sessions.size());
  for (const auto* s : sessions) copy.push_back(*s);
  tracker->ingest_day(copy);
}

}  // namespace

std::vector<RctInstance> build_daily_rct(const std::vector<sim::SessionLog>& logs,
                                         const std::vector<sim::UserProfile>& users,
                                         const AssignmentMap& assignment,
                                         int pages, int window_start,
                                         int window_days) {
  if (window_days <= 0) throw DataError("build_daily_rct: window_days must be > 0");
  std::unordered_map<int, const sim::UserProfile*> profile;
  for (const auto& u : users) profile[u.user_id] = &u;

  HistoryTracker tracker(pages);
  std::unordered_map<int, double> window_usage;
  DayIndex idx = index_by_day_user(logs);
  for (const auto& [day, by_user] : idx) {
    if (day < window_start) {
      ingest(&tracker, day_slice(by_user));
      continue;
    }
    if (day >= window_start + window_days) break;
    for (const auto& [uid, sessions] : by_user)
      for (const auto* s : sessions) window_usage[uid] += s->usage_seconds;
  }

  std::vector<int> assigned;
  assigned.reserve(assignment.size());
  for (const auto& [uid, t] : assignment) assigned.push_back(uid);
  std::sort(assigned.begin(), assigned.end());

  std::vector<RctInstance> out;
  out.reserve(assigned.size());
  for (int uid : assigned) {
    auto pit = profile.find(uid);
    if (pit == profile.end())
      throw DataError("build_daily_rct: assigned user " + std::to_string(uid) +
                      " has no profile");
    int treatment = assignment.at(uid);
    if (treatment < 0 || treatment > pages)
      throw DataError("build_daily_rct: treatment id out of range");
    RctInstance inst;
    inst.user_id = uid;
    inst.treatment = treatment;
    auto wit = window_usage.find(uid);
    inst.response = (wit == window_usage.end() ? 0.0 : wit->second) / window_days;
    inst.numeric = rct_numeric_features(tracker.aggregates(uid, window_start));
    inst.categorical = {pit->second->activity_bucket};
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Transition> build_hourly_transitions(
    const std::vector<sim::SessionLog>& logs, int pages, int emit_from_day) {
  HistoryTracker tracker(pages);
  std::vector<Transition> out;
  DayIndex idx = index_by_day_user(logs);
  for (const auto& [day, by_user] : idx) {
    if (day >= emit_from_day) {
      for (const auto& [uid, sessions] : by_user) {
        auto agg = tracker.aggregates(uid, day);
        IntradayState today(pages);
        for (std::size_t e = 0; e < sessions.size(); ++e) {
          const auto& s = *sessions[e];
          Transition tr;
          tr.user_id = uid;
          tr.day = day;
          tr.hour = s.hour;
          tr.state = intraday_state_features(today, s.hour, s.trigger_active, agg);
          tr.action = s.landing_page;
          tr.reward = s.usage_seconds;
          today.observe(s);
          if (e + 1 < sessions.size()) {
            const auto& nx = *sessions[e + 1];
            tr.next_state = intraday_state_features(today, nx.hour,
                                                    nx.trigger_active, agg);
            tr.terminal = false;
          } else {
            tr.next_state.assign(tr.state.size(), 0.0);
            tr.terminal = true;
          }
          out.push_back(std::move(tr));
        }
      }
    }
    ingest(&tracker, day_slice(by_user));
  }
  return out;
}

std::vector<StreamInstance> build_stream_instances(
    const std::vector<sim::SessionLog>& logs, int pages, int emit_from_day) {
  HistoryTracker tracker(pages);
  std::vector<StreamInstance> out;
  DayIndex idx = index_by_day_user(logs);
  for (const auto& [day, by_user] : idx) {
    if (day >= emit_from_day) {
      for (const auto& [uid, sessions] : by_user) {
        auto agg = tracker.aggregates(uid, day);
        IntradayState today(pages);
        for (const auto* sp : sessions) {
          const auto& s = *sp;
          StreamInstance inst;
          inst.user_id = uid;
          inst.day = day;
          inst.context = stream_context_features(today, s.hour, s.trigger_active);
          inst.stats = stream_stats_features(agg);
          inst.page = s.landing_page;
          inst.page_switches = s.page_switches;
          inst.usage_seconds = s.usage_seconds;
          today.observe(s);
          out.push_back(std::move(inst));
        }
      }
    }
    ingest(&tracker, day_slice(by_user));
  }
  return out;
}

double default_switch_threshold(const std::vector<StreamInstance>& train) {
  std::vector<double> ratios;
  for (const auto& inst : train)
    if (inst.usage_seconds > 0.0)
      ratios.push_back(inst.page_switches / inst.usage_seconds);
  if (ratios.empty())
    throw DataError("default_switch_threshold: no positive-usage sessions");
  std::sort(ratios.begin(), ratios.end());
  std::size_t n = ratios.size();
  double median = n % 2 == 1 ? ratios[n / 2]
                             : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  if (median > 0.0) return median;
  // over half the sessions never switched; keep the cutoff strictly positive
  // so those sessions still label 1
  for (double r : ratios)
    if (r > 0.0) return r / 2.0;
  return 1e-6;
}

void apply_stream_labels(std::vector<StreamInstance>* instances,
                         double threshold) {
  for (auto& inst : *instances) {
    double ratio = inst.usage_seconds > 0.0
                       ? inst.page_switches / inst.usage_seconds
                       : 0.0;
    inst.label = inst.usage_seconds > 0.0 && ratio < threshold ? 1 : 0;
  }
}

UserSplit split_users(std::vector<int> ids, double train_fraction,
                      std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  RngStream rng(seed, fnv1a64("train-eval-split"));
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::size_t j = rng.uniform_int(i);
    std::swap(ids[i - 1], ids[j]);
  }
  auto n_train = static_cast<std::size_t>(train_fraction * ids.size());
  UserSplit split;
  split.train_ids.assign(ids.begin(), ids.begin() + n_train);
  split.eval_ids.assign(ids.begin() + n_train, ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.eval_ids.begin(), split.eval_ids.end());
  return split;
}

}  // namespace klan::data
