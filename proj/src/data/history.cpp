#include "klan/data/history.hpp"

#include <algorithm>

#include "klan/error.hpp"

namespace klan::data {

void HistoryTracker::ingest_day(const std::vector<sim::SessionLog>& day_logs) {
  int day = -1;
  for (const auto& s : day_logs) {
    if (day < 0) day = s.day;
    if (s.day != day) throw DataError("ingest_day: logs span multiple days");
  }
  if (day < 0) {
    // a fully quiet day still advances the calendar
    day = days_.empty() ? 0 : days_.back() + 1;
  }
  if (!days_.empty() && day <= days_.back())
    throw DataError("ingest_day: days must be ingested in ascending order");
  days_.push_back(day);
  std::size_t slot = days_.size() - 1;

  for (const auto& s : day_logs) {
    auto& stats = per_user_[s.user_id];
    stats.resize(days_.size());
    auto& d = stats[slot];
    if (d.page_usage.empty()) d.page_usage.assign(pages_, 0.0);
    d.usage += s.usage_seconds;
    d.entries += 1;
    d.switches += s.page_switches;
    d.page_usage[s.landing_page] += s.usage_seconds;
    // logs arrive hour-ordered, so plain overwrite keeps the latest entry
    last_page_[s.user_id] = s.landing_page;
    auto& counts = landing_counts_[s.user_id];
    if (counts.empty()) counts.assign(pages_, 0);
    counts[s.landing_page] += 1;
  }
}

HistoryTracker::Aggregates HistoryTracker::aggregates(int user_id,
                                                      int asof_day) const {
  Aggregates agg;
  agg.stay_7d.assign(pages_, 0.0);
  agg.stay_14d.assign(pages_, 0.0);
  if (days_.empty() || asof_day <= days_.front()) return agg;

  int first_day = days_.front();
  auto window_denom = [&](int w) {
    return static_cast<double>(std::min(w, asof_day - first_day));
  };

  double usage7 = 0.0, usage30 = 0.0, entries7 = 0.0, switches7 = 0.0;
  std::vector<double> stay7(pages_, 0.0), stay14(pages_, 0.0);
  auto it = per_user_.find(user_id);
  if (it != per_user_.end()) {
    const auto& stats = it->second;
    for (std::size_t i = 0; i < stats.size(); ++i) {
      int age = asof_day - 1 - days_[i];  // 0 = yesterday
      if (age < 0) continue;              // not in the past of asof_day
      const auto& d = stats[i];
      if (d.page_usage.empty()) continue;
      if (age < 30) usage30 += d.usage;
      if (age < 14)
        for (int k = 0; k < pages_; ++k) stay14[k] += d.page_usage[k];
      if (age < 7) {
        usage7 += d.usage;
        entries7 += d.entries;
        switches7 += d.switches;
        for (int k = 0; k < pages_; ++k) stay7[k] += d.page_usage[k];
      }
    }
  }
  agg.usage_7d = usage7 / window_denom(7);
  agg.usage_30d = usage30 / window_denom(30);
  agg.entries_7d = entries7 / window_denom(7);
  agg.switch_rate_7d = usage7 > 0.0 ? switches7 / usage7 : 0.0;
  for (int k = 0; k < pages_; ++k) {
    agg.stay_7d[k] = stay7[k] / window_denom(7);
    agg.stay_14d[k] = stay14[k] / window_denom(14);
  }
  return agg;
}

HistoryTracker::Aggregates HistoryTracker::aggregates(int user_id) const {
  return aggregates(user_id, days_.empty() ? 0 : days_.back() + 1);
}

int HistoryTracker::last_page(int user_id) const {
  auto it = last_page_.find(user_id);
  return it == last_page_.end() ? -1 : it->second;
}

int HistoryTracker::most_frequent_page(int user_id) const {
  auto it = landing_counts_.find(user_id);
  if (it == landing_counts_.end()) return -1;
  const auto& counts = it->second;
  int best = 0;
  for (int k = 1; k < pages_; ++k)
    if (counts[k] > counts[best]) best = k;
  return best;
}

std::vector<double> rct_numeric_features(const HistoryTracker::Aggregates& agg) {
  std::vector<double> out = {agg.usage_7d, agg.usage_30d, agg.entries_7d,
                             agg.switch_rate_7d};
  out.insert(out.end(), agg.stay_7d.begin(), agg.stay_7d.end());
  out.insert(out.end(), agg.stay_14d.begin(), agg.stay_14d.end());
  return out;
}

namespace {
void append_realtime(std::vector<double>* out, const IntradayState& today,
                     int hour, bool trigger) {
  out->insert(out->end(), today.page_usage.begin(), today.page_usage.end());
  out->push_back(static_cast<double>(today.prior_entries));
  out->push_back(trigger ? 1.0 : 0.0);
  for (int h = 0; h < 24; ++h) out->push_back(h == hour ? 1.0 : 0.0);
}
}  // namespace

std::vector<double> intraday_state_features(const IntradayState& today, int hour,
                                            bool trigger,
                                            const HistoryTracker::Aggregates& agg) {
  std::vector<double> out;
  append_realtime(&out, today, hour, trigger);
  out.insert(out.end(), agg.stay_7d.begin(), agg.stay_7d.end());
  return out;
}

std::vector<double> stream_context_features(const IntradayState& today, int hour,
                                            bool trigger) {
  std::vector<double> out;
  append_realtime(&out, today, hour, trigger);
  return out;
}

std::vector<double> stream_stats_features(const HistoryTracker::Aggregates& agg) {
  std::vector<double> out = {agg.usage_7d, agg.entries_7d, agg.switch_rate_7d};
  out.insert(out.end(), agg.stay_7d.begin(), agg.stay_7d.end());
  return out;
}

}  // namespace klan::data
