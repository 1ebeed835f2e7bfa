#pragma once

#include <unordered_map>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/sim/types.hpp"

namespace klan::data {

// Rolling per-user daily aggregates, fed one day of session logs at a time.
// Both the dataset builders and the online serving loop use this, so training
// features and serving features are assembled by the same code.
class HistoryTracker {
 public:
  explicit HistoryTracker(int pages) : pages_(pages) {}

  // logs must all belong to one day, later than anything already ingested
  void ingest_day(const std::vector<sim::SessionLog>& day_logs);

  struct Aggregates {
    double usage_7d = 0.0;       // mean daily usage, trailing 7 days
    double usage_30d = 0.0;      // trailing 30
    double entries_7d = 0.0;     // mean daily entry count
    double switch_rate_7d = 0.0; // switches per usage second
    std::vector<double> stay_7d;  // mean daily usage per page
    std::vector<double> stay_14d;
  };

  // Trailing-window aggregates for features used on asof_day: window w covers
  // days [asof_day - w, asof_day - 1]. Days the user skipped count as zero;
  // the denominator only shrinks at the start of the calendar, before w days
  // exist at all. Unseen users get all-zero aggregates.
  Aggregates aggregates(int user_id, int asof_day) const;
  // convenience: as of the day after the last ingested one
  Aggregates aggregates(int user_id) const;

  int last_page(int user_id) const;          // -1 when no history
  int most_frequent_page(int user_id) const; // ties -> lowest page; -1 empty
  int days_ingested() const { return static_cast<int>(days_.size()); }
  int pages() const { return pages_; }

 private:
  struct DayStat {
    double usage = 0.0;
    int entries = 0;
    int switches = 0;
    std::vector<double> page_usage;
  };
  int pages_;
  std::vector<int> days_;  // ingested day ids, ascending
  std::unordered_map<int, std::vector<DayStat>> per_user_;  // aligned to days_
  std::unordered_map<int, int> last_page_;
  std::unordered_map<int, std::vector<int>> landing_counts_;
};

// Per-user accumulation within the current day, reset each morning.
struct IntradayState {
  std::vector<double> page_usage;
  int prior_entries = 0;

  explicit IntradayState(int pages) : page_usage(pages, 0.0) {}
  void observe(const sim::SessionLog& s) {
    page_usage[s.landing_page] += s.usage_seconds;
    ++prior_entries;
  }
};

// Raw (un-normalized) feature assembly. Layouts match the schema factories.
std::vector<double> rct_numeric_features(const HistoryTracker::Aggregates& agg);
std::vector<double> intraday_state_features(const IntradayState& today, int hour,
                                            bool trigger,
                                            const HistoryTracker::Aggregates& agg);
std::vector<double> stream_context_features(const IntradayState& today, int hour,
                                            bool trigger);
std::vector<double> stream_stats_features(const HistoryTracker::Aggregates& agg);

}  // namespace klan::data
