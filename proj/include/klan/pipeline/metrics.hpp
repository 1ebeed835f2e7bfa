#pragma once

#include <functional>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/sim/types.hpp"

namespace klan::pipeline {

// Retention over the trailing week. activity is a users x days matrix where
// activity[u][d] != 0 means user u was active on day d; columns are absolute
// day indices, so every row must extend past last_day. The value is
//   sum over d in [max(last_day-6, first_day), last_day] of DAU_d
// divided by the number of users active at least once in
// [first_day, last_day]. No active users is an error.
double compute_lt(const std::vector<std::vector<char>>& activity, int first_day, int last_day);

// Fraction of sessions flagged dropped_off. Empty input is an error.
double compute_pdr(const std::vector<sim::SessionLog>& logs);

// Per-arm metric bundle over a day window.
struct ArmMetrics {
  double pdr = 0.0;
  double mean_usage = 0.0;                   // seconds per session
  std::vector<double> dau;                   // one entry per day in the window
  double lt = 0.0;
  double multi_page_fraction = 0.0;          // users landing on >= 2 distinct pages
  std::vector<double> effective_entry_rate;  // per page: landed there and stayed >= 10s
  long long sessions = 0;
  long long fallback_entries = 0;            // serve-time score-store misses
};

ArmMetrics compute_arm_metrics(const std::vector<sim::SessionLog>& logs, int pages,
                               int first_day, int last_day);

// Uplift ranking quality. Scores come from a callback so the same curve code
// serves the model, the oracle, and a random-score null: score(x, k) ranks
// instance x for treatment k (1-based, matching RctInstance.treatment).
//
// For each treatment k the eval pool is that arm plus the full control arm.
// Responses are standardized over the pool, units are ranked by score, and
// the cumulative curve u(x) = (treated mean - control mean among the top x
// fraction) * x is integrated: auuc is the area under u, qini is the area
// between u and the straight line x * u(1) a random ranking would follow.
// Headline numbers average over treatments. Either arm empty is an error.
struct QiniResult {
  double qini = 0.0;
  double auuc = 0.0;
  std::vector<double> per_treatment_qini;
  std::vector<double> per_treatment_auuc;
  // u sampled at x = (i+1)/n, one row per treatment; feeds the curve plot
  std::vector<std::vector<double>> per_treatment_curve;
};

using UpliftScorer = std::function<double(const data::RctInstance&, int)>;

QiniResult qini_auuc(const std::vector<data::RctInstance>& eval, int treatments,
                     const UpliftScorer& score);

// Exact two-sided sign test. wins counts positive deltas, losses negative;
// ties are dropped by the caller. Returns 1.0 when nothing is left.
double sign_test_pvalue(int wins, int losses);

}  // namespace klan::pipeline
