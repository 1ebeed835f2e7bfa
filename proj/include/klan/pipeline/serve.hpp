#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "klan/am/model.hpp"
#include "klan/data/history.hpp"
#include "klan/data/schema.hpp"
#include "klan/iit/cql.hpp"
#include "klan/isp/model.hpp"
#include "klan/sim/simulate.hpp"

namespace klan::pipeline {

// Daily-refreshed per-user preference vectors, the stand-in for the key-value
// service the landing flow reads. Written once per simulated day, read-only
// while serving.
class ScoreStore {
 public:
  void put(int user_id, std::vector<double> delta);
  // nullptr when the user has no entry
  const std::vector<double>* find(int user_id) const;
  void clear();
  std::size_t size() const { return delta_.size(); }

  void save(const std::string& file) const;
  static ScoreStore load(const std::string& file);

 private:
  std::unordered_map<int, std::vector<double>> delta_;
};

// Recomputes delta for every given user from their trailing aggregates as of
// `day`. Covers the whole population so serving never misses.
void refresh_score_store(ScoreStore* store, const isp::IspModel& model,
                         const std::vector<sim::UserProfile>& users,
                         const data::HistoryTracker& tracker, int day);

// The fused decision on precomputed parts; exists separately so the fusion
// arithmetic stays directly testable.
int serve_entry(const std::vector<double>& delta, const std::vector<double>& p,
                const std::vector<double>& gamma);

enum class PolicyKind {
  kKlan,          // full stack: store delta + q scores + blended fusion
  kIspOnly,       // argmax delta
  kIitOnly,       // argmax q scores
  kRandom,        // uniform page per entry
  kFixed,         // always fixed_page
  kLastExit,      // page of the user's previous session, first page before any
  kMostFrequent,  // most-landed page so far, first page before any
  kLegacy,        // explore share uniform, otherwise last exit (log generator)
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::kRandom;
  int fixed_page = 0;
  double explore = 0.5;  // legacy only

  bool needs_isp() const { return kind == PolicyKind::kKlan || kind == PolicyKind::kIspOnly; }
  bool needs_iit() const { return kind == PolicyKind::kKlan || kind == PolicyKind::kIitOnly; }
  bool needs_am() const { return kind == PolicyKind::kKlan; }
};

// "klan", "isp_only", "iit_only", "random", "fixed:2", "last_exit",
// "most_frequent", "legacy", "legacy:0.3". Unknown names are errors.
PolicySpec parse_policy(const std::string& text);
std::string policy_name(const PolicySpec& spec);

// Model handles a policy may need. Only the pieces the policy kind requires
// must be present; the engine checks at construction.
struct ServeComponents {
  const isp::IspModel* isp = nullptr;
  const iit::QModel* iit = nullptr;
  const data::TransitionSchema* transition_schema = nullptr;  // paired with iit
  const am::AmModel* am = nullptr;
};

// One policy arm's serving state across a multi-day run: the rolling history
// tracker, the daily score store, and the within-day per-user context. Drive
// it day by day:
//   arm.refresh_scores(users, day);              (store-backed policies)
//   logs = simulate_day(..., arm.policy(), salt, arm.observer());
//   arm.end_day(logs);
class PolicyArm {
 public:
  PolicyArm(PolicySpec spec, int pages, ServeComponents comps);

  void refresh_scores(const std::vector<sim::UserProfile>& users, int day);
  void set_store(ScoreStore store);  // precomputed scores, CLI path

  sim::PolicyFn policy();
  sim::SessionCallback observer();
  // ingest the finished day into the tracker and reset intraday state
  void end_day(const std::vector<sim::SessionLog>& day_logs);

  const ScoreStore& store() const { return store_; }
  data::HistoryTracker& tracker() { return tracker_; }
  long long fallback_entries() const { return fallback_entries_; }
  const PolicySpec& spec() const { return spec_; }

 private:
  int decide(const sim::EntryContext& ctx);
  std::vector<double> iit_scores(const sim::EntryContext& ctx);
  const data::IntradayState& today(int user_id);

  PolicySpec spec_;
  int pages_;
  ServeComponents comps_;
  data::HistoryTracker tracker_;
  ScoreStore store_;
  std::unordered_map<int, data::IntradayState> today_;
  std::unordered_map<int, int> last_today_;  // last landing page within the day
  long long fallback_entries_ = 0;
};

}  // namespace klan::pipeline
