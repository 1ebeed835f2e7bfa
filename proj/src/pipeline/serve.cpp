#include "klan/pipeline/serve.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "klan/am/fuse.hpp"
#include "klan/error.hpp"

namespace klan::pipeline {

void ScoreStore::put(int user_id, std::vector<double> delta) {
  if (delta.empty()) throw DataError("ScoreStore: empty score vector");
  delta_[user_id] = std::move(delta);
}

const std::vector<double>* ScoreStore::find(int user_id) const {
  auto it = delta_.find(user_id);
  return it == delta_.end() ? nullptr : &it->second;
}

void ScoreStore::clear() { delta_.clear(); }

void ScoreStore::save(const std::string& file) const {
  std::ofstream out(file);
  if (!out) throw DataError("ScoreStore: cannot write " + file);
  std::vector<int> ids;
  ids.reserve(delta_.size());
  for (const auto& [id, v] : delta_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  char buf[64];
  for (int id : ids) {
    out << id;
    for (double v : delta_.at(id)) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw DataError("ScoreStore: write failed for " + file);
}

ScoreStore ScoreStore::load(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("ScoreStore: cannot open " + file);
  ScoreStore s;
  std::string line;
  std::size_t width = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int id = 0;
    if (!(ls >> id))
      throw DataError("ScoreStore: bad user id at " + file + ":" + std::to_string(lineno));
    std::vector<double> v;
    double x = 0.0;
    while (ls >> x) v.push_back(x);
    if (v.empty())
      throw DataError("ScoreStore: no scores at " + file + ":" + std::to_string(lineno));
    if (width == 0) width = v.size();
    if (v.size() != width)
      throw DataError("ScoreStore: ragged row at " + file + ":" + std::to_string(lineno));
    s.put(id, std::move(v));
  }
  return s;
}

void refresh_score_store(ScoreStore* store, const isp::IspModel& model,
                         const std::vector<sim::UserProfile>& users,
                         const data::HistoryTracker& tracker, int day) {
  if (!store) throw DataError("refresh_score_store: null store");
  for (const auto& u : users) {
    auto agg = tracker.aggregates(u.user_id, day);
    data::RctInstance inst;
    inst.user_id = u.user_id;
    inst.numeric = data::rct_numeric_features(agg);
    inst.categorical = {u.activity_bucket};
    store->put(u.user_id, model.predict_static_preferences(inst));
  }
}

int serve_entry(const std::vector<double>& delta, const std::vector<double>& p,
                const std::vector<double>& gamma) {
  return am::select_page(am::fuse_scores(delta, p, gamma));
}

PolicySpec parse_policy(const std::string& text) {
  PolicySpec spec;
  std::string head = text;
  std::string arg;
  std::size_t colon = text.find(':');
  if (colon != std::string::npos) {
    head = text.substr(0, colon);
    arg = text.substr(colon + 1);
  }
  if (head == "klan") spec.kind = PolicyKind::kKlan;
  else if (head == "isp_only") spec.kind = PolicyKind::kIspOnly;
  else if (head == "iit_only") spec.kind = PolicyKind::kIitOnly;
  else if (head == "random") spec.kind = PolicyKind::kRandom;
  else if (head == "fixed") spec.kind = PolicyKind::kFixed;
  else if (head == "last_exit") spec.kind = PolicyKind::kLastExit;
  else if (head == "most_frequent") spec.kind = PolicyKind::kMostFrequent;
  else if (head == "legacy") spec.kind = PolicyKind::kLegacy;
  else throw UsageError("unknown policy '" + text + "'");

  if (spec.kind == PolicyKind::kFixed) {
    if (arg.empty()) throw UsageError("fixed policy needs a page, e.g. fixed:0");
    try {
      spec.fixed_page = std::stoi(arg);
    } catch (const std::exception&) {
      throw UsageError("bad fixed page '" + arg + "'");
    }
  } else if (spec.kind == PolicyKind::kLegacy && !arg.empty()) {
    try {
      spec.explore = std::stod(arg);
    } catch (const std::exception&) {
      throw UsageError("bad explore share '" + arg + "'");
    }
    if (spec.explore < 0.0 || spec.explore > 1.0)
      throw UsageError("explore share must be in [0, 1]");
  } else if (!arg.empty()) {
    throw UsageError("policy '" + head + "' takes no argument");
  }
  return spec;
}

std::string policy_name(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::kKlan: return "klan";
    case PolicyKind::kIspOnly: return "isp_only";
    case PolicyKind::kIitOnly: return "iit_only";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kFixed: return "fixed:" + std::to_string(spec.fixed_page);
    case PolicyKind::kLastExit: return "last_exit";
    case PolicyKind::kMostFrequent: return "most_frequent";
    case PolicyKind::kLegacy: return "legacy";
  }
  throw DataError("policy_name: bad kind");
}

PolicyArm::PolicyArm(PolicySpec spec, int pages, ServeComponents comps)
    : spec_(spec), pages_(pages), comps_(comps), tracker_(pages) {
  if (pages_ < 1) throw DataError("PolicyArm: pages must be positive");
  if (spec_.needs_isp() && !comps_.isp)
    throw DataError("PolicyArm: policy " + policy_name(spec_) + " needs the uplift model");
  if (spec_.needs_iit() && (!comps_.iit || !comps_.transition_schema))
    throw DataError("PolicyArm: policy " + policy_name(spec_) +
                    " needs the q network and its state schema");
  if (spec_.needs_am() && !comps_.am)
    throw DataError("PolicyArm: policy " + policy_name(spec_) + " needs the blending model");
  if (spec_.kind == PolicyKind::kFixed &&
      (spec_.fixed_page < 0 || spec_.fixed_page >= pages_))
    throw DataError("PolicyArm: fixed page out of range");
}

void PolicyArm::refresh_scores(const std::vector<sim::UserProfile>& users, int day) {
  if (!spec_.needs_isp()) return;
  store_.clear();
  refresh_score_store(&store_, *comps_.isp, users, tracker_, day);
}

void PolicyArm::set_store(ScoreStore store) { store_ = std::move(store); }

const data::IntradayState& PolicyArm::today(int user_id) {
  auto it = today_.find(user_id);
  if (it == today_.end())
    it = today_.emplace(user_id, data::IntradayState(pages_)).first;
  return it->second;
}

std::vector<double> PolicyArm::iit_scores(const sim::EntryContext& ctx) {
  auto agg = tracker_.aggregates(ctx.user.user_id, ctx.day);
  auto raw = data::intraday_state_features(today(ctx.user.user_id), ctx.hour,
                                           ctx.trigger_active, agg);
  return iit::interest_scores(*comps_.iit, comps_.transition_schema->state.apply(raw));
}

int PolicyArm::decide(const sim::EntryContext& ctx) {
  int uid = ctx.user.user_id;
  switch (spec_.kind) {
    case PolicyKind::kRandom:
      return static_cast<int>(ctx.rng.uniform_int(static_cast<std::uint64_t>(pages_)));
    case PolicyKind::kFixed:
      return spec_.fixed_page;
    case PolicyKind::kLastExit:
    case PolicyKind::kLegacy: {
      if (spec_.kind == PolicyKind::kLegacy && ctx.rng.bernoulli(spec_.explore))
        return static_cast<int>(ctx.rng.uniform_int(static_cast<std::uint64_t>(pages_)));
      auto it = last_today_.find(uid);
      if (it != last_today_.end()) return it->second;
      int lp = tracker_.last_page(uid);
      if (lp >= 0) return lp;
      // no history yet: uniform first landing
      return static_cast<int>(ctx.rng.uniform_int(static_cast<std::uint64_t>(pages_)));
    }
    case PolicyKind::kMostFrequent: {
      int mf = tracker_.most_frequent_page(uid);
      if (mf >= 0) return mf;
      return static_cast<int>(ctx.rng.uniform_int(static_cast<std::uint64_t>(pages_)));
    }
    case PolicyKind::kIitOnly: {
      auto p = iit_scores(ctx);
      return am::select_page(p);
    }
    case PolicyKind::kIspOnly: {
      const auto* delta = store_.find(uid);
      if (!delta) {
        // store gap; fall back to the legacy heuristic and count it
        ++fallback_entries_;
        auto it = last_today_.find(uid);
        if (it != last_today_.end()) return it->second;
        int lp = tracker_.last_page(uid);
        return lp >= 0 ? lp
                       : static_cast<int>(ctx.rng.uniform_int(
                             static_cast<std::uint64_t>(pages_)));
      }
      return am::select_page(*delta);
    }
    case PolicyKind::kKlan: {
      auto p = iit_scores(ctx);
      const auto* delta = store_.find(uid);
      if (!delta) {
        ++fallback_entries_;
        return am::select_page(p);
      }
      auto agg = tracker_.aggregates(uid, ctx.day);
      auto context = data::stream_context_features(today(uid), ctx.hour,
                                                   ctx.trigger_active);
      auto stats = data::stream_stats_features(agg);
      auto gamma = comps_.am->weights(context, stats);
      return serve_entry(*delta, p, gamma);
    }
  }
  throw DataError("PolicyArm: bad policy kind");
}

sim::PolicyFn PolicyArm::policy() {
  return [this](const sim::EntryContext& ctx) { return decide(ctx); };
}

sim::SessionCallback PolicyArm::observer() {
  return [this](const sim::SessionLog& s) {
    auto it = today_.find(s.user_id);
    if (it == today_.end())
      it = today_.emplace(s.user_id, data::IntradayState(pages_)).first;
    it->second.observe(s);
    last_today_[s.user_id] = s.landing_page;
  };
}

void PolicyArm::end_day(const std::vector<sim::SessionLog>& day_logs) {
  tracker_.ingest_day(day_logs);
  today_.clear();
  last_today_.clear();
}

}  // namespace klan::pipeline
