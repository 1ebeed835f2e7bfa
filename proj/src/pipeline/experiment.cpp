#include "klan/pipeline/experiment.hpp"

#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "klan/data/builders.hpp"
#include "klan/data/io.hpp"
#include "klan/error.hpp"
#include "klan/iit/cql.hpp"
#include "klan/rng.hpp"
#include "klan/sim/logio.hpp"
#include "klan/sim/population.hpp"

namespace klan::pipeline {

using nlohmann::json;

DataPaths::DataPaths(const std::string& out_dir)
    : dir(out_dir),
      sessions(out_dir + "/sessions.jsonl"),
      traffic_stats(out_dir + "/traffic_stats.txt"),
      rct_train(out_dir + "/rct_train.jsonl"),
      rct_eval(out_dir + "/rct_eval.jsonl"),
      rct_schema(out_dir + "/rct_schema.json"),
      transitions_train(out_dir + "/transitions_train.jsonl"),
      transitions_eval(out_dir + "/transitions_eval.jsonl"),
      transition_schema(out_dir + "/transition_schema.json"),
      stream_train(out_dir + "/stream_train.jsonl"),
      stream_eval(out_dir + "/stream_eval.jsonl"),
      stream_schema(out_dir + "/stream_schema.json") {}

ModelPaths::ModelPaths(const std::string& d)
    : dir(d),
      isp(d + "/isp.ckpt"),
      iit(d + "/iit.ckpt"),
      am(d + "/am.ckpt"),
      scores(d + "/scores.txt") {}

void generate_datasets(const RunConfig& cfg, const std::string& out_dir) {
  DataPaths paths(out_dir);
  const auto& ex = cfg.experiment;
  int pages = cfg.sim.pages;

  auto users = sim::build_population(cfg.sim);
  auto traffic = sim::default_tidal_traffic();

  // frozen per-user arm for the randomized window: 0 keeps the legacy
  // behavior, k >= 1 pins page k-1
  data::AssignmentMap assignment;
  {
    RngStream rng(cfg.sim.seed, fnv1a64("rct-assignment"));
    for (const auto& u : users)
      assignment[u.user_id] =
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(pages + 1)));
  }

  PolicySpec legacy;
  legacy.kind = PolicyKind::kLegacy;
  legacy.explore = ex.legacy_explore;
  PolicyArm behavior(legacy, pages, ServeComponents{});
  std::uint64_t salt = fnv1a64("datagen");

  std::vector<sim::SessionLog> all_logs;
  int total_days = ex.history_days + ex.rct_window_days;
  for (int day = 0; day < total_days; ++day) {
    sim::PolicyFn day_policy;
    if (day < ex.history_days) {
      day_policy = behavior.policy();
    } else {
      // randomized window: treated users override the heuristic
      auto base = behavior.policy();
      day_policy = [&assignment, base](const sim::EntryContext& ctx) {
        int arm = assignment.at(ctx.user.user_id);
        if (arm == 0) return base(ctx);
        return arm - 1;
      };
    }
    auto logs = sim::simulate_day(cfg.sim, traffic, users, day, day_policy, salt,
                                  behavior.observer());
    behavior.end_day(logs);
    all_logs.insert(all_logs.end(), logs.begin(), logs.end());
  }

  sim::write_session_logs(paths.sessions, all_logs, /*include_oracle=*/false);

  // one user split shared by every dataset
  std::vector<int> ids;
  ids.reserve(users.size());
  for (const auto& u : users) ids.push_back(u.user_id);
  auto split = data::split_users(ids, ex.train_fraction,
                                 stream_id(cfg.sim.seed, fnv1a64("user-split")));

  auto rct = data::build_daily_rct(all_logs, users, assignment, pages,
                                   ex.history_days, ex.rct_window_days);
  auto transitions = data::build_hourly_transitions(all_logs, pages, ex.emit_from_day);
  auto stream = data::build_stream_instances(all_logs, pages, ex.emit_from_day);

  std::vector<data::RctInstance> rct_train, rct_eval;
  std::vector<data::Transition> tr_train, tr_eval;
  std::vector<data::StreamInstance> st_train, st_eval;
  data::partition_by_user(rct, split, &rct_train, &rct_eval);
  data::partition_by_user(transitions, split, &tr_train, &tr_eval);
  data::partition_by_user(stream, split, &st_train, &st_eval);
  if (rct_train.empty() || tr_train.empty() || st_train.empty())
    throw DataError("generate_datasets: a train split came out empty; "
                    "more users or days needed");

  auto rct_schema = data::default_rct_schema(pages);
  rct_schema.fit(rct_train);

  data::TransitionSchema tschema;
  tschema.state = data::state_schema(pages);
  tschema.actions = pages;
  tschema.fit(tr_train);

  data::StreamSchema sschema;
  sschema.context = data::context_schema(pages);
  sschema.stats = data::stats_schema(pages);
  sschema.pages = pages;
  sschema.fit(st_train);
  sschema.threshold = data::default_switch_threshold(st_train);
  data::apply_stream_labels(&st_train, sschema.threshold);
  data::apply_stream_labels(&st_eval, sschema.threshold);

  // hourly load profile from the train users' history
  std::vector<sim::SessionLog> train_logs;
  {
    std::unordered_map<int, bool> is_train;
    for (int id : split.train_ids) is_train[id] = true;
    for (const auto& s : all_logs)
      if (is_train.count(s.user_id)) train_logs.push_back(s);
  }
  auto stats = iit::compute_traffic_stats(train_logs);
  iit::save_traffic_stats(stats, paths.traffic_stats);

  data::write_rct_instances(paths.rct_train, rct_train);
  data::write_rct_instances(paths.rct_eval, rct_eval);
  data::save_rct_schema(rct_schema, paths.rct_schema);
  data::write_transitions(paths.transitions_train, tr_train);
  data::write_transitions(paths.transitions_eval, tr_eval);
  data::save_transition_schema(tschema, paths.transition_schema);
  data::write_stream_instances(paths.stream_train, st_train);
  data::write_stream_instances(paths.stream_eval, st_eval);
  data::save_stream_schema(sschema, paths.stream_schema);
}

ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::vector<PolicySpec>& policies,
                                const ServeComponents& comps,
                                std::uint64_t seed) {
  if (policies.empty()) throw DataError("run_experiment: no policies");
  const auto& ex = cfg.experiment;

  RunConfig run = cfg;
  run.sim.seed = seed;
  auto users = sim::build_population(run.sim);
  auto traffic = sim::default_tidal_traffic();

  // shared warmup: every arm's tracker ingests the same legacy days
  PolicySpec legacy;
  legacy.kind = PolicyKind::kLegacy;
  legacy.explore = ex.legacy_explore;
  std::vector<std::vector<sim::SessionLog>> warmup_days;
  {
    PolicyArm warm(legacy, run.sim.pages, ServeComponents{});
    for (int day = 0; day < ex.warmup_days; ++day) {
      auto logs = sim::simulate_day(run.sim, traffic, users, day, warm.policy(),
                                    /*arm_salt=*/0, warm.observer());
      warm.end_day(logs);
      warmup_days.push_back(std::move(logs));
    }
  }

  ExperimentResult result;
  result.seed = seed;
  for (const auto& spec : policies) {
    PolicyArm arm(spec, run.sim.pages, comps);
    for (const auto& logs : warmup_days) arm.end_day(logs);

    std::uint64_t salt = fnv1a64("arm-" + policy_name(spec));
    std::vector<sim::SessionLog> measured;
    int first = ex.warmup_days;
    int last = ex.warmup_days + ex.measure_days - 1;
    for (int day = first; day <= last; ++day) {
      arm.refresh_scores(users, day);
      auto logs = sim::simulate_day(run.sim, traffic, users, day, arm.policy(),
                                    salt, arm.observer());
      arm.end_day(logs);
      measured.insert(measured.end(), logs.begin(), logs.end());
    }

    ArmResult ar;
    ar.policy = policy_name(spec);
    ar.metrics = compute_arm_metrics(measured, run.sim.pages, first, last);
    ar.metrics.fallback_entries = arm.fallback_entries();
    result.arms.push_back(std::move(ar));
  }
  return result;
}

void write_experiment_results(const std::string& file,
                              const std::vector<ExperimentResult>& results) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot open for writing: " + file);
  for (const auto& r : results) {
    for (const auto& a : r.arms) {
      json j{{"seed", r.seed},
             {"policy", a.policy},
             {"pdr", a.metrics.pdr},
             {"mean_usage", a.metrics.mean_usage},
             {"lt", a.metrics.lt},
             {"multi_page_fraction", a.metrics.multi_page_fraction},
             {"dau", a.metrics.dau},
             {"effective_entry_rate", a.metrics.effective_entry_rate},
             {"sessions", a.metrics.sessions},
             {"fallback_entries", a.metrics.fallback_entries}};
      out << j.dump() << "\n";
    }
  }
  if (!out) throw DataError("write failed: " + file);
}

std::vector<ExperimentResult> read_experiment_results(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open: " + file);
  std::vector<ExperimentResult> results;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(file + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
    std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    if (results.empty() || results.back().seed != seed) {
      results.push_back(ExperimentResult{});
      results.back().seed = seed;
    }
    ArmResult a;
    a.policy = j.at("policy").get<std::string>();
    a.metrics.pdr = j.at("pdr").get<double>();
    a.metrics.mean_usage = j.at("mean_usage").get<double>();
    a.metrics.lt = j.at("lt").get<double>();
    a.metrics.multi_page_fraction = j.at("multi_page_fraction").get<double>();
    a.metrics.dau = j.at("dau").get<std::vector<double>>();
    a.metrics.effective_entry_rate =
        j.at("effective_entry_rate").get<std::vector<double>>();
    a.metrics.sessions = j.at("sessions").get<long long>();
    a.metrics.fallback_entries = j.at("fallback_entries").get<long long>();
    results.back().arms.push_back(std::move(a));
  }
  return results;
}

}  // namespace klan::pipeline
