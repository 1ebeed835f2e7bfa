// Command-line front end: data generation, model training, score
// precomputation, policy simulation, evaluation, and report rendering.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 training divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "klan/am/fuse.hpp"
#include "klan/am/train.hpp"
#include "klan/data/builders.hpp"
#include "klan/iit/train.hpp"
#include "klan/isp/train.hpp"
#include "klan/data/io.hpp"
#include "klan/error.hpp"
#include "klan/pipeline/config.hpp"
#include "klan/pipeline/experiment.hpp"
#include "klan/pipeline/manifest.hpp"
#include "klan/pipeline/metrics.hpp"
#include "klan/pipeline/report.hpp"
#include "klan/pipeline/serve.hpp"
#include "klan/pipeline/svg.hpp"
#include "klan/rng.hpp"
#include "klan/sim/logio.hpp"
#include "klan/sim/population.hpp"

namespace pl = klan::pipeline;
namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

pl::RunConfig load_run_config(const GlobalArgs& g) {
  pl::RunConfig cfg =
      g.config_file.empty() ? pl::default_config() : pl::load_config(g.config_file);
  if (g.seed) pl::override_seed(cfg, *g.seed);
  return cfg;
}

pl::Manifest base_manifest(const std::string& command, const GlobalArgs& g,
                           const pl::RunConfig& cfg) {
  pl::Manifest m;
  m.command = command;
  m.config_file = g.config_file;
  if (!g.config_file.empty()) m.config_fingerprint = pl::config_fingerprint(g.config_file);
  m.seeds = {cfg.sim.seed};
  m.version = KLAN_VERSION;
  return m;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw klan::DataError("cannot create directory " + dir + ": " + ec.message());
}

// transitions are stored raw; training and serving consume normalized ones
void normalize_transitions(std::vector<klan::data::Transition>* rows,
                           const klan::data::TransitionSchema& schema) {
  for (auto& t : *rows) {
    t.state = schema.state.apply(t.state);
    if (!t.terminal) t.next_state = schema.state.apply(t.next_state);
    t.reward = schema.normalize_reward(t.reward);
  }
}

// Checkpointed models plus the schemas they run on; loaded lazily so a
// policy list only pulls in what it needs.
struct LoadedModels {
  std::optional<klan::data::RctSchema> rct_schema;
  std::optional<klan::isp::IspModel> isp;
  std::optional<klan::data::TransitionSchema> transition_schema;
  std::optional<klan::iit::QModel> iit;
  std::optional<klan::data::StreamSchema> stream_schema;
  std::optional<klan::am::AmModel> am;

  pl::ServeComponents components() const {
    pl::ServeComponents c;
    if (isp) c.isp = &*isp;
    if (iit) {
      c.iit = &*iit;
      c.transition_schema = &*transition_schema;
    }
    if (am) c.am = &*am;
    return c;
  }
};

LoadedModels load_models_for(const std::vector<pl::PolicySpec>& specs,
                             const pl::RunConfig& cfg, const pl::DataPaths& data,
                             const pl::ModelPaths& models,
                             std::vector<std::string>* inputs) {
  LoadedModels lm;
  bool isp = false, iit = false, am = false;
  for (const auto& s : specs) {
    isp = isp || s.needs_isp();
    iit = iit || s.needs_iit();
    am = am || s.needs_am();
  }
  if (isp) {
    lm.rct_schema = klan::data::load_rct_schema(data.rct_schema);
    lm.isp.emplace(cfg.isp, *lm.rct_schema);
    lm.isp->load(models.isp);
    inputs->push_back(data.rct_schema);
    inputs->push_back(models.isp);
  }
  if (iit) {
    lm.transition_schema = klan::data::load_transition_schema(data.transition_schema);
    lm.iit.emplace(cfg.iit, static_cast<int>(lm.transition_schema->state.dim()));
    lm.iit->load(models.iit);
    inputs->push_back(data.transition_schema);
    inputs->push_back(models.iit);
  }
  if (am) {
    lm.stream_schema = klan::data::load_stream_schema(data.stream_schema);
    lm.am.emplace(cfg.am, *lm.stream_schema);
    lm.am->load(models.am);
    inputs->push_back(data.stream_schema);
    inputs->push_back(models.am);
  }
  return lm;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw klan::UsageError("bad number '" + tok + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw klan::UsageError("empty number list");
  return out;
}

// --- subcommand bodies ---

int cmd_gen_data(const GlobalArgs& g) {
  auto cfg = load_run_config(g);
  ensure_dir(g.out);
  pl::generate_datasets(cfg, g.out);

  pl::DataPaths paths(g.out);
  auto m = base_manifest("gen-data", g, cfg);
  m.outputs = {paths.sessions, paths.traffic_stats, paths.rct_train, paths.rct_eval,
               paths.rct_schema, paths.transitions_train, paths.transitions_eval,
               paths.transition_schema, paths.stream_train, paths.stream_eval,
               paths.stream_schema};
  pl::write_manifest(m, g.out + "/manifest-gen-data.json");
  std::printf("gen-data: wrote datasets under %s\n", g.out.c_str());
  return 0;
}

int cmd_train_isp(const GlobalArgs& g, const std::string& data_dir) {
  auto cfg = load_run_config(g);
  pl::DataPaths data(data_dir);
  ensure_dir(g.out);
  pl::ModelPaths models(g.out);

  auto train = klan::data::read_rct_instances(data.rct_train);
  auto schema = klan::data::load_rct_schema(data.rct_schema);
  klan::isp::IspModel model(cfg.isp, schema);
  auto report = klan::isp::train_isp(model, train);
  model.save(models.isp);

  auto m = base_manifest("train-isp", g, cfg);
  m.seeds = {cfg.isp.seed};
  m.inputs = {data.rct_train, data.rct_schema};
  m.outputs = {models.isp};
  pl::write_manifest(m, g.out + "/manifest-train-isp.json");
  std::printf("train-isp: %d steps, loss %.6f -> %.6f, saved %s\n", report.steps,
              report.initial_loss, report.final_loss, models.isp.c_str());
  return 0;
}

struct IitOverrides {
  double gamma = -1, alpha = -1, beta = -1;
  int dynamic = -1;  // -1 keep, 0 off, 1 on
  int steps = 0, target_sync = 0;
};

int cmd_train_iit(const GlobalArgs& g, const std::string& data_dir,
                  const IitOverrides& ov) {
  auto cfg = load_run_config(g);
  if (ov.gamma >= 0) cfg.iit.gamma = ov.gamma;
  if (ov.alpha >= 0) cfg.iit.alpha = ov.alpha;
  if (ov.beta >= 0) cfg.iit.beta = ov.beta;
  if (ov.dynamic >= 0) cfg.iit.dynamic_alpha = ov.dynamic != 0;
  if (ov.steps > 0) cfg.iit.steps = ov.steps;
  if (ov.target_sync > 0) cfg.iit.target_sync = ov.target_sync;

  pl::DataPaths data(data_dir);
  ensure_dir(g.out);
  pl::ModelPaths models(g.out);

  auto transitions = klan::data::read_transitions(data.transitions_train);
  auto schema = klan::data::load_transition_schema(data.transition_schema);
  auto stats = klan::iit::load_traffic_stats(data.traffic_stats);
  normalize_transitions(&transitions, schema);

  klan::iit::QModel model(cfg.iit, static_cast<int>(schema.state.dim()));
  auto report = klan::iit::train_iit(model, transitions, stats);
  model.save(models.iit);

  auto m = base_manifest("train-iit", g, cfg);
  m.seeds = {cfg.iit.seed};
  m.inputs = {data.transitions_train, data.transition_schema, data.traffic_stats};
  m.outputs = {models.iit};
  pl::write_manifest(m, g.out + "/manifest-train-iit.json");
  std::printf("train-iit: %zu steps, %zu target syncs, final loss %.6f, saved %s\n",
              report.steps, report.syncs, report.final_total, models.iit.c_str());
  return 0;
}

int cmd_train_am(const GlobalArgs& g, const std::string& data_dir) {
  auto cfg = load_run_config(g);
  pl::DataPaths data(data_dir);
  ensure_dir(g.out);
  pl::ModelPaths models(g.out);

  auto train = klan::data::read_stream_instances(data.stream_train);
  auto schema = klan::data::load_stream_schema(data.stream_schema);
  klan::am::AmModel model(cfg.am, schema);
  auto report = klan::am::train_am(model, train);
  model.save(models.am);

  auto m = base_manifest("train-am", g, cfg);
  m.seeds = {cfg.am.seed};
  m.inputs = {data.stream_train, data.stream_schema};
  m.outputs = {models.am};
  pl::write_manifest(m, g.out + "/manifest-train-am.json");
  std::printf("train-am: %d steps, loss %.6f -> %.6f, saved %s\n", report.steps,
              report.initial_loss, report.final_loss, models.am.c_str());
  return 0;
}

int cmd_precompute_scores(const GlobalArgs& g, const std::string& data_dir,
                          const std::string& model_dir) {
  auto cfg = load_run_config(g);
  pl::DataPaths data(data_dir);
  pl::ModelPaths models(model_dir);
  ensure_dir(g.out);
  pl::ModelPaths out_paths(g.out);

  auto schema = klan::data::load_rct_schema(data.rct_schema);
  klan::isp::IspModel model(cfg.isp, schema);
  model.load(models.isp);

  // rebuild the rolling history from the logged sessions, then score every
  // user as of the day after the log ends
  auto logs = klan::sim::read_session_logs(data.sessions);
  if (logs.empty()) throw klan::DataError("precompute-scores: no sessions in " + data.sessions);
  klan::data::HistoryTracker tracker(cfg.sim.pages);
  std::map<int, std::vector<klan::sim::SessionLog>> by_day;
  for (const auto& s : logs) by_day[s.day].push_back(s);
  int last_day = 0;
  for (const auto& [day, day_logs] : by_day) {
    tracker.ingest_day(day_logs);
    last_day = day;
  }

  auto users = klan::sim::build_population(cfg.sim);
  pl::ScoreStore store;
  pl::refresh_score_store(&store, model, users, tracker, last_day + 1);
  store.save(out_paths.scores);

  auto m = base_manifest("precompute-scores", g, cfg);
  m.inputs = {data.rct_schema, data.sessions, models.isp};
  m.outputs = {out_paths.scores};
  pl::write_manifest(m, g.out + "/manifest-precompute-scores.json");
  std::printf("precompute-scores: %zu users scored as of day %d, saved %s\n",
              store.size(), last_day + 1, out_paths.scores.c_str());
  return 0;
}

int cmd_simulate(const GlobalArgs& g, const std::string& data_dir,
                 const std::string& model_dir, const std::vector<std::string>& policies,
                 int days, int seeds) {
  auto cfg = load_run_config(g);
  if (days > 0) cfg.experiment.measure_days = days;
  if (policies.empty()) throw klan::UsageError("simulate: at least one --policy required");

  std::vector<pl::PolicySpec> specs;
  for (const auto& p : policies) specs.push_back(pl::parse_policy(p));

  pl::DataPaths data(data_dir);
  pl::ModelPaths models(model_dir);
  ensure_dir(g.out);

  std::vector<std::string> inputs;
  auto lm = load_models_for(specs, cfg, data, models, &inputs);

  int n_seeds = seeds > 0 ? seeds : 1;
  std::vector<pl::ExperimentResult> results;
  std::vector<std::uint64_t> used_seeds;
  for (int i = 0; i < n_seeds; ++i) {
    std::uint64_t seed = cfg.sim.seed + static_cast<std::uint64_t>(i);
    used_seeds.push_back(seed);
    results.push_back(pl::run_experiment(cfg, specs, lm.components(), seed));
  }
  pl::validate_results(results);

  std::string results_file = g.out + "/results.jsonl";
  pl::write_experiment_results(results_file, results);

  auto m = base_manifest("simulate", g, cfg);
  m.seeds = used_seeds;
  m.inputs = inputs;
  m.outputs = {results_file};
  pl::write_manifest(m, g.out + "/manifest-simulate.json");
  std::printf("simulate: %d seed(s) x %zu polic(ies) over %d measured days -> %s\n",
              n_seeds, specs.size(), cfg.experiment.measure_days, results_file.c_str());
  return 0;
}

int cmd_evaluate(const GlobalArgs& g, const std::string& data_dir,
                 const std::string& model_dir) {
  auto cfg = load_run_config(g);
  pl::DataPaths data(data_dir);
  pl::ModelPaths models(model_dir);
  ensure_dir(g.out);

  auto schema = klan::data::load_rct_schema(data.rct_schema);
  klan::isp::IspModel model(cfg.isp, schema);
  model.load(models.isp);
  auto eval = klan::data::read_rct_instances(data.rct_eval);

  auto scorer = [&model](const klan::data::RctInstance& x, int k) {
    auto r = model.predict_responses(x);
    return r.treated[k - 1] - r.control_mean;
  };
  auto qini = pl::qini_auuc(eval, cfg.sim.pages, scorer);

  // json record plus the curve plot
  std::string qini_file = g.out + "/qini.json";
  {
    nlohmann::json j{{"qini", qini.qini},
                     {"auuc", qini.auuc},
                     {"per_treatment_qini", qini.per_treatment_qini},
                     {"per_treatment_auuc", qini.per_treatment_auuc}};
    std::ofstream out(qini_file);
    if (!out) throw klan::DataError("cannot write " + qini_file);
    out << j.dump(2) << "\n";
  }

  std::vector<pl::Series> curves;
  for (std::size_t k = 0; k < qini.per_treatment_curve.size(); ++k) {
    pl::Series s;
    s.label = "page " + std::to_string(k);
    const auto& c = qini.per_treatment_curve[k];
    for (std::size_t i = 0; i < c.size(); ++i) {
      s.x.push_back(static_cast<double>(i + 1) / static_cast<double>(c.size()));
      s.y.push_back(c[i]);
    }
    curves.push_back(std::move(s));
  }
  std::string curves_file = g.out + "/qini_curves.svg";
  pl::write_line_chart(curves_file, "uplift ranking curves", "population fraction",
                       "cumulative incremental response", curves);

  // hourly conservatism weight under the logged traffic
  auto stats = klan::iit::load_traffic_stats(data.traffic_stats);
  pl::Series alpha_series;
  alpha_series.label = "alpha_t";
  for (int h = 0; h < 24; ++h) {
    alpha_series.x.push_back(h);
    alpha_series.y.push_back(klan::iit::dynamic_alpha(cfg.iit, stats, h));
  }
  std::string alpha_file = g.out + "/alpha_by_hour.svg";
  pl::write_line_chart(alpha_file, "conservatism weight by hour", "hour",
                       "alpha_t", {alpha_series});

  auto m = base_manifest("evaluate", g, cfg);
  m.inputs = {data.rct_schema, data.rct_eval, data.traffic_stats, models.isp};
  m.outputs = {qini_file, curves_file, alpha_file};
  pl::write_manifest(m, g.out + "/manifest-evaluate.json");
  std::printf("evaluate: qini %.5f auuc %.5f -> %s\n", qini.qini, qini.auuc,
              qini_file.c_str());
  return 0;
}

int cmd_report(const GlobalArgs& g, const std::string& results_file,
               const std::string& qini_file, const std::string& baseline) {
  auto cfg = load_run_config(g);
  ensure_dir(g.out);
  auto results = pl::read_experiment_results(results_file);

  std::optional<pl::QiniResult> qini;
  if (!qini_file.empty()) {
    std::ifstream in(qini_file);
    if (!in) throw klan::DataError("cannot open " + qini_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw klan::DataError("bad qini file " + qini_file + ": " + e.what());
    }
    pl::QiniResult q;
    q.qini = j.at("qini").get<double>();
    q.auuc = j.at("auuc").get<double>();
    q.per_treatment_qini = j.at("per_treatment_qini").get<std::vector<double>>();
    q.per_treatment_auuc = j.at("per_treatment_auuc").get<std::vector<double>>();
    qini = q;
  }

  std::string text = pl::render_report(results, baseline, qini ? &*qini : nullptr);
  std::string table_file = g.out + "/report.txt";
  {
    std::ofstream out(table_file);
    if (!out) throw klan::DataError("cannot write " + table_file);
    out << text;
  }
  std::fputs(text.c_str(), stdout);

  auto summaries = pl::summarize_results(results);
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& s : summaries) bars.emplace_back(s.policy, s.mean_usage);
  std::string usage_file = g.out + "/usage_by_policy.svg";
  pl::write_bar_chart(usage_file, "mean session usage by policy", "seconds", bars);

  auto m = base_manifest("report", g, cfg);
  m.inputs = {results_file};
  if (!qini_file.empty()) m.inputs.push_back(qini_file);
  m.outputs = {table_file, usage_file};
  pl::write_manifest(m, g.out + "/manifest-report.json");
  return 0;
}

int cmd_fuse(const std::string& delta_csv, const std::string& p_csv,
             const std::string& gamma_csv) {
  auto delta = parse_csv_doubles(delta_csv);
  auto p = parse_csv_doubles(p_csv);
  auto gamma = parse_csv_doubles(gamma_csv);
  auto sigma = klan::am::fuse_scores(delta, p, gamma);
  int page = klan::am::select_page(sigma);
  std::printf("sigma:");
  for (double v : sigma) std::printf(" %.17g", v);
  std::printf("\npage: %d\n", page);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personalized landing page lab: simulator, models, serving loop"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_file, "config file (INI sections)");
  std::uint64_t seed_opt = 0;
  auto* seed_flag = app.add_option("--seed", seed_opt, "override every seed in the config");
  app.add_option("--out", g.out, "output directory (default .)");

  std::string data_dir = ".";
  std::string model_dir = ".";
  std::vector<std::string> policies;
  int days = 0;
  int seeds = 0;
  std::string results_file, qini_file, baseline = "random";
  std::string fuse_delta, fuse_p, fuse_gamma;

  auto* gen = app.add_subcommand("gen-data", "simulate history + randomized window, build datasets");
  auto* tisp = app.add_subcommand("train-isp", "train the uplift model");
  tisp->add_option("--data", data_dir, "dataset directory")->required();
  auto* tiit = app.add_subcommand("train-iit", "train the conservative q network");
  tiit->add_option("--data", data_dir, "dataset directory")->required();
  double iit_gamma = -1, iit_alpha = -1, iit_beta = -1;
  int iit_steps = 0, iit_sync = 0;
  int iit_dynamic = -1;
  tiit->add_option("--gamma", iit_gamma, "discount factor override");
  tiit->add_option("--alpha", iit_alpha, "base conservatism override");
  tiit->add_option("--beta", iit_beta, "traffic sensitivity override");
  tiit->add_option("--dynamic-alpha", iit_dynamic, "1 = hourly weight on, 0 = off");
  tiit->add_option("--steps", iit_steps, "optimizer steps override");
  tiit->add_option("--target-sync", iit_sync, "target refresh period override");
  auto* tam = app.add_subcommand("train-am", "train the blending weight model");
  tam->add_option("--data", data_dir, "dataset directory")->required();
  auto* pre = app.add_subcommand("precompute-scores", "write the daily score store");
  pre->add_option("--data", data_dir, "dataset directory")->required();
  pre->add_option("--models", model_dir, "model checkpoint directory")->required();
  auto* simc = app.add_subcommand("simulate", "run paired policy arms on the simulator");
  simc->add_option("--data", data_dir, "dataset directory (schemas; model policies only)");
  simc->add_option("--models", model_dir, "model checkpoint directory (model policies only)");
  simc->add_option("--policy", policies, "policy arm, repeatable")->required();
  simc->add_option("--days", days, "measured days override");
  simc->add_option("--seeds", seeds, "number of seeds (base = config seed)");
  auto* evalc = app.add_subcommand("evaluate", "uplift ranking quality + diagnostic plots");
  evalc->add_option("--data", data_dir, "dataset directory")->required();
  evalc->add_option("--models", model_dir, "model checkpoint directory")->required();
  auto* rep = app.add_subcommand("report", "render the metric table from results");
  rep->add_option("--results", results_file, "results.jsonl from simulate")->required();
  rep->add_option("--qini", qini_file, "qini.json from evaluate");
  rep->add_option("--baseline", baseline, "baseline arm for paired deltas (default random)");
  auto* fusec = app.add_subcommand("fuse", "fuse one score triple and pick the page");
  fusec->add_option("--delta", fuse_delta, "store preferences, comma separated")->required();
  fusec->add_option("--p", fuse_p, "interest scores, comma separated")->required();
  fusec->add_option("--gamma", fuse_gamma, "blend weights, comma separated")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (seed_flag->count() > 0) g.seed = seed_opt;

  try {
    if (gen->parsed()) return cmd_gen_data(g);
    if (tisp->parsed()) return cmd_train_isp(g, data_dir);
    if (tiit->parsed()) {
      IitOverrides ov;
      ov.gamma = iit_gamma;
      ov.alpha = iit_alpha;
      ov.beta = iit_beta;
      ov.dynamic = iit_dynamic;
      ov.steps = iit_steps;
      ov.target_sync = iit_sync;
      return cmd_train_iit(g, data_dir, ov);
    }
    if (tam->parsed()) return cmd_train_am(g, data_dir);
    if (pre->parsed()) return cmd_precompute_scores(g, data_dir, model_dir);
    if (simc->parsed()) return cmd_simulate(g, data_dir, model_dir, policies, days, seeds);
    if (evalc->parsed()) return cmd_evaluate(g, data_dir, model_dir);
    if (rep->parsed()) return cmd_report(g, results_file, qini_file, baseline);
    if (fusec->parsed()) return cmd_fuse(fuse_delta, fuse_p, fuse_gamma);
    std::fprintf(stderr, "no subcommand\n");
    return 2;
  } catch (const klan::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const klan::TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 4;
  } catch (const klan::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
