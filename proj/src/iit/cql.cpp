#include "klan/iit/cql.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "klan/checkpoint.hpp"
#include "klan/error.hpp"

namespace klan::iit {

double TrafficStats::at_hour(int hour) const {
  if (hour < 0 || hour >= 24)
    throw DataError("traffic stats: hour out of range: " + std::to_string(hour));
  return v[static_cast<std::size_t>(hour)];
}

TrafficStats TrafficStats::uniform() {
  TrafficStats out;
  out.v.fill(1.0);
  return out;
}

TrafficStats compute_traffic_stats(const std::vector<sim::SessionLog>& logs) {
  std::array<double, 24> usage{};
  double total = 0.0;
  for (const auto& log : logs) {
    if (log.hour < 0 || log.hour >= 24)
      throw DataError("traffic stats: log hour out of range: " +
                      std::to_string(log.hour));
    usage[static_cast<std::size_t>(log.hour)] += log.usage_seconds;
    total += log.usage_seconds;
  }
  if (total <= 0.0) throw DataError("traffic stats: logs carry no usage");
  TrafficStats out;
  for (std::size_t t = 0; t < 24; ++t) out.v[t] = 24.0 * usage[t] / total;
  return out;
}

void save_traffic_stats(const TrafficStats& stats, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file);
  char line[64];
  for (int t = 0; t < 24; ++t) {
    std::snprintf(line, sizeof line, "hour_%02d %.17g\n", t,
                  stats.v[static_cast<std::size_t>(t)]);
    out << line;
  }
  if (!out) throw DataError("failed writing " + file);
}

TrafficStats load_traffic_stats(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read " + file);
  TrafficStats out;
  std::string label;
  for (int t = 0; t < 24; ++t) {
    char expect[16];
    std::snprintf(expect, sizeof expect, "hour_%02d", t);
    double value = 0.0;
    if (!(in >> label >> value) || label != expect)
      throw DataError(file + ": malformed traffic stats at hour " +
                      std::to_string(t));
    out.v[static_cast<std::size_t>(t)] = value;
  }
  return out;
}

double dynamic_alpha(const CqlConfig& cfg, const TrafficStats& stats, int hour,
                     double extra) {
  double raw = cfg.alpha * std::exp(-cfg.beta * (stats.at_hour(hour) - 1.0));
  raw *= extra;
  return std::clamp(raw, 0.1 * cfg.alpha, 5.0 * cfg.alpha);
}

QModel::QModel(const CqlConfig& cfg, std::size_t state_dim) : cfg_(cfg) {
  if (cfg.actions < 1) throw DataError("q model: needs at least one action");
  if (cfg.hidden < 1) throw DataError("q model: hidden width must be positive");
  if (state_dim == 0) throw DataError("q model: empty state");
  auto k = static_cast<std::size_t>(cfg.actions);
  main_ = QNetwork{"main", state_dim, cfg.hidden, k};
  target_ = QNetwork{"target", state_dim, cfg.hidden, k};
  main_.init(ps_, cfg.seed);
  target_.init(ps_, cfg.seed);
  sync_target();  // both nets start identical
}

ops::Vec QModel::q_values(const ops::Vec& state) const {
  return main_.forward(ps_, state, nullptr);
}

ops::Vec QModel::target_q_values(const ops::Vec& state) const {
  return target_.forward(ps_, state, nullptr);
}

void QModel::sync_target() {
  for (const auto& path : ps_.paths_with_prefix("main/"))
    ps_.value("target/" + path.substr(5)) = ps_.value(path);
}

void QModel::save(const std::string& file) const { save_checkpoint(ps_, file); }

void QModel::load(const std::string& file) {
  ParameterSet loaded = load_checkpoint(file);
  if (loaded.paths() != ps_.paths())
    throw DataError("checkpoint does not match this model's parameters: " +
                    file);
  for (const auto& path : ps_.paths()) {
    if (!loaded.value(path).same_shape(ps_.value(path)))
      throw DataError("checkpoint shape mismatch at " + path + ": " + file);
  }
  ps_ = std::move(loaded);
}

namespace {

void check_action(const CqlConfig& cfg, const data::Transition& t) {
  if (t.action < 0 || t.action >= cfg.actions)
    throw DataError("transition action out of range: " +
                    std::to_string(t.action));
}

double bootstrap_target(const QModel& model, const data::Transition& t) {
  double y = t.reward;
  if (!t.terminal) {
    ops::Vec qn = model.target_q_values(t.next_state);
    y += model.config().gamma * *std::max_element(qn.begin(), qn.end());
  }
  return y;
}

// Shared forward pass; accumulates grads under main/ when grad_ps is set.
CqlBreakdown cql_loss_impl(const QModel& model, const TransitionBatch& batch,
                           const TrafficStats& stats,
                           const AlphaModifier& extra, ParameterSet* grad_ps) {
  if (batch.empty()) throw DataError("cql loss: empty batch");
  const CqlConfig& cfg = model.config();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  CqlBreakdown out;
  for (const data::Transition* t : batch) {
    check_action(cfg, *t);
    QNetwork::Cache cache;
    ops::Vec q = model.main_net().forward(model.params(), t->state,
                                          grad_ps ? &cache : nullptr);
    auto a = static_cast<std::size_t>(t->action);
    double diff = q[a] - bootstrap_target(model, *t);
    double reg = ops::logsumexp(q) - q[a];
    double a_t = cfg.alpha;
    if (cfg.dynamic_alpha)
      a_t = dynamic_alpha(cfg, stats, t->hour, extra ? extra(*t) : 1.0);
    out.td += diff * diff * inv_b;
    out.reg += reg * inv_b;
    out.mean_alpha += a_t * inv_b;
    for (double qi : q)
      out.mean_q += qi * inv_b / static_cast<double>(q.size());
    out.total += (diff * diff + a_t * reg) * inv_b;
    if (grad_ps) {
      // d(lse - q_a)/dq = softmax(q) - onehot(a); td adds 2*diff at a
      ops::Vec dq = ops::logsumexp_backward(q);
      for (double& g : dq) g *= a_t * inv_b;
      dq[a] += (2.0 * diff - a_t) * inv_b;
      model.main_net().backward(*grad_ps, cache, dq);
    }
  }
  return out;
}

}  // namespace

double td_loss(const QModel& model, const TransitionBatch& batch) {
  if (batch.empty()) throw DataError("td loss: empty batch");
  double sum = 0.0;
  for (const data::Transition* t : batch) {
    check_action(model.config(), *t);
    ops::Vec q = model.q_values(t->state);
    double diff = q[static_cast<std::size_t>(t->action)] -
                  bootstrap_target(model, *t);
    sum += diff * diff;
  }
  return sum / static_cast<double>(batch.size());
}

double cql_regularizer(const QModel& model, const TransitionBatch& batch) {
  if (batch.empty()) throw DataError("cql regularizer: empty batch");
  double sum = 0.0;
  for (const data::Transition* t : batch) {
    check_action(model.config(), *t);
    ops::Vec q = model.q_values(t->state);
    sum += ops::logsumexp(q) - q[static_cast<std::size_t>(t->action)];
  }
  return sum / static_cast<double>(batch.size());
}

CqlBreakdown cql_total_loss(const QModel& model, const TransitionBatch& batch,
                            const TrafficStats& stats,
                            const AlphaModifier& extra) {
  return cql_loss_impl(model, batch, stats, extra, nullptr);
}

CqlBreakdown cql_total_loss_and_grad(QModel& model,
                                     const TransitionBatch& batch,
                                     const TrafficStats& stats,
                                     const AlphaModifier& extra) {
  return cql_loss_impl(model, batch, stats, extra, &model.params());
}

ops::Vec interest_scores(const QModel& model, const ops::Vec& state) {
  return ops::softmax(model.q_values(state));
}

}  // namespace klan::iit
