#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "klan/error.hpp"
#include "klan/gradcheck.hpp"
#include "klan/iit/cql.hpp"
#include "klan/iit/train.hpp"
#include "klan/rng.hpp"

using namespace klan;
using namespace klan::iit;
using klan::data::Transition;

namespace {

CqlConfig tiny_cfg(int actions, std::size_t hidden) {
  CqlConfig cfg;
  cfg.actions = actions;
  cfg.hidden = hidden;
  cfg.dynamic_alpha = false;
  return cfg;
}

Transition make_t(std::vector<double> s, int a, double r,
                  std::vector<double> ns, bool terminal, int hour = 12) {
  Transition t;
  t.user_id = 0;
  t.day = 0;
  t.hour = hour;
  t.state = std::move(s);
  t.action = a;
  t.reward = r;
  t.next_state = std::move(ns);
  t.terminal = terminal;
  return t;
}

TransitionBatch ptrs(const std::vector<Transition>& v) {
  TransitionBatch out;
  for (const auto& t : v) out.push_back(&t);
  return out;
}

void zero_all(ParameterSet& ps) {
  for (const auto& path : ps.paths()) ps.value(path).fill(0.0);
}

// zeroes everything, then pins the output biases so Q(s, a) is constant in s
void wire_constant_q(QModel& model, const std::vector<double>& main_q,
                     const std::vector<double>& target_q) {
  ParameterSet& ps = model.params();
  zero_all(ps);
  for (std::size_t i = 0; i < main_q.size(); ++i)
    ps.value("main/b3").at(i) = main_q[i];
  for (std::size_t i = 0; i < target_q.size(); ++i)
    ps.value("target/b3").at(i) = target_q[i];
}

}  // namespace

TEST_CASE("q_values follows the wired two-hidden-layer net") {
  CqlConfig cfg = tiny_cfg(2, 2);
  QModel model(cfg, 2);
  ParameterSet& ps = model.params();
  zero_all(ps);
  ps.value("main/w1").at(0, 0) = 1.0;
  ps.value("main/w1").at(1, 1) = 1.0;
  ps.value("main/b1").at(0) = 0.5;
  ps.value("main/b1").at(1) = -1.0;
  ps.value("main/w2").at(0, 0) = 1.0;
  ps.value("main/w2").at(0, 1) = 1.0;
  ps.value("main/w2").at(1, 1) = 1.0;
  ps.value("main/w3").at(0, 0) = 1.0;
  ps.value("main/w3").at(1, 1) = 1.0;
  ps.value("main/b3").at(0) = 0.1;
  ps.value("main/b3").at(1) = 0.2;
  // x = [1, 2]: h1 = relu([1.5, 1]) = [1.5, 1], h2 = relu([2.5, 1]) = [2.5, 1]
  ops::Vec q = model.q_values({1.0, 2.0});
  CHECK(std::abs(q[0] - 2.6) < 1e-12);
  CHECK(std::abs(q[1] - 1.2) < 1e-12);
  // negative preactivations clip: x = [-5, 2] -> h1 = [0, 1]
  ops::Vec q2 = model.q_values({-5.0, 2.0});
  CHECK(std::abs(q2[0] - 1.1) < 1e-12);
  CHECK(std::abs(q2[1] - 1.2) < 1e-12);
}

TEST_CASE("td loss matches the bellman fixtures") {
  CqlConfig cfg = tiny_cfg(2, 4);
  QModel model(cfg, 3);
  wire_constant_q(model, {10.0, 0.0}, {5.0, 3.0});
  std::vector<Transition> one = {
      make_t({0, 0, 0}, 0, 10.0, {0, 0, 0}, false)};
  // y = 10 + 0.9 * max(5, 3) = 14.5 against Q = 10
  CHECK(std::abs(td_loss(model, ptrs(one)) - 20.25) < 1e-12);

  wire_constant_q(model, {14.5, 0.0}, {5.0, 3.0});
  CHECK(std::abs(td_loss(model, ptrs(one))) < 1e-12);

  // terminal: bootstrap dropped even with a huge target
  wire_constant_q(model, {10.0, 0.0}, {1e6, 1e6});
  std::vector<Transition> term = {
      make_t({0, 0, 0}, 0, 10.0, {0, 0, 0}, true)};
  CHECK(std::abs(td_loss(model, ptrs(term))) < 1e-12);

  // batch mean
  wire_constant_q(model, {10.0, 0.0}, {5.0, 3.0});
  std::vector<Transition> both = {
      make_t({0, 0, 0}, 0, 10.0, {0, 0, 0}, false),
      make_t({0, 0, 0}, 0, 10.0, {0, 0, 0}, true)};
  CHECK(std::abs(td_loss(model, ptrs(both)) - 20.25 / 2.0) < 1e-12);
}

TEST_CASE("cql regularizer hits ln K on a flat net and vanishes for K=1") {
  QModel flat(tiny_cfg(3, 4), 2);
  wire_constant_q(flat, {0, 0, 0}, {0, 0, 0});
  std::vector<Transition> one = {make_t({0, 0}, 0, 0.0, {0, 0}, true)};
  CHECK(std::abs(cql_regularizer(flat, ptrs(one)) - std::log(3.0)) < 1e-12);
  CHECK(std::abs(cql_regularizer(flat, ptrs(one)) - 1.0986122886681098) <
        1e-12);

  QModel single(tiny_cfg(1, 4), 2);
  wire_constant_q(single, {7.0}, {7.0});
  CHECK(std::abs(cql_regularizer(single, ptrs(one))) < 1e-12);
}

TEST_CASE("cql regularizer shrinks as the logged action dominates") {
  std::vector<Transition> one = {make_t({0, 0}, 0, 0.0, {0, 0}, true)};
  double prev = 1e9;
  for (double c : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    QModel model(tiny_cfg(3, 4), 2);
    wire_constant_q(model, {c, 0.0, 0.0}, {0, 0, 0});
    double reg = cql_regularizer(model, ptrs(one));
    CHECK(reg < prev);
    prev = reg;
  }
}

TEST_CASE("dynamic alpha spot values and clamping") {
  TrafficStats stats = TrafficStats::uniform();
  CqlConfig cfg;
  cfg.alpha = 1.0;
  cfg.beta = 1.0;

  // mean-rate hour leaves the base weight untouched
  CHECK(std::abs(dynamic_alpha(cfg, stats, 0) - 1.0) < 1e-15);
  cfg.alpha = 3.7;
  cfg.beta = 9.0;
  CHECK(std::abs(dynamic_alpha(cfg, stats, 5) - 3.7) < 1e-15);

  // busy hour: v = 2, alpha 1, beta 1 -> e^-1
  cfg.alpha = 1.0;
  cfg.beta = 1.0;
  stats.v[7] = 2.0;
  CHECK(std::abs(dynamic_alpha(cfg, stats, 7) - 0.36787944117144233) < 1e-12);

  // quiet hour blows past the cap and clamps to 5 alpha
  cfg.beta = 5.0;
  stats.v[4] = 0.1;
  CHECK(std::abs(dynamic_alpha(cfg, stats, 4) - 5.0) < 1e-15);
  // busy hour with a big beta clamps to 0.1 alpha
  CHECK(std::abs(dynamic_alpha(cfg, stats, 7) - 0.1) < 1e-15);
}

TEST_CASE("dynamic alpha stays within bounds and never rises with traffic") {
  for (double alpha : {0.3, 1.0, 2.5}) {
    for (double beta : {0.5, 1.0, 3.0}) {
      CqlConfig cfg;
      cfg.alpha = alpha;
      cfg.beta = beta;
      TrafficStats stats = TrafficStats::uniform();
      double prev = 1e300;
      for (double v = 0.0; v <= 3.0; v += 0.05) {
        stats.v[0] = v;
        double a = dynamic_alpha(cfg, stats, 0);
        CHECK(a >= 0.1 * alpha - 1e-12);
        CHECK(a <= 5.0 * alpha + 1e-12);
        CHECK(a <= prev + 1e-12);
        prev = a;
      }
    }
  }
}

TEST_CASE("extra multiplier scales the weight but respects the clamp") {
  CqlConfig cfg;
  cfg.alpha = 2.0;
  cfg.beta = 1.0;
  TrafficStats stats = TrafficStats::uniform();
  CHECK(std::abs(dynamic_alpha(cfg, stats, 0, 1.5) - 3.0) < 1e-12);
  CHECK(std::abs(dynamic_alpha(cfg, stats, 0, 100.0) - 10.0) < 1e-12);
  CHECK(std::abs(dynamic_alpha(cfg, stats, 0, 1e-6) - 0.2) < 1e-12);
}

TEST_CASE("total loss with alpha 0 is exactly the td loss") {
  CqlConfig cfg = tiny_cfg(3, 6);
  cfg.alpha = 0.0;
  QModel model(cfg, 4);  // keep the random init: exactness must not rely on 0
  std::vector<Transition> batch = {
      make_t({0.1, -0.2, 0.3, 0.4}, 0, 1.0, {0.0, 0.1, 0.2, 0.3}, false),
      make_t({0.5, 0.5, -0.5, 0.0}, 2, -0.5, {0, 0, 0, 0}, true, 3)};
  CqlBreakdown b =
      cql_total_loss(model, ptrs(batch), TrafficStats::uniform());
  CHECK(b.total == td_loss(model, ptrs(batch)));
  CHECK(b.total == b.td);
}

TEST_CASE("total loss composes td, regularizer, and the per-hour weights") {
  CqlConfig cfg = tiny_cfg(3, 4);
  cfg.alpha = 2.0;
  QModel model(cfg, 2);
  wire_constant_q(model, {0, 0, 0}, {0, 0, 0});
  std::vector<Transition> batch = {make_t({0, 0}, 0, 0.0, {0, 0}, true)};
  CqlBreakdown b = cql_total_loss(model, ptrs(batch), TrafficStats::uniform());
  CHECK(std::abs(b.td) < 1e-15);
  CHECK(std::abs(b.reg - std::log(3.0)) < 1e-12);
  CHECK(std::abs(b.total - 2.0 * std::log(3.0)) < 1e-12);
  CHECK(std::abs(b.mean_alpha - 2.0) < 1e-15);

  // per-transition weights come from each transition's own hour
  cfg.alpha = 1.0;
  cfg.beta = 1.0;
  cfg.dynamic_alpha = true;
  QModel dyn(cfg, 2);
  wire_constant_q(dyn, {0, 0, 0}, {0, 0, 0});
  TrafficStats stats = TrafficStats::uniform();
  stats.v[3] = 0.5;
  stats.v[4] = 1.5;
  std::vector<Transition> two = {make_t({0, 0}, 0, 0.0, {0, 0}, true, 3),
                                 make_t({0, 0}, 1, 0.0, {0, 0}, true, 4)};
  CqlBreakdown d = cql_total_loss(dyn, ptrs(two), stats);
  double a3 = std::exp(0.5);
  double a4 = std::exp(-0.5);
  CHECK(std::abs(d.mean_alpha - (a3 + a4) / 2.0) < 1e-12);
  CHECK(std::abs(d.total - (a3 + a4) / 2.0 * std::log(3.0)) < 1e-12);
}

TEST_CASE("dynamic weighting at uniform traffic matches the static loss") {
  CqlConfig stat_cfg = tiny_cfg(3, 6);
  stat_cfg.alpha = 1.3;
  CqlConfig dyn_cfg = stat_cfg;
  dyn_cfg.dynamic_alpha = true;
  QModel a(stat_cfg, 4);
  QModel b(dyn_cfg, 4);  // same seed, identical nets
  std::vector<Transition> batch = {
      make_t({0.1, -0.2, 0.3, 0.4}, 1, 1.0, {0.0, 0.1, 0.2, 0.3}, false, 2),
      make_t({0.5, 0.5, -0.5, 0.0}, 2, -0.5, {0, 0, 0, 0}, true, 21)};
  TrafficStats u = TrafficStats::uniform();
  CHECK(std::abs(cql_total_loss(a, ptrs(batch), u).total -
                 cql_total_loss(b, ptrs(batch), u).total) < 1e-15);
}

TEST_CASE("analytic gradients of the total loss pass finite differences") {
  CqlConfig cfg = tiny_cfg(3, 4);
  cfg.alpha = 0.8;
  cfg.beta = 1.5;
  cfg.dynamic_alpha = true;
  cfg.seed = 11;
  QModel model(cfg, 3);
  TrafficStats stats = TrafficStats::uniform();
  stats.v[2] = 0.4;
  stats.v[9] = 1.9;

  RngStream rng(5, fnv1a64("iit-gradcheck"));
  // jitter every weight and bias so no relu preactivation sits exactly on
  // its kink (zero-initialized biases put dead units right there, where the
  // two-sided difference and the subgradient legitimately disagree)
  for (const auto& path : model.params().paths()) {
    Tensor& t = model.params().value(path);
    for (std::size_t i = 0; i < t.numel(); ++i)
      t.data()[i] += rng.uniform(-0.3, 0.3);
  }
  auto rand_state = [&] {
    ops::Vec s(3);
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
    return s;
  };
  std::vector<Transition> batch;
  batch.push_back(make_t(rand_state(), 0, 0.7, rand_state(), false, 2));
  batch.push_back(make_t(rand_state(), 1, -0.3, rand_state(), false, 9));
  batch.push_back(make_t(rand_state(), 2, 1.2, rand_state(), true, 9));
  batch.push_back(make_t(rand_state(), 1, 0.0, rand_state(), false, 14));
  batch.push_back(make_t(rand_state(), 0, 2.0, rand_state(), true, 2));
  TransitionBatch bp = ptrs(batch);

  // the target is a constant in this loss, so only main/ carries gradients
  GradCheckReport report = finite_diff_grad_check(
      model.params(),
      [&] { return cql_total_loss(model, bp, stats).total; },
      [&] {
        model.params().zero_grads();
        cql_total_loss_and_grad(model, bp, stats);
      },
      1e-5, {"main/"});
  CHECK(report.max_rel_err < 1e-4);

  model.params().zero_grads();
  cql_total_loss_and_grad(model, bp, stats);
  CHECK(model.params().grad_abs_sum("target/") == 0.0);
  CHECK(model.params().grad_abs_sum("main/") > 0.0);
}

TEST_CASE("sync copies the main net into the target exactly") {
  QModel model(tiny_cfg(2, 8), 5);
  ParameterSet& ps = model.params();
  // nets start in sync even though the two inits draw different numbers
  for (const auto& path : ps.paths_with_prefix("main/")) {
    const Tensor& m = ps.value(path);
    const Tensor& t = ps.value("target/" + path.substr(5));
    REQUIRE(m.numel() == t.numel());
    for (std::size_t i = 0; i < m.numel(); ++i)
      CHECK(m.data()[i] == t.data()[i]);
  }
  ps.value("main/w2").at(0, 0) = 42.0;
  CHECK(ps.value("target/w2").at(0, 0) != 42.0);
  model.sync_target();
  CHECK(ps.value("target/w2").at(0, 0) == 42.0);
}

namespace {

// small biased log: every state visits only action 0
std::vector<Transition> biased_logs(int n, int state_dim, std::uint64_t seed) {
  RngStream rng(seed, fnv1a64("biased-logs"));
  std::vector<ops::Vec> states(n);
  for (auto& s : states) {
    s.resize(state_dim);
    for (double& x : s) x = rng.uniform(-1.0, 1.0);
  }
  std::vector<Transition> out;
  for (int i = 0; i < n; ++i) {
    bool terminal = (i % 5 == 4);
    out.push_back(make_t(states[i], 0, rng.gaussian(1.0, 0.1),
                         states[(i + 1) % n], terminal, i % 24));
  }
  return out;
}

}  // namespace

TEST_CASE("training on one-action logs pushes unlogged actions below it") {
  CqlConfig cfg = tiny_cfg(3, 32);
  cfg.alpha = 10.0;
  cfg.lr = 1e-3;
  cfg.batch_size = 32;
  cfg.steps = 1500;
  cfg.seed = 17;
  std::vector<Transition> logs = biased_logs(200, 4, 99);
  QModel model(cfg, 4);
  train_iit(model, logs, TrafficStats::uniform());
  int conservative = 0;
  for (const auto& t : logs) {
    ops::Vec q = model.q_values(t.state);
    if (q[1] < q[0] && q[2] < q[0]) ++conservative;
  }
  CHECK(conservative >= 190);  // 95% of 200
}

TEST_CASE("the penalty keeps value estimates below the unregularized run") {
  std::vector<Transition> logs = biased_logs(200, 4, 123);
  auto mean_q_over = [&](QModel& m) {
    double sum = 0.0;
    for (const auto& t : logs) {
      ops::Vec q = m.q_values(t.state);
      for (double qi : q) sum += qi / static_cast<double>(q.size());
    }
    return sum / static_cast<double>(logs.size());
  };
  CqlConfig cfg = tiny_cfg(3, 32);
  cfg.lr = 1e-3;
  cfg.batch_size = 32;
  cfg.steps = 1500;
  cfg.seed = 4;
  CqlConfig dqn_cfg = cfg;
  dqn_cfg.alpha = 0.0;
  CqlConfig cql_cfg = cfg;
  cql_cfg.alpha = 1.0;
  QModel dqn(dqn_cfg, 4);
  QModel cql(cql_cfg, 4);
  train_iit(dqn, logs, TrafficStats::uniform());
  train_iit(cql, logs, TrafficStats::uniform());
  CHECK(mean_q_over(cql) < mean_q_over(dqn));
}

TEST_CASE("alpha 0 training recovers the chain MDP value function") {
  // two states, two actions, deterministic moves:
  //   s0: stay (r 1) or hop to s1 (r 0); s1: hop to s0 (r 0) or stay (r 2)
  std::vector<Transition> mdp = {
      make_t({1, 0}, 0, 1.0, {1, 0}, false),
      make_t({1, 0}, 1, 0.0, {0, 1}, false),
      make_t({0, 1}, 0, 0.0, {1, 0}, false),
      make_t({0, 1}, 1, 2.0, {0, 1}, false)};

  // value iteration on the same MDP
  double q[2][2] = {{0, 0}, {0, 0}};
  for (int it = 0; it < 500; ++it) {
    double v0 = std::max(q[0][0], q[0][1]);
    double v1 = std::max(q[1][0], q[1][1]);
    q[0][0] = 1.0 + 0.9 * v0;
    q[0][1] = 0.0 + 0.9 * v1;
    q[1][0] = 0.0 + 0.9 * v0;
    q[1][1] = 2.0 + 0.9 * v1;
  }
  CHECK(std::abs(q[0][0] - 17.2) < 1e-9);
  CHECK(std::abs(q[0][1] - 18.0) < 1e-9);
  CHECK(std::abs(q[1][0] - 16.2) < 1e-9);
  CHECK(std::abs(q[1][1] - 20.0) < 1e-9);

  CqlConfig cfg = tiny_cfg(2, 32);
  cfg.alpha = 0.0;
  cfg.gamma = 0.9;
  cfg.lr = 3e-3;
  cfg.batch_size = 16;
  cfg.steps = 10000;
  cfg.target_sync = 100;
  cfg.seed = 3;
  QModel model(cfg, 2);
  train_iit(model, mdp, TrafficStats::uniform());

  ops::Vec q0 = model.q_values({1, 0});
  ops::Vec q1 = model.q_values({0, 1});
  CHECK(std::abs(q0[0] - q[0][0]) / q[0][0] < 0.05);
  CHECK(std::abs(q0[1] - q[0][1]) / q[0][1] < 0.05);
  CHECK(std::abs(q1[0] - q[1][0]) / q[1][0] < 0.05);
  CHECK(std::abs(q1[1] - q[1][1]) / q[1][1] < 0.05);
}

TEST_CASE("training is deterministic: same seed, same checkpoint bytes") {
  std::vector<Transition> logs = biased_logs(60, 3, 7);
  CqlConfig cfg = tiny_cfg(2, 8);
  cfg.alpha = 1.0;
  cfg.batch_size = 8;
  cfg.steps = 50;
  cfg.target_sync = 20;
  cfg.seed = 7;

  auto run = [&](const char* file) {
    QModel model(cfg, 3);
    IitTrainReport rep = train_iit(model, logs, TrafficStats::uniform());
    CHECK(rep.steps == 50);
    CHECK(rep.step_total.size() == 50);
    CHECK(rep.syncs == 3);  // steps 0, 20, 40
    model.save(file);
    return rep.final_total;
  };
  double a = run("/tmp/iit_ckpt_a.bin");
  double b = run("/tmp/iit_ckpt_b.bin");
  CHECK(a == b);

  std::ifstream fa("/tmp/iit_ckpt_a.bin", std::ios::binary);
  std::ifstream fb("/tmp/iit_ckpt_b.bin", std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)),
                 std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)),
                 std::istreambuf_iterator<char>());
  REQUIRE(!ca.empty());
  CHECK(ca == cb);
}

TEST_CASE("a divergent run raises a training error") {
  std::vector<Transition> logs = biased_logs(40, 3, 9);
  CqlConfig cfg = tiny_cfg(2, 8);
  cfg.steps = 5;
  cfg.batch_size = 8;
  QModel model(cfg, 3);
  // blow up the q scale so the squared bellman error overflows to inf
  model.params().value("main/b3").at(0) = 1e200;
  CHECK_THROWS_AS(train_iit(model, logs, TrafficStats::uniform()),
                  TrainingError);
}

TEST_CASE("interest scores are the softmax of the q-values") {
  QModel model(tiny_cfg(3, 4), 2);
  wire_constant_q(model, {1.0, 2.0, 3.0}, {0, 0, 0});
  ops::Vec p = interest_scores(model, {0.3, -0.4});
  CHECK(std::abs(p[0] - 0.09003057317038046) < 1e-12);
  CHECK(std::abs(p[1] - 0.24472847105479764) < 1e-12);
  CHECK(std::abs(p[2] - 0.6652409557748219) < 1e-12);
  CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-12);

  // invariant to shifting every q by a constant
  wire_constant_q(model, {101.0, 102.0, 103.0}, {0, 0, 0});
  ops::Vec shifted = interest_scores(model, {0.3, -0.4});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(shifted[i] - p[i]) < 1e-12);
}

TEST_CASE("traffic stats normalize logged usage to mean rate one") {
  std::vector<sim::SessionLog> logs;
  sim::SessionLog a;
  a.hour = 8;
  a.usage_seconds = 100.0;
  sim::SessionLog b;
  b.hour = 20;
  b.usage_seconds = 300.0;
  logs.push_back(a);
  logs.push_back(b);
  TrafficStats stats = compute_traffic_stats(logs);
  CHECK(std::abs(stats.at_hour(8) - 6.0) < 1e-12);
  CHECK(std::abs(stats.at_hour(20) - 18.0) < 1e-12);
  CHECK(std::abs(stats.at_hour(0)) < 1e-15);
  double mean = 0.0;
  for (int t = 0; t < 24; ++t) mean += stats.at_hour(t) / 24.0;
  CHECK(std::abs(mean - 1.0) < 1e-12);

  CHECK_THROWS_AS(compute_traffic_stats({}), DataError);
  sim::SessionLog idle;
  idle.hour = 3;
  idle.usage_seconds = 0.0;
  CHECK_THROWS_AS(compute_traffic_stats({idle}), DataError);
  CHECK_THROWS_AS(stats.at_hour(-1), DataError);
  CHECK_THROWS_AS(stats.at_hour(24), DataError);
}

TEST_CASE("traffic stats survive a write and read unchanged") {
  TrafficStats stats = TrafficStats::uniform();
  RngStream rng(2, fnv1a64("stats-io"));
  for (auto& x : stats.v) x = rng.uniform(0.0, 3.0);
  const char* file = "/tmp/iit_traffic_stats.txt";
  save_traffic_stats(stats, file);
  TrafficStats back = load_traffic_stats(file);
  for (int t = 0; t < 24; ++t) CHECK(back.v[t] == stats.v[t]);

  std::ofstream bad("/tmp/iit_traffic_bad.txt");
  bad << "hour_00 1.0\nnot_a_label 2.0\n";
  bad.close();
  CHECK_THROWS_AS(load_traffic_stats("/tmp/iit_traffic_bad.txt"), DataError);
  CHECK_THROWS_AS(load_traffic_stats("/tmp/iit_missing_stats.txt"), DataError);
}

TEST_CASE("checkpoints restore the exact q function") {
  std::vector<Transition> logs = biased_logs(50, 3, 31);
  CqlConfig cfg = tiny_cfg(3, 8);
  cfg.steps = 30;
  cfg.batch_size = 8;
  QModel model(cfg, 3);
  train_iit(model, logs, TrafficStats::uniform());
  const char* file = "/tmp/iit_restore.bin";
  model.save(file);

  QModel fresh(cfg, 3);
  fresh.load(file);
  for (const auto& t : logs) {
    ops::Vec a = model.q_values(t.state);
    ops::Vec b = fresh.q_values(t.state);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  QModel other(tiny_cfg(3, 16), 3);  // different width
  CHECK_THROWS_AS(other.load(file), DataError);
}
