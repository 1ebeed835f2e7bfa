#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "klan/am/fuse.hpp"
#include "klan/am/model.hpp"
#include "klan/am/train.hpp"
#include "klan/error.hpp"
#include "klan/gradcheck.hpp"
#include "klan/rng.hpp"

using namespace klan;
using namespace klan::am;
using klan::data::StreamInstance;
using klan::data::StreamSchema;

namespace {

StreamSchema toy_schema(int pages, int context_dim, int stats_dim) {
  StreamSchema s;
  s.pages = pages;
  s.threshold = 0.05;
  for (int i = 0; i < context_dim; ++i) {
    s.context.names.push_back("c" + std::to_string(i));
    s.context.normalize.push_back(false);
    s.context.mean.push_back(0.0);
    s.context.std.push_back(1.0);
  }
  for (int i = 0; i < stats_dim; ++i) {
    s.stats.names.push_back("v" + std::to_string(i));
    s.stats.normalize.push_back(false);
    s.stats.mean.push_back(0.0);
    s.stats.std.push_back(1.0);
  }
  return s;
}

StreamInstance make_inst(int page, int label, std::vector<double> context,
                         std::vector<double> stats) {
  StreamInstance x;
  x.page = page;
  x.label = label;
  x.context = std::move(context);
  x.stats = std::move(stats);
  return x;
}

void zero_all(ParameterSet& ps) {
  for (const auto& path : ps.paths()) ps.value(path).fill(0.0);
}

void jitter_all(ParameterSet& ps, std::uint64_t seed, double scale) {
  RngStream rng(seed, fnv1a64("am-jitter"));
  for (const auto& path : ps.paths()) {
    Tensor& t = ps.value(path);
    for (std::size_t i = 0; i < t.numel(); ++i)
      t.data()[i] += rng.uniform(-scale, scale);
  }
}

std::vector<const StreamInstance*> ptrs(const std::vector<StreamInstance>& v) {
  std::vector<const StreamInstance*> out;
  for (const auto& x : v) out.push_back(&x);
  return out;
}

}  // namespace

TEST_CASE("zeroed towers emit one half for every page") {
  AmConfig cfg;
  cfg.pages = 3;
  cfg.experts = 2;
  cfg.expert_hidden = 4;
  AmModel model(cfg, toy_schema(3, 2, 2));
  zero_all(model.params());
  ops::Vec gamma = model.weights({0.3, -0.7}, {1.0, 2.0});
  REQUIRE(gamma.size() == 3);
  for (double g : gamma) CHECK(std::abs(g - 0.5) < 1e-15);
  // determinism on repeat
  ops::Vec again = model.weights({0.3, -0.7}, {1.0, 2.0});
  for (int k = 0; k < 3; ++k) CHECK(gamma[k] == again[k]);
}

TEST_CASE("weights match an independent straight-line recomputation") {
  AmConfig cfg;
  cfg.pages = 2;
  cfg.experts = 2;
  cfg.expert_hidden = 2;
  cfg.seed = 9;
  AmModel model(cfg, toy_schema(2, 2, 1));
  jitter_all(model.params(), 3, 0.4);

  ops::Vec c = {0.8, -0.3};
  ops::Vec v = {0.5};
  ops::Vec f = {0.8, -0.3, 0.5};
  ops::Vec gamma = model.weights(c, v);

  const ParameterSet& ps = model.params();
  auto affine = [&](const std::string& w, const std::string& b,
                    const ops::Vec& x) {
    const Tensor& W = ps.value(w);
    const Tensor& B = ps.value(b);
    ops::Vec y(W.dim(0), 0.0);
    for (std::size_t i = 0; i < W.dim(0); ++i) {
      y[i] = B.at(i);
      for (std::size_t j = 0; j < W.dim(1); ++j) y[i] += W.at(i, j) * x[j];
    }
    return y;
  };
  std::vector<ops::Vec> outs;
  for (int e = 0; e < 2; ++e) {
    std::string p = "expert" + std::to_string(e);
    ops::Vec h = affine(p + "/w1", p + "/b1", f);
    for (double& x : h) x = x > 0 ? x : 0.0;
    outs.push_back(affine(p + "/w2", p + "/b2", h));
  }
  for (int k = 0; k < 2; ++k) {
    std::string t = "tower" + std::to_string(k);
    ops::Vec gl = affine(t + "/gate/w", t + "/gate/b", f);
    double m = std::max(gl[0], gl[1]);
    double z0 = std::exp(gl[0] - m), z1 = std::exp(gl[1] - m);
    double g0 = z0 / (z0 + z1), g1 = z1 / (z0 + z1);
    ops::Vec mixed = {g0 * outs[0][0] + g1 * outs[1][0],
                      g0 * outs[0][1] + g1 * outs[1][1]};
    ops::Vec logit = affine(t + "/head/w", t + "/head/b", mixed);
    double expect = 1.0 / (1.0 + std::exp(-logit[0]));
    CHECK(std::abs(gamma[k] - expect) < 1e-12);
    CHECK(gamma[k] > 0.0);
    CHECK(gamma[k] < 1.0);
  }
}

TEST_CASE("schema mismatches and bad pages are rejected") {
  AmConfig cfg;
  cfg.pages = 2;
  AmModel model(cfg, toy_schema(2, 2, 2));
  CHECK_THROWS_AS(model.weights({0.1}, {0.2, 0.3}), DataError);
  CHECK_THROWS_AS(model.weights({0.1, 0.2}, {0.3}), DataError);
  std::vector<StreamInstance> bad = {make_inst(2, 1, {0, 0}, {0, 0})};
  CHECK_THROWS_AS(model.batch_loss(ptrs(bad)), DataError);
  std::vector<StreamInstance> neg = {make_inst(-1, 1, {0, 0}, {0, 0})};
  CHECK_THROWS_AS(model.batch_loss(ptrs(neg)), DataError);
  CHECK_THROWS_AS(model.batch_loss({}), DataError);

  AmConfig one_page = cfg;
  one_page.pages = 1;
  CHECK_THROWS_AS(AmModel(one_page, toy_schema(1, 2, 2)), DataError);
}

TEST_CASE("an indifferent model scores ln 2 on any label") {
  AmConfig cfg;
  cfg.pages = 3;
  AmModel model(cfg, toy_schema(3, 2, 2));
  zero_all(model.params());
  std::vector<StreamInstance> batch = {make_inst(0, 1, {0.4, 0.1}, {1, 2}),
                                       make_inst(1, 0, {-2, 3}, {0, 0}),
                                       make_inst(2, 1, {5, 5}, {5, 5})};
  CHECK(std::abs(model.batch_loss(ptrs(batch)) - std::log(2.0)) < 1e-12);
}

TEST_CASE("a confident correct model drives the loss to zero") {
  AmConfig cfg;
  cfg.pages = 2;
  AmModel model(cfg, toy_schema(2, 2, 2));
  zero_all(model.params());
  model.params().value("tower0/head/b").at(0) = 40.0;   // gamma ~ 1
  model.params().value("tower1/head/b").at(0) = -40.0;  // gamma ~ 0
  std::vector<StreamInstance> batch = {make_inst(0, 1, {1, 2}, {3, 4}),
                                       make_inst(1, 0, {1, 2}, {3, 4})};
  CHECK(model.batch_loss(ptrs(batch)) < 1e-9);
}

TEST_CASE("only the assigned tower carries gradient") {
  AmConfig cfg;
  cfg.pages = 3;
  cfg.experts = 2;
  cfg.expert_hidden = 4;
  AmModel model(cfg, toy_schema(3, 2, 2));
  jitter_all(model.params(), 5, 0.3);
  std::vector<StreamInstance> batch = {make_inst(0, 1, {0.4, 0.1}, {1, 0.5}),
                                       make_inst(0, 0, {-1, 0.7}, {0.2, 2})};
  model.params().zero_grads();
  double loss = model.batch_loss_and_grad(ptrs(batch));
  CHECK(loss > 0.0);
  CHECK(model.params().grad_abs_sum("tower0/") > 0.0);
  CHECK(model.params().grad_abs_sum("tower1/") == 0.0);
  CHECK(model.params().grad_abs_sum("tower2/") == 0.0);
  // experts are shared, so they do learn from every sample
  CHECK(model.params().grad_abs_sum("expert0/") > 0.0);

  // and the loss itself never reads the unassigned towers
  RngStream rng(8, fnv1a64("mask-probe"));
  for (const auto& path : model.params().paths_with_prefix("tower1/")) {
    Tensor& t = model.params().value(path);
    for (std::size_t i = 0; i < t.numel(); ++i)
      t.data()[i] = rng.uniform(-5.0, 5.0);
  }
  CHECK(model.batch_loss(ptrs(batch)) == loss);
}

TEST_CASE("analytic gradients of the masked loss pass finite differences") {
  AmConfig cfg;
  cfg.pages = 3;
  cfg.experts = 2;
  cfg.expert_hidden = 3;
  cfg.seed = 21;
  AmModel model(cfg, toy_schema(3, 2, 2));
  jitter_all(model.params(), 13, 0.3);

  RngStream rng(7, fnv1a64("am-gradcheck"));
  std::vector<StreamInstance> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(make_inst(
        i % 3, (i * i + 1) % 2,
        {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
        {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}));
  }
  auto bp = ptrs(batch);
  GradCheckReport report = finite_diff_grad_check(
      model.params(), [&] { return model.batch_loss(bp); },
      [&] {
        model.params().zero_grads();
        model.batch_loss_and_grad(bp);
      });
  CHECK(report.max_rel_err < 1e-4);
}

namespace {

// label follows the sign of the first stats entry with a clean margin
std::vector<StreamInstance> separable_stream(int n, int pages,
                                             std::uint64_t seed) {
  RngStream rng(seed, fnv1a64("am-separable"));
  std::vector<StreamInstance> out;
  for (int i = 0; i < n; ++i) {
    double key = rng.uniform(0.15, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    out.push_back(make_inst(i % pages, key > 0 ? 1 : 0,
                            {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
                            {key, rng.uniform(-1.0, 1.0)}));
  }
  return out;
}

}  // namespace

TEST_CASE("constant labels push the assigned weights toward one") {
  AmConfig cfg;
  cfg.pages = 3;
  cfg.experts = 2;
  cfg.expert_hidden = 8;
  cfg.epochs = 40;
  cfg.lr = 3e-3;
  cfg.seed = 2;
  AmModel model(cfg, toy_schema(3, 2, 2));
  RngStream rng(3, fnv1a64("all-ones"));
  std::vector<StreamInstance> train;
  for (int i = 0; i < 150; ++i)
    train.push_back(make_inst(i % 3, 1,
                              {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
                              {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}));
  AmTrainReport report = train_am(model, train);
  CHECK(report.final_loss < report.initial_loss);
  double mean_gamma = 0.0;
  for (const auto& x : train)
    mean_gamma +=
        model.weights(x.context, x.stats)[static_cast<std::size_t>(x.page)];
  mean_gamma /= static_cast<double>(train.size());
  CHECK(mean_gamma > 0.9);
}

TEST_CASE("a separable stream is learned to high accuracy") {
  AmConfig cfg;
  cfg.pages = 3;
  cfg.experts = 2;
  cfg.expert_hidden = 8;
  cfg.epochs = 60;
  cfg.lr = 3e-3;
  cfg.seed = 6;
  AmModel model(cfg, toy_schema(3, 2, 2));
  std::vector<StreamInstance> train = separable_stream(400, 3, 11);
  std::vector<StreamInstance> eval = separable_stream(200, 3, 12);
  train_am(model, train);
  CHECK(eval_accuracy(model, eval) >= 0.9);
}

TEST_CASE("training twice with one seed writes identical checkpoints") {
  std::vector<StreamInstance> train = separable_stream(80, 2, 21);
  auto run = [&](const char* file) {
    AmConfig cfg;
    cfg.pages = 2;
    cfg.experts = 2;
    cfg.expert_hidden = 4;
    cfg.epochs = 5;
    cfg.seed = 77;
    AmModel model(cfg, toy_schema(2, 2, 2));
    AmTrainReport rep = train_am(model, train);
    model.save(file);
    return rep.final_loss;
  };
  double a = run("/tmp/am_ckpt_a.bin");
  double b = run("/tmp/am_ckpt_b.bin");
  CHECK(a == b);
  std::ifstream fa("/tmp/am_ckpt_a.bin", std::ios::binary);
  std::ifstream fb("/tmp/am_ckpt_b.bin", std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)),
                 std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)),
                 std::istreambuf_iterator<char>());
  REQUIRE(!ca.empty());
  CHECK(ca == cb);
}

TEST_CASE("checkpoints restore the exact weight function") {
  AmConfig cfg;
  cfg.pages = 2;
  cfg.experts = 2;
  cfg.expert_hidden = 4;
  cfg.epochs = 3;
  AmModel model(cfg, toy_schema(2, 2, 2));
  std::vector<StreamInstance> train = separable_stream(50, 2, 31);
  train_am(model, train);
  model.save("/tmp/am_restore.bin");

  AmModel fresh(cfg, toy_schema(2, 2, 2));
  fresh.load("/tmp/am_restore.bin");
  for (const auto& x : train) {
    ops::Vec a = model.weights(x.context, x.stats);
    ops::Vec b = fresh.weights(x.context, x.stats);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }

  AmConfig wider = cfg;
  wider.experts = 3;
  AmModel other(wider, toy_schema(2, 2, 2));
  CHECK_THROWS_AS(other.load("/tmp/am_restore.bin"), DataError);
}

TEST_CASE("fusion follows the blend fixtures") {
  ops::Vec delta = {0.6, 0.2, 0.2};
  ops::Vec p = {0.2, 0.6, 0.2};
  ops::Vec sigma = fuse_scores(delta, p, {1.0, 1.0, 1.0});
  for (int k = 0; k < 3; ++k) CHECK(sigma[k] == delta[k]);
  sigma = fuse_scores(delta, p, {0.0, 0.0, 0.0});
  for (int k = 0; k < 3; ++k) CHECK(sigma[k] == p[k]);
  sigma = fuse_scores(delta, p, {0.5, 0.5, 0.5});
  CHECK(std::abs(sigma[0] - 0.4) < 1e-15);
  CHECK(std::abs(sigma[1] - 0.4) < 1e-15);
  CHECK(std::abs(sigma[2] - 0.2) < 1e-15);
}

TEST_CASE("fusion rejects off-simplex and out-of-range inputs") {
  ops::Vec delta = {0.6, 0.2, 0.2};
  ops::Vec p = {0.2, 0.6, 0.2};
  CHECK_THROWS_AS(fuse_scores({0.5, 0.5}, p, {0, 0, 0}), DataError);
  CHECK_THROWS_AS(fuse_scores({0.5, 0.4, 0.4}, p, {0, 0, 0}), DataError);
  CHECK_THROWS_AS(fuse_scores({1.2, -0.2, 0.0}, p, {0, 0, 0}), DataError);
  CHECK_THROWS_AS(fuse_scores(delta, p, {0.5, 0.5, 1.5}), DataError);
  CHECK_THROWS_AS(fuse_scores(delta, p, {0.5, 0.5, -0.1}), DataError);
  double nan = std::nan("");
  CHECK_THROWS_AS(fuse_scores(delta, p, {0.5, 0.5, nan}), DataError);
  CHECK_THROWS_AS(fuse_scores({}, {}, {}), DataError);
}

TEST_CASE("fused scores stay between their parents on random triples") {
  RngStream rng(17, fnv1a64("fuse-bounds"));
  for (int trial = 0; trial < 10000; ++trial) {
    ops::Vec d_raw(3), p_raw(3), gamma(3);
    for (int k = 0; k < 3; ++k) {
      d_raw[k] = rng.gaussian();
      p_raw[k] = rng.gaussian();
      gamma[k] = rng.uniform01();
    }
    ops::Vec delta = ops::softmax(d_raw);
    ops::Vec p = ops::softmax(p_raw);
    ops::Vec sigma = fuse_scores(delta, p, gamma);
    for (int k = 0; k < 3; ++k) {
      CHECK(sigma[k] >= std::min(delta[k], p[k]) - 1e-15);
      CHECK(sigma[k] <= std::max(delta[k], p[k]) + 1e-15);
    }
  }
}

TEST_CASE("a uniform weight blends linearly and preserves the simplex") {
  RngStream rng(19, fnv1a64("fuse-uniform"));
  for (int trial = 0; trial < 200; ++trial) {
    ops::Vec d_raw(4), p_raw(4);
    for (int k = 0; k < 4; ++k) {
      d_raw[k] = rng.gaussian();
      p_raw[k] = rng.gaussian();
    }
    ops::Vec delta = ops::softmax(d_raw);
    ops::Vec p = ops::softmax(p_raw);
    double c = rng.uniform01();
    ops::Vec sigma = fuse_scores(delta, p, {c, c, c, c});
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(sigma[k] - (c * delta[k] + (1 - c) * p[k])) < 1e-15);
      sum += sigma[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("page selection takes the argmax with ties to the lowest index") {
  CHECK(select_page({0.4, 0.4, 0.2}) == 0);
  CHECK(select_page({0.1, 0.7, 0.2}) == 1);
  CHECK(select_page({0.2, 0.3, 0.5}) == 2);
  CHECK(select_page({0.7}) == 0);
  // invariant under a constant shift
  CHECK(select_page({5.1, 5.7, 5.2}) == 1);
  CHECK_THROWS_AS(select_page({}), DataError);
  CHECK_THROWS_AS(select_page({0.1, std::nan("")}), DataError);
}
