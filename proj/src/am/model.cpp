#include "klan/am/model.hpp"

#include <string>

#include "klan/checkpoint.hpp"
#include "klan/error.hpp"

namespace klan::am {

struct AmModel::ExpertsCache {
  std::vector<Mlp::Cache> caches;
  std::vector<ops::Vec> outs;
};

struct AmModel::TowerCache {
  ops::Vec gate;   // softmax mixing weights over experts
  ops::Vec mixed;  // blended expert output
  double gamma = 0.0;
};

namespace {
std::string tower_prefix(int k) { return "tower" + std::to_string(k); }
}  // namespace

AmModel::AmModel(const AmConfig& cfg, const data::StreamSchema& schema)
    : cfg_(cfg), schema_(schema) {
  if (cfg.pages < 2) throw DataError("am model: needs at least two pages");
  if (cfg.experts < 1) throw DataError("am model: needs at least one expert");
  if (cfg.expert_hidden < 1)
    throw DataError("am model: expert width must be positive");
  if (schema.context.dim() == 0 || schema.stats.dim() == 0)
    throw DataError("am model: empty feature schema");
  in_ = schema.context.dim() + schema.stats.dim();

  for (int e = 0; e < cfg.experts; ++e) {
    experts_.push_back(Mlp{"expert" + std::to_string(e), in_,
                           cfg.expert_hidden, cfg.expert_hidden});
    experts_.back().init(ps_, cfg.seed);
  }
  for (int k = 0; k < cfg.pages; ++k) {
    std::string t = tower_prefix(k);
    ps_.add(t + "/gate/w",
            xavier_init(static_cast<std::size_t>(cfg.experts), in_, cfg.seed,
                        t + "/gate/w"));
    ps_.add(t + "/gate/b",
            Tensor::zeros({static_cast<std::size_t>(cfg.experts)}));
    ps_.add(t + "/head/w",
            xavier_init(1, cfg.expert_hidden, cfg.seed, t + "/head/w"));
    ps_.add(t + "/head/b", Tensor::zeros({1}));
  }
}

ops::Vec AmModel::make_input(const ops::Vec& context,
                             const ops::Vec& stats) const {
  if (context.size() != schema_.context.dim())
    throw DataError("am model: context dim " + std::to_string(context.size()) +
                    " does not match schema " +
                    std::to_string(schema_.context.dim()));
  if (stats.size() != schema_.stats.dim())
    throw DataError("am model: stats dim " + std::to_string(stats.size()) +
                    " does not match schema " +
                    std::to_string(schema_.stats.dim()));
  // raw features in, schema z-scoring applied here
  return ops::concat(schema_.context.apply(context),
                     schema_.stats.apply(stats));
}

void AmModel::experts_forward(const ops::Vec& f, ExpertsCache* cache) const {
  cache->caches.resize(experts_.size());
  cache->outs.resize(experts_.size());
  for (std::size_t e = 0; e < experts_.size(); ++e)
    cache->outs[e] = experts_[e].forward(ps_, f, &cache->caches[e]);
}

double AmModel::tower_forward(const ops::Vec& f, const ExpertsCache& ex, int k,
                              TowerCache* cache) const {
  std::string t = tower_prefix(k);
  ops::Vec gate = ops::softmax(ops::affine_forward(
      ps_.value(t + "/gate/w"), ps_.value(t + "/gate/b"), f));
  ops::Vec mixed(cfg_.expert_hidden, 0.0);
  for (std::size_t e = 0; e < ex.outs.size(); ++e)
    for (std::size_t i = 0; i < mixed.size(); ++i)
      mixed[i] += gate[e] * ex.outs[e][i];
  double logit = ops::affine_forward(ps_.value(t + "/head/w"),
                                     ps_.value(t + "/head/b"), mixed)[0];
  double gamma = ops::sigmoid(logit);
  if (cache) {
    cache->gate = std::move(gate);
    cache->mixed = std::move(mixed);
    cache->gamma = gamma;
  }
  return gamma;
}

void AmModel::tower_backward(const ops::Vec& f, const ExpertsCache& ex, int k,
                             const TowerCache& cache, double dlogit) {
  std::string t = tower_prefix(k);
  ops::Vec dmixed =
      ops::affine_backward(ps_.value(t + "/head/w"), cache.mixed, {dlogit},
                           &ps_.grad(t + "/head/w"), &ps_.grad(t + "/head/b"));
  ops::Vec dgate(cache.gate.size(), 0.0);
  for (std::size_t e = 0; e < ex.outs.size(); ++e) {
    dgate[e] = ops::dot(dmixed, ex.outs[e]);
    ops::Vec dout(dmixed.size());
    for (std::size_t i = 0; i < dout.size(); ++i)
      dout[i] = cache.gate[e] * dmixed[i];
    experts_[e].backward(ps_, ex.caches[e], dout);
  }
  ops::Vec dgate_logits = ops::softmax_backward(cache.gate, dgate);
  ops::affine_backward(ps_.value(t + "/gate/w"), f, dgate_logits,
                       &ps_.grad(t + "/gate/w"), &ps_.grad(t + "/gate/b"));
}

ops::Vec AmModel::weights(const ops::Vec& context, const ops::Vec& stats) const {
  ops::Vec f = make_input(context, stats);
  ExpertsCache ex;
  experts_forward(f, &ex);
  ops::Vec gamma(static_cast<std::size_t>(cfg_.pages));
  for (int k = 0; k < cfg_.pages; ++k)
    gamma[static_cast<std::size_t>(k)] = tower_forward(f, ex, k, nullptr);
  return gamma;
}

double AmModel::sample_loss(const data::StreamInstance& inst, double scale,
                            bool with_grad) {
  if (inst.page < 0 || inst.page >= cfg_.pages)
    throw DataError("am model: page out of range: " +
                    std::to_string(inst.page));
  ops::Vec f = make_input(inst.context, inst.stats);
  ExpertsCache ex;
  experts_forward(f, &ex);
  TowerCache tc;
  double gamma = tower_forward(f, ex, inst.page, &tc);
  double label = inst.label ? 1.0 : 0.0;
  double loss = ops::bce(gamma, label);
  if (with_grad) {
    // d bce/d logit through the sigmoid
    double dlogit =
        ops::bce_grad_p(gamma, label) * gamma * (1.0 - gamma) * scale;
    tower_backward(f, ex, inst.page, tc, dlogit);
  }
  return loss;
}

double AmModel::batch_loss(
    const std::vector<const data::StreamInstance*>& batch) {
  if (batch.empty()) throw DataError("am loss: empty batch");
  double total = 0.0;
  for (const data::StreamInstance* inst : batch)
    total += sample_loss(*inst, 0.0, false);
  return total / static_cast<double>(batch.size());
}

double AmModel::batch_loss_and_grad(
    const std::vector<const data::StreamInstance*>& batch) {
  if (batch.empty()) throw DataError("am loss: empty batch");
  double total = 0.0;
  double scale = 1.0 / static_cast<double>(batch.size());
  for (const data::StreamInstance* inst : batch)
    total += sample_loss(*inst, scale, true);
  return total * scale;
}

void AmModel::save(const std::string& file) const { save_checkpoint(ps_, file); }

void AmModel::load(const std::string& file) {
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

}  // namespace klan::am
