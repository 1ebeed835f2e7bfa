#include "klan/am/train.hpp"

#include <algorithm>
#include <cmath>

#include "klan/error.hpp"
#include "klan/optim.hpp"
#include "klan/rng.hpp"

namespace klan::am {

namespace {
constexpr std::uint64_t kEpochSalt = 0x616d2d65706f6368;  // shuffle stream
}

AmTrainReport train_am(AmModel& model,
                       const std::vector<data::StreamInstance>& train) {
  if (train.empty()) throw DataError("train_am: empty training set");
  const AmConfig& cfg = model.config();
  Adam opt(cfg.lr);
  AmTrainReport report;

  std::vector<const data::StreamInstance*> all;
  all.reserve(train.size());
  for (const auto& x : train) all.push_back(&x);
  report.initial_loss = model.batch_loss(all);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int steps = 0;
  bool done = false;
  for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    RngStream rng(cfg.seed, stream_id(kEpochSalt, epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(i)]);

    double epoch_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const data::StreamInstance*> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(&train[order[i]]);

      model.params().zero_grads();
      double loss = model.batch_loss_and_grad(batch);
      if (!std::isfinite(loss))
        throw TrainingError("train_am: loss diverged at step " +
                            std::to_string(steps + 1));
      opt.step(model.params());
      epoch_total += loss;
      ++batches;
      ++steps;
      if (cfg.max_steps > 0 && steps >= cfg.max_steps) {
        done = true;
        break;
      }
    }
    report.epoch_loss.push_back(epoch_total / static_cast<double>(batches));
  }
  report.steps = steps;
  report.final_loss = model.batch_loss(all);
  return report;
}

double eval_accuracy(AmModel& model,
                     const std::vector<data::StreamInstance>& eval) {
  if (eval.empty()) throw DataError("eval_accuracy: empty eval set");
  int hits = 0;
  for (const auto& inst : eval) {
    ops::Vec gamma = model.weights(inst.context, inst.stats);
    if (inst.page < 0 || inst.page >= static_cast<int>(gamma.size()))
      throw DataError("eval_accuracy: page out of range");
    bool predicted = gamma[static_cast<std::size_t>(inst.page)] >= 0.5;
    if (predicted == (inst.label != 0)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(eval.size());
}

}  // namespace klan::am
