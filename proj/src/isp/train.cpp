#include "klan/isp/train.hpp"

#include <algorithm>
#include <cmath>

#include "klan/error.hpp"
#include "klan/optim.hpp"
#include "klan/rng.hpp"

namespace klan::isp {

namespace {
constexpr std::uint64_t kEpochSalt = 0x6973702d65706f63;  // shuffle stream
}

IspTrainReport train_isp(IspModel& model,
                         const std::vector<data::RctInstance>& train) {
  if (train.empty()) throw DataError("train_isp: empty training set");
  const IspConfig& cfg = model.config();
  Adam opt(cfg.lr);
  IspTrainReport report;

  std::vector<const data::RctInstance*> all;
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
         start += cfg.batch_size) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const data::RctInstance*> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);

      model.params().zero_grads();
      double loss = model.batch_loss_and_grad(batch);
      if (!std::isfinite(loss))
        throw TrainingError("train_isp: loss diverged at step " +
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
    report.epoch_loss.push_back(epoch_total / batches);
  }
  report.steps = steps;
  report.final_loss = model.batch_loss(all);
  return report;
}

std::map<int, double> eval_mse_per_arm(
    const IspModel& model, const std::vector<data::RctInstance>& eval) {
  std::map<int, double> sum;
  std::map<int, int> count;
  for (const auto& x : eval) {
    IspModel::Responses r = model.predict_responses(x);
    double pred = x.treatment == 0 ? r.control_mean : r.treated[x.treatment - 1];
    double err = x.response - pred;
    sum[x.treatment] += err * err;
    count[x.treatment] += 1;
  }
  std::map<int, double> out;
  for (const auto& [arm, s] : sum) out[arm] = s / count[arm];
  return out;
}

DecouplingReport check_gradient_decoupling(IspModel& model,
                                           const data::RctInstance& treated) {
  if (treated.treatment == 0)
    throw DataError("check_gradient_decoupling: sample must be treated");
  DecouplingReport report;
  report.treatment = treated.treatment;

  model.params().zero_grads();
  model.batch_loss_and_grad({&treated});

  for (const auto& prefix : model.branch_prefixes(treated.treatment))
    report.matched_grad += model.params().grad_abs_sum(prefix);
  for (int j = 1; j <= model.config().treatments; ++j) {
    if (j == treated.treatment) continue;
    for (const auto& prefix : model.branch_prefixes(j)) {
      for (const auto& path : model.params().paths_with_prefix(prefix)) {
        // a path co-owned by the matching branch still violates decoupling:
        // branch j's prediction moves when it gets gradient
        if (model.params().grad_abs_sum(path) > 0.0)
          report.offending.push_back(path);
      }
    }
  }
  std::sort(report.offending.begin(), report.offending.end());
  report.offending.erase(
      std::unique(report.offending.begin(), report.offending.end()),
      report.offending.end());
  model.params().zero_grads();
  report.ok = report.offending.empty() && report.matched_grad > 0.0;
  return report;
}

}  // namespace klan::isp
