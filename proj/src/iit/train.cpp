#include "klan/iit/train.hpp"

#include <cmath>
#include <string>

#include "klan/error.hpp"
#include "klan/optim.hpp"
#include "klan/rng.hpp"

namespace klan::iit {

IitTrainReport train_iit(QModel& model,
                         const std::vector<data::Transition>& train,
                         const TrafficStats& stats,
                         const AlphaModifier& extra) {
  if (train.empty()) throw DataError("train_iit: no transitions");
  const CqlConfig& cfg = model.config();
  if (cfg.batch_size == 0 || cfg.steps == 0)
    throw DataError("train_iit: steps and batch size must be positive");
  if (cfg.target_sync == 0)
    throw DataError("train_iit: target sync period must be positive");

  Adam opt(cfg.lr);
  RngStream rng(cfg.seed, fnv1a64("iit-batches"));
  IitTrainReport report;
  report.step_total.reserve(cfg.steps);
  report.step_td.reserve(cfg.steps);
  report.step_reg.reserve(cfg.steps);
  report.step_mean_q.reserve(cfg.steps);

  TransitionBatch batch(cfg.batch_size);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (step % cfg.target_sync == 0) {
      model.sync_target();
      ++report.syncs;
    }
    for (auto& slot : batch) slot = &train[rng.uniform_int(train.size())];
    model.params().zero_grads();
    CqlBreakdown b = cql_total_loss_and_grad(model, batch, stats, extra);
    if (!std::isfinite(b.total))
      throw TrainingError("train_iit: loss diverged at step " +
                          std::to_string(step));
    opt.step(model.params());
    report.step_total.push_back(b.total);
    report.step_td.push_back(b.td);
    report.step_reg.push_back(b.reg);
    report.step_mean_q.push_back(b.mean_q);
  }
  report.steps = cfg.steps;
  report.final_total = report.step_total.back();
  return report;
}

}  // namespace klan::iit
