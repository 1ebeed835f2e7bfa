#pragma once

#include <map>
#include <vector>

#include "klan/isp/model.hpp"

namespace klan::isp {

struct IspTrainReport {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  double initial_loss = 0.0;       // full-train loss before any update
  double final_loss = 0.0;
  int steps = 0;
};

// Adam over shuffled mini-batches. Deterministic for a fixed (model seed,
// data order). Throws TrainingError naming the step if the loss stops being
// finite. Stops early once cfg.max_steps updates have run (when > 0).
IspTrainReport train_isp(IspModel& model,
                         const std::vector<data::RctInstance>& train);

// Mean squared prediction error per arm on held-out instances, in original
// response units. Arm 0 uses the model's cross-branch control estimate.
std::map<int, double> eval_mse_per_arm(const IspModel& model,
                                       const std::vector<data::RctInstance>& eval);

struct DecouplingReport {
  bool ok = false;
  int treatment = 0;
  double matched_grad = 0.0;             // abs grad mass on the matching branch
  std::vector<std::string> offending;    // non-matching paths with gradient
};

// For a treated sample, backprop its masked loss term and audit that every
// parameter belonging to a different branch received exactly zero gradient
// while the matching branch received some. Zeroes model grads as a side
// effect.
DecouplingReport check_gradient_decoupling(IspModel& model,
                                           const data::RctInstance& treated);

}  // namespace klan::isp
