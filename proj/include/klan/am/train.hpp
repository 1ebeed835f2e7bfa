#pragma once

#include <vector>

#include "klan/am/model.hpp"

namespace klan::am {

struct AmTrainReport {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  double initial_loss = 0.0;       // full-train loss before any update
  double final_loss = 0.0;
  int steps = 0;
};

// Adam over shuffled mini-batches, deterministic under the config seed.
// Throws TrainingError naming the step if the loss stops being finite.
// Stops early once cfg.max_steps updates have run (when > 0).
AmTrainReport train_am(AmModel& model,
                       const std::vector<data::StreamInstance>& train);

// Share of instances whose assigned-page weight, thresholded at 0.5,
// matches the settled label.
double eval_accuracy(AmModel& model,
                     const std::vector<data::StreamInstance>& eval);

}  // namespace klan::am
