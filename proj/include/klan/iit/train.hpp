#pragma once

#include <cstddef>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/iit/cql.hpp"

namespace klan::iit {

struct IitTrainReport {
  // one entry per optimizer step
  std::vector<double> step_total;
  std::vector<double> step_td;
  std::vector<double> step_reg;
  std::vector<double> step_mean_q;
  double final_total = 0.0;
  std::size_t steps = 0;
  std::size_t syncs = 0;  // hard target refreshes performed
};

// Offline Q-learning over logged transitions: uniform minibatches with
// replacement, Adam on the main net, hard target sync every
// config().target_sync steps (including step 0). Transitions are consumed
// as-is; normalize states and rewards upstream. NaN loss raises
// TrainingError.
IitTrainReport train_iit(QModel& model,
                         const std::vector<data::Transition>& train,
                         const TrafficStats& stats,
                         const AlphaModifier& extra = nullptr);

}  // namespace klan::iit
