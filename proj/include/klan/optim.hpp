#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "klan/params.hpp"

namespace klan {

// Adam with bias correction. State is keyed by parameter path; steps iterate
// paths in lexicographic order, so repeated runs are bit-identical.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from the gradients currently stored in ps.
  // Throws TrainingError naming the parameter if a gradient is non-finite.
  void step(ParameterSet& ps);

  std::int64_t steps_taken() const { return t_; }
  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

}  // namespace klan
