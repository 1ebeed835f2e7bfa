#pragma once

#include <functional>
#include <string>
#include <vector>

#include "klan/params.hpp"

namespace klan {

struct GradCheckEntry {
  std::string path;
  std::size_t index;
  double analytic;
  double numeric;
  double rel_err;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  GradCheckEntry worst;
  std::vector<GradCheckEntry> entries;  // one per parameter element
};

// Central finite differences against analytic gradients.
//
// `loss` must be a pure function of the parameter values. `backward` must
// populate ps gradients for that same loss (it is called once, before the
// numeric sweep). Relative error uses max(|analytic|, |numeric|, 1.0) as the
// denominator so near-zero gradients compare on an absolute scale.
GradCheckReport finite_diff_grad_check(
    ParameterSet& ps, const std::function<double()>& loss,
    const std::function<void()>& backward, double eps = 1e-5,
    const std::vector<std::string>& only_prefixes = {});

}  // namespace klan
