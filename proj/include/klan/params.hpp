#pragma once

#include <map>
#include <string>
#include <vector>

#include "klan/tensor.hpp"

namespace klan {

// Named parameter tensors plus same-shaped gradient slots. Iteration order is
// lexicographic in the path (std::map), which keeps every consumer
// (optimizer steps, checkpoints, gradient checks) deterministic.
class ParameterSet {
 public:
  Tensor& add(const std::string& path, Tensor value);

  bool has(const std::string& path) const { return params_.count(path) > 0; }
  Tensor& value(const std::string& path);
  const Tensor& value(const std::string& path) const;
  Tensor& grad(const std::string& path);
  const Tensor& grad(const std::string& path) const;

  std::vector<std::string> paths() const;
  std::vector<std::string> paths_with_prefix(const std::string& prefix) const;
  std::size_t size() const { return params_.size(); }

  void zero_grads();
  // sum of |g| over all grads under prefix ("" = all)
  double grad_abs_sum(const std::string& prefix = "") const;

  // scale every gradient (used for batch averaging)
  void scale_grads(double s);

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, Tensor> grads_;
};

}  // namespace klan
