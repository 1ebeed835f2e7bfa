#include "klan/params.hpp"

#include <cmath>
#include <stdexcept>

namespace klan {

Tensor& ParameterSet::add(const std::string& path, Tensor value) {
  if (path.empty()) throw std::invalid_argument("ParameterSet::add: empty path");
  if (params_.count(path))
    throw std::invalid_argument("ParameterSet::add: duplicate path " + path);
  value.check_finite("ParameterSet::add(" + path + ")");
  grads_[path] = Tensor::zeros(value.shape());
  auto [it, ok] = params_.emplace(path, std::move(value));
  (void)ok;
  return it->second;
}

Tensor& ParameterSet::value(const std::string& path) {
  auto it = params_.find(path);
  if (it == params_.end())
    throw std::out_of_range("ParameterSet: unknown parameter " + path);
  return it->second;
}

const Tensor& ParameterSet::value(const std::string& path) const {
  auto it = params_.find(path);
  if (it == params_.end())
    throw std::out_of_range("ParameterSet: unknown parameter " + path);
  return it->second;
}

Tensor& ParameterSet::grad(const std::string& path) {
  auto it = grads_.find(path);
  if (it == grads_.end())
    throw std::out_of_range("ParameterSet: unknown parameter " + path);
  return it->second;
}

const Tensor& ParameterSet::grad(const std::string& path) const {
  auto it = grads_.find(path);
  if (it == grads_.end())
    throw std::out_of_range("ParameterSet: unknown parameter " + path);
  return it->second;
}

std::vector<std::string> ParameterSet::paths() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [k, v] : params_) out.push_back(k);
  return out;
}

std::vector<std::string> ParameterSet::paths_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : params_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void ParameterSet::zero_grads() {
  for (auto& [k, g] : grads_) g.fill(0.0);
}

double ParameterSet::grad_abs_sum(const std::string& prefix) const {
  double s = 0.0;
  for (const auto& [k, g] : grads_) {
    if (!prefix.empty() && k.rfind(prefix, 0) != 0) continue;
    for (std::size_t i = 0; i < g.numel(); ++i) s += std::fabs(g.data()[i]);
  }
  return s;
}

void ParameterSet::scale_grads(double s) {
  for (auto& [k, g] : grads_)
    for (std::size_t i = 0; i < g.numel(); ++i) g.data()[i] *= s;
}

}  // namespace klan
