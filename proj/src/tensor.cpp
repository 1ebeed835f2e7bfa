#include "klan/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace klan {

namespace {
std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}
}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_.assign(shape_numel(t.shape_), 0.0);
  return t;
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t = zeros(std::move(shape));
  t.fill(value);
  t.check_finite("Tensor::full");
  return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size())
    throw std::invalid_argument("Tensor::from: shape does not match value count");
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_ = std::move(values);
  t.check_finite("Tensor::from");
  return t;
}

Tensor Tensor::vec(std::vector<double> values) {
  std::vector<std::size_t> shape{values.size()};
  return from(std::move(shape), std::move(values));
}

std::size_t Tensor::dim(std::size_t i) const {
  if (i >= shape_.size()) throw std::out_of_range("Tensor::dim: axis out of range");
  return shape_[i];
}

double Tensor::at(std::size_t i) const {
  if (i >= values_.size()) throw std::out_of_range("Tensor::at: index out of range");
  return values_[i];
}

double& Tensor::at(std::size_t i) {
  if (i >= values_.size()) throw std::out_of_range("Tensor::at: index out of range");
  return values_[i];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  if (ndim() != 2) throw std::logic_error("Tensor::at(i,j) on non-2d tensor");
  if (i >= shape_[0] || j >= shape_[1])
    throw std::out_of_range("Tensor::at: index out of range");
  return values_[i * shape_[1] + j];
}

double& Tensor::at(std::size_t i, std::size_t j) {
  if (ndim() != 2) throw std::logic_error("Tensor::at(i,j) on non-2d tensor");
  if (i >= shape_[0] || j >= shape_[1])
    throw std::out_of_range("Tensor::at: index out of range");
  return values_[i * shape_[1] + j];
}

void Tensor::fill(double v) {
  for (double& x : values_) x = v;
}

void Tensor::add_scaled(const Tensor& other, double scale) {
  if (!same_shape(other))
    throw std::invalid_argument("Tensor::add_scaled: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] += scale * other.values_[i];
  check_finite("Tensor::add_scaled");
}

void Tensor::check_finite(const std::string& what) const {
  for (double x : values_)
    if (!std::isfinite(x))
      throw std::domain_error(what + ": non-finite value in tensor");
}

}  // namespace klan
