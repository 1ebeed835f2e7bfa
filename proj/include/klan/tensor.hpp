#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace klan {

// Dense row-major float64 tensor. Every public factory and mutator verifies
// the values are finite; shape mismatches throw.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values);
  // 1-d convenience
  static Tensor vec(std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return values_.size(); }
  std::size_t dim(std::size_t i) const;

  double at(std::size_t i) const;
  double& at(std::size_t i);
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j);

  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }
  const std::vector<double>& values() const { return values_; }

  void fill(double v);
  void add_scaled(const Tensor& other, double scale);  // *this += scale*other
  void check_finite(const std::string& what) const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

}  // namespace klan
