#include "klan/optim.hpp"

#include <cmath>

#include "klan/error.hpp"

namespace klan {

void Adam::step(ParameterSet& ps) {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const std::string& path : ps.paths()) {
    Tensor& p = ps.value(path);
    const Tensor& g = ps.grad(path);
    auto& m = m_[path];
    auto& v = v_[path];
    if (m.empty()) {
      m.assign(p.numel(), 0.0);
      v.assign(p.numel(), 0.0);
    }
    for (std::size_t i = 0; i < p.numel(); ++i) {
      double gi = g.data()[i];
      if (!std::isfinite(gi))
        throw TrainingError("non-finite gradient for parameter " + path);
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p.data()[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace klan
