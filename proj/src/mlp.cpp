#include "klan/mlp.hpp"

#include <cmath>

namespace klan {

Tensor xavier_init(std::size_t out, std::size_t in, std::uint64_t seed,
                   const std::string& path) {
  RngStream rng(seed, fnv1a64(path));
  double a = std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor t = Tensor::zeros({out, in});
  for (std::size_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(-a, a);
  return t;
}

void Mlp::init(ParameterSet& ps, std::uint64_t seed) const {
  ps.add(prefix + "/w1", xavier_init(hidden, in, seed, prefix + "/w1"));
  ps.add(prefix + "/b1", Tensor::zeros({hidden}));
  ps.add(prefix + "/w2", xavier_init(out, hidden, seed, prefix + "/w2"));
  ps.add(prefix + "/b2", Tensor::zeros({out}));
}

ops::Vec Mlp::forward(const ParameterSet& ps, const ops::Vec& x,
                      Cache* cache) const {
  ops::Vec h_pre = ops::affine_forward(ps.value(prefix + "/w1"),
                                       ps.value(prefix + "/b1"), x);
  ops::Vec h = ops::relu(h_pre);
  ops::Vec y = ops::affine_forward(ps.value(prefix + "/w2"),
                                   ps.value(prefix + "/b2"), h);
  if (cache) {
    cache->x = x;
    cache->h_pre = std::move(h_pre);
    cache->h = std::move(h);
  }
  return y;
}

ops::Vec Mlp::backward(ParameterSet& ps, const Cache& cache,
                       const ops::Vec& dy) const {
  ops::Vec dh = ops::affine_backward(ps.value(prefix + "/w2"), cache.h, dy,
                                     &ps.grad(prefix + "/w2"),
                                     &ps.grad(prefix + "/b2"));
  ops::Vec dh_pre = ops::relu_backward(cache.h_pre, dh);
  return ops::affine_backward(ps.value(prefix + "/w1"), cache.x, dh_pre,
                              &ps.grad(prefix + "/w1"),
                              &ps.grad(prefix + "/b1"));
}

}  // namespace klan
