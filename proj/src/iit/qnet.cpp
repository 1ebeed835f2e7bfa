#include "klan/iit/qnet.hpp"

#include "klan/mlp.hpp"

namespace klan::iit {

void QNetwork::init(ParameterSet& ps, std::uint64_t seed) const {
  ps.add(prefix + "/w1", xavier_init(hidden, state_dim, seed, prefix + "/w1"));
  ps.add(prefix + "/b1", Tensor::zeros({hidden}));
  ps.add(prefix + "/w2", xavier_init(hidden, hidden, seed, prefix + "/w2"));
  ps.add(prefix + "/b2", Tensor::zeros({hidden}));
  ps.add(prefix + "/w3", xavier_init(actions, hidden, seed, prefix + "/w3"));
  ps.add(prefix + "/b3", Tensor::zeros({actions}));
}

ops::Vec QNetwork::forward(const ParameterSet& ps, const ops::Vec& s,
                           Cache* cache) const {
  ops::Vec h1_pre = ops::affine_forward(ps.value(prefix + "/w1"),
                                        ps.value(prefix + "/b1"), s);
  ops::Vec h1 = ops::relu(h1_pre);
  ops::Vec h2_pre = ops::affine_forward(ps.value(prefix + "/w2"),
                                        ps.value(prefix + "/b2"), h1);
  ops::Vec h2 = ops::relu(h2_pre);
  ops::Vec q = ops::affine_forward(ps.value(prefix + "/w3"),
                                   ps.value(prefix + "/b3"), h2);
  if (cache) {
    cache->x = s;
    cache->h1_pre = std::move(h1_pre);
    cache->h1 = std::move(h1);
    cache->h2_pre = std::move(h2_pre);
    cache->h2 = std::move(h2);
  }
  return q;
}

ops::Vec QNetwork::backward(ParameterSet& ps, const Cache& cache,
                            const ops::Vec& dq) const {
  ops::Vec dh2 = ops::affine_backward(ps.value(prefix + "/w3"), cache.h2, dq,
                                      &ps.grad(prefix + "/w3"),
                                      &ps.grad(prefix + "/b3"));
  ops::Vec dh2_pre = ops::relu_backward(cache.h2_pre, dh2);
  ops::Vec dh1 = ops::affine_backward(ps.value(prefix + "/w2"), cache.h1,
                                      dh2_pre, &ps.grad(prefix + "/w2"),
                                      &ps.grad(prefix + "/b2"));
  ops::Vec dh1_pre = ops::relu_backward(cache.h1_pre, dh1);
  return ops::affine_backward(ps.value(prefix + "/w1"), cache.x, dh1_pre,
                              &ps.grad(prefix + "/w1"),
                              &ps.grad(prefix + "/b1"));
}

}  // namespace klan::iit
