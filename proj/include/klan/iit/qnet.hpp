#pragma once

#include <cstdint>
#include <string>

#include "klan/ops.hpp"
#include "klan/params.hpp"

namespace klan::iit {

// State -> K action values through two relu hidden layers. Parameters live
// under `prefix` as w1/b1/w2/b2/w3/b3 so a main and a target copy can share
// one ParameterSet under different prefixes.
struct QNetwork {
  std::string prefix;
  std::size_t state_dim = 0;
  std::size_t hidden = 64;
  std::size_t actions = 0;

  struct Cache {
    ops::Vec x, h1_pre, h1, h2_pre, h2;
  };

  void init(ParameterSet& ps, std::uint64_t seed) const;
  ops::Vec forward(const ParameterSet& ps, const ops::Vec& s, Cache* cache) const;
  // dq -> accumulates grads under prefix, returns ds
  ops::Vec backward(ParameterSet& ps, const Cache& cache, const ops::Vec& dq) const;
};

}  // namespace klan::iit
