#pragma once

#include <string>
#include <vector>

#include "klan/ops.hpp"
#include "klan/params.hpp"
#include "klan/rng.hpp"

namespace klan {

// Two-layer perceptron block: y = W2 relu(W1 x + b1) + b2.
// Parameters live in a ParameterSet under `prefix` as w1/b1/w2/b2, so blocks
// compose into larger models while staying checkpointable and checkable.
struct Mlp {
  std::string prefix;
  std::size_t in = 0, hidden = 0, out = 0;

  struct Cache {
    ops::Vec x, h_pre, h;
  };

  void init(ParameterSet& ps, std::uint64_t seed) const;
  ops::Vec forward(const ParameterSet& ps, const ops::Vec& x, Cache* cache) const;
  // dy -> accumulates parameter grads in ps, returns dx
  ops::Vec backward(ParameterSet& ps, const Cache& cache, const ops::Vec& dy) const;
};

// Xavier-uniform init for a [out x in] matrix; deterministic per (seed, path).
Tensor xavier_init(std::size_t out, std::size_t in, std::uint64_t seed,
                   const std::string& path);

}  // namespace klan
