#include "klan/am/fuse.hpp"

#include <cmath>
#include <string>

#include "klan/error.hpp"

namespace klan::am {

namespace {

constexpr double kSimplexTol = 1e-6;

void check_simplex(const ops::Vec& v, const char* name) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < -kSimplexTol || x > 1.0 + kSimplexTol)
      throw DataError(std::string(name) + " is not on the simplex");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw DataError(std::string(name) + " does not sum to 1");
}

}  // namespace

ops::Vec fuse_scores(const ops::Vec& delta, const ops::Vec& p,
                     const ops::Vec& gamma) {
  if (delta.empty() || delta.size() != p.size() || delta.size() != gamma.size())
    throw DataError("fuse_scores: size mismatch");
  check_simplex(delta, "delta");
  check_simplex(p, "p");
  for (double g : gamma) {
    if (!std::isfinite(g) || g < 0.0 || g > 1.0)
      throw DataError("gamma is outside [0, 1]");
  }
  ops::Vec sigma(delta.size());
  for (std::size_t k = 0; k < sigma.size(); ++k)
    sigma[k] = gamma[k] * delta[k] + (1.0 - gamma[k]) * p[k];
  return sigma;
}

int select_page(const ops::Vec& sigma) {
  if (sigma.empty()) throw DataError("select_page: empty scores");
  int best = 0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    if (!std::isfinite(sigma[k]))
      throw DataError("select_page: non-finite score at page " +
                      std::to_string(k));
    if (sigma[k] > sigma[static_cast<std::size_t>(best)])
      best = static_cast<int>(k);
  }
  return best;
}

}  // namespace klan::am
