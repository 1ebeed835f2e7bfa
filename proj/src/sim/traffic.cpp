#include <cmath>
#include <numeric>
#include <stdexcept>

#include "klan/sim/types.hpp"

namespace klan::sim {

void TrafficModel::validate() const {
  if (hourly_weight.size() != 24)
    throw std::invalid_argument("TrafficModel: need 24 hourly weights");
  double sum = 0.0;
  for (double w : hourly_weight) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("TrafficModel: weights must be positive");
    sum += w;
  }
  if (std::fabs(sum - 24.0) > 1e-9)
    throw std::invalid_argument("TrafficModel: weights must sum to 24");
}

TrafficModel default_tidal_traffic() {
  // Noon and evening peaks, post-midnight trough.
  std::vector<double> base = {
      0.50, 0.45, 0.40, 0.25, 0.20, 0.22, 0.30, 0.70,  // 0-7
      0.90, 1.00, 1.10, 1.30, 1.80, 1.90, 1.75, 1.20,  // 8-15
      1.10, 1.15, 1.30, 1.90, 2.10, 2.00, 1.80, 0.90,  // 16-23
  };
  double sum = std::accumulate(base.begin(), base.end(), 0.0);
  for (double& w : base) w *= 24.0 / sum;
  TrafficModel tm{std::move(base)};
  tm.validate();
  return tm;
}

}  // namespace klan::sim
