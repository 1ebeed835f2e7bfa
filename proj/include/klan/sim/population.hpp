#pragma once

#include <vector>

#include "klan/sim/types.hpp"

namespace klan::sim {

// Deterministic in (cfg.seed, cfg.users): the same config always yields the
// same population regardless of what else has been simulated.
std::vector<UserProfile> build_population(const SimConfig& cfg);

// observable engagement-level attribute derived from base engagement
int activity_bucket_of(double base_engagement);

struct PopulationStats {
  double dominant_fraction = 0.0;
  double mean_base_engagement = 0.0;
};

PopulationStats population_stats(const std::vector<UserProfile>& users);

}  // namespace klan::sim
