#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klan/pipeline/config.hpp"
#include "klan/pipeline/metrics.hpp"
#include "klan/pipeline/serve.hpp"

namespace klan::pipeline {

// Canonical file names under a dataset directory.
struct DataPaths {
  explicit DataPaths(const std::string& out_dir);

  std::string dir;
  std::string sessions;
  std::string traffic_stats;
  std::string rct_train, rct_eval, rct_schema;
  std::string transitions_train, transitions_eval, transition_schema;
  std::string stream_train, stream_eval, stream_schema;
};

// Canonical checkpoint names under a model directory.
struct ModelPaths {
  explicit ModelPaths(const std::string& dir);

  std::string dir;
  std::string isp, iit, am;
  std::string scores;  // precomputed score store
};

// Simulates the logged past: a history phase under the legacy heuristic,
// then a randomized window where each user is frozen to one arm of
// {legacy control, always page 0, ..., always page K-1}. Builds the uplift,
// transition, and stream datasets from those logs with one shared user-level
// split, fits every schema on the train split only, and writes the lot under
// out_dir.
void generate_datasets(const RunConfig& cfg, const std::string& out_dir);

// One policy's measured metrics for one seed.
struct ArmResult {
  std::string policy;
  ArmMetrics metrics;
};

struct ExperimentResult {
  std::uint64_t seed = 0;
  std::vector<ArmResult> arms;  // order follows the requested policy list
};

// Paired comparison: every arm sees the identical population, entry pattern,
// and world noise for a given seed (world draws are keyed by user/day/entry,
// never by policy). All arms share the same legacy warmup days, so serving
// state at measurement start matches too; policy rng is salted per arm.
// Store-backed arms refresh their scores every morning. Metrics cover the
// measured window only.
ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::vector<PolicySpec>& policies,
                                const ServeComponents& comps,
                                std::uint64_t seed);

// Line-delimited persistence: one record per (seed, arm).
void write_experiment_results(const std::string& file,
                              const std::vector<ExperimentResult>& results);
std::vector<ExperimentResult> read_experiment_results(const std::string& file);

}  // namespace klan::pipeline
