#pragma once

#include <cstdint>
#include <string>

#include "klan/am/model.hpp"
#include "klan/iit/cql.hpp"
#include "klan/isp/model.hpp"
#include "klan/sim/types.hpp"

namespace klan::pipeline {

// Knobs for data generation and the serving experiment, [experiment] section.
struct ExperimentConfig {
  int history_days = 14;     // legacy-policy days logged before the trial
  int rct_window_days = 7;   // randomized-assignment days
  int emit_from_day = 7;     // first day hourly/stream datasets emit rows
  double train_fraction = 0.8;
  int warmup_days = 3;       // serving days before measurement starts
  int measure_days = 7;
  int seeds = 10;            // paired experiment repetitions
  double legacy_explore = 0.5;  // explore share of the legacy policy
};

// Everything a run needs, assembled from one config file. Section names:
// [sim], [isp], [iit], [am], [experiment]. Any unknown section or key is an
// error, so typos fail loudly. Page count lives in [sim] and is propagated
// to the per-model configs after parsing.
struct RunConfig {
  sim::SimConfig sim;
  isp::IspConfig isp;
  iit::CqlConfig iit;
  am::AmConfig am;
  ExperimentConfig experiment;
};

// Parses the INI-style config file. Missing keys keep their defaults;
// malformed lines, unknown keys, and unparseable values throw DataError
// naming the line.
RunConfig load_config(const std::string& file);

// Built-in defaults (what an empty file parses to).
RunConfig default_config();

// Applies the global --seed override: the simulator and every model train
// seed take the given value.
void override_seed(RunConfig& cfg, std::uint64_t seed);

// Stable fingerprint of a config file's bytes, for manifests.
std::uint64_t config_fingerprint(const std::string& file);

}  // namespace klan::pipeline
