#pragma once

#include <string>
#include <vector>

#include "klan/pipeline/experiment.hpp"
#include "klan/pipeline/metrics.hpp"

namespace klan::pipeline {

// Cross-seed aggregate for one policy.
struct PolicySummary {
  std::string policy;
  int seeds = 0;
  double mean_usage = 0.0;
  double pdr = 0.0;
  double lt = 0.0;
  double multi_page_fraction = 0.0;
  double mean_dau = 0.0;  // daily actives, averaged over days then seeds
  std::vector<double> effective_entry_rate;
  long long fallback_entries = 0;
};

// Paired per-seed comparison of a policy against a baseline. Wins count
// seeds where the policy is better: higher usage/LT, lower PDR.
struct PolicyDelta {
  std::string policy;
  std::string baseline;
  double usage_delta = 0.0;  // mean over seeds
  int usage_wins = 0, usage_losses = 0;
  double usage_sign_p = 1.0;
  double pdr_delta = 0.0;
  int pdr_wins = 0, pdr_losses = 0;
  double pdr_sign_p = 1.0;
  double lt_delta = 0.0;
  int lt_wins = 0, lt_losses = 0;
  double lt_sign_p = 1.0;
};

// every arm must carry finite values for every metric; throws otherwise
void validate_results(const std::vector<ExperimentResult>& results);

std::vector<PolicySummary> summarize_results(const std::vector<ExperimentResult>& results);

// both names must appear in every seed's arm list
PolicyDelta compare_policies(const std::vector<ExperimentResult>& results,
                             const std::string& policy, const std::string& baseline);

// Human-readable report: the summary table, then paired deltas against
// `baseline` when it names an arm (empty = skip), then uplift ranking
// quality when `qini` is given.
std::string render_report(const std::vector<ExperimentResult>& results,
                          const std::string& baseline, const QiniResult* qini);

}  // namespace klan::pipeline
