#include "klan/pipeline/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "klan/error.hpp"

namespace klan::pipeline {

namespace {

void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw DataError("report: non-finite " + what);
}

// per-seed metric values of one policy, aligned to results order
struct SeedSeries {
  std::vector<double> usage, pdr, lt;
};

SeedSeries series_for(const std::vector<ExperimentResult>& results,
                      const std::string& policy) {
  SeedSeries s;
  for (const auto& r : results) {
    bool found = false;
    for (const auto& a : r.arms) {
      if (a.policy != policy) continue;
      s.usage.push_back(a.metrics.mean_usage);
      s.pdr.push_back(a.metrics.pdr);
      s.lt.push_back(a.metrics.lt);
      found = true;
      break;
    }
    if (!found)
      throw DataError("report: policy '" + policy + "' missing for seed " +
                      std::to_string(r.seed));
  }
  return s;
}

std::string num(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

}  // namespace

void validate_results(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw DataError("report: no results");
  for (const auto& r : results) {
    if (r.arms.empty()) throw DataError("report: a seed has no arms");
    for (const auto& a : r.arms) {
      check_finite(a.metrics.pdr, "pdr for " + a.policy);
      check_finite(a.metrics.mean_usage, "mean_usage for " + a.policy);
      check_finite(a.metrics.lt, "lt for " + a.policy);
      check_finite(a.metrics.multi_page_fraction, "multi_page_fraction for " + a.policy);
      if (a.metrics.dau.empty()) throw DataError("report: empty dau for " + a.policy);
      for (double d : a.metrics.dau) check_finite(d, "dau for " + a.policy);
      if (a.metrics.effective_entry_rate.empty())
        throw DataError("report: empty entry rates for " + a.policy);
      for (double e : a.metrics.effective_entry_rate)
        check_finite(e, "effective_entry_rate for " + a.policy);
      if (a.metrics.pdr < 0.0 || a.metrics.pdr > 1.0)
        throw DataError("report: pdr out of [0,1] for " + a.policy);
    }
  }
}

std::vector<PolicySummary> summarize_results(const std::vector<ExperimentResult>& results) {
  validate_results(results);
  // keep first-seen order
  std::vector<std::string> order;
  std::map<std::string, PolicySummary> acc;
  for (const auto& r : results) {
    for (const auto& a : r.arms) {
      auto it = acc.find(a.policy);
      if (it == acc.end()) {
        order.push_back(a.policy);
        PolicySummary s;
        s.policy = a.policy;
        s.effective_entry_rate.assign(a.metrics.effective_entry_rate.size(), 0.0);
        it = acc.emplace(a.policy, std::move(s)).first;
      }
      auto& s = it->second;
      ++s.seeds;
      s.mean_usage += a.metrics.mean_usage;
      s.pdr += a.metrics.pdr;
      s.lt += a.metrics.lt;
      s.multi_page_fraction += a.metrics.multi_page_fraction;
      double dau = 0.0;
      for (double d : a.metrics.dau) dau += d;
      s.mean_dau += dau / static_cast<double>(a.metrics.dau.size());
      if (s.effective_entry_rate.size() != a.metrics.effective_entry_rate.size())
        throw DataError("report: page count differs between seeds");
      for (std::size_t k = 0; k < s.effective_entry_rate.size(); ++k)
        s.effective_entry_rate[k] += a.metrics.effective_entry_rate[k];
      s.fallback_entries += a.metrics.fallback_entries;
    }
  }
  std::vector<PolicySummary> out;
  for (const auto& name : order) {
    PolicySummary s = acc.at(name);
    double n = static_cast<double>(s.seeds);
    s.mean_usage /= n;
    s.pdr /= n;
    s.lt /= n;
    s.multi_page_fraction /= n;
    s.mean_dau /= n;
    for (auto& e : s.effective_entry_rate) e /= n;
    out.push_back(std::move(s));
  }
  return out;
}

PolicyDelta compare_policies(const std::vector<ExperimentResult>& results,
                             const std::string& policy, const std::string& baseline) {
  auto a = series_for(results, policy);
  auto b = series_for(results, baseline);
  PolicyDelta d;
  d.policy = policy;
  d.baseline = baseline;
  std::size_t n = a.usage.size();
  for (std::size_t i = 0; i < n; ++i) {
    double du = a.usage[i] - b.usage[i];
    double dp = a.pdr[i] - b.pdr[i];
    double dl = a.lt[i] - b.lt[i];
    d.usage_delta += du / static_cast<double>(n);
    d.pdr_delta += dp / static_cast<double>(n);
    d.lt_delta += dl / static_cast<double>(n);
    if (du > 0) ++d.usage_wins;
    if (du < 0) ++d.usage_losses;
    if (dp < 0) ++d.pdr_wins;  // lower drop-off is the good direction
    if (dp > 0) ++d.pdr_losses;
    if (dl > 0) ++d.lt_wins;
    if (dl < 0) ++d.lt_losses;
  }
  d.usage_sign_p = sign_test_pvalue(d.usage_wins, d.usage_losses);
  d.pdr_sign_p = sign_test_pvalue(d.pdr_wins, d.pdr_losses);
  d.lt_sign_p = sign_test_pvalue(d.lt_wins, d.lt_losses);
  return d;
}

std::string render_report(const std::vector<ExperimentResult>& results,
                          const std::string& baseline, const QiniResult* qini) {
  auto summaries = summarize_results(results);
  std::ostringstream os;

  os << "policy           usage_s     pdr      lt   multi  mean_dau  fallbacks\n";
  os << "---------------------------------------------------------------------\n";
  for (const auto& s : summaries) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %8s %7s %7s %7s %9s %10lld\n",
                  s.policy.c_str(), num(s.mean_usage, 2).c_str(),
                  num(s.pdr, 4).c_str(), num(s.lt, 3).c_str(),
                  num(s.multi_page_fraction, 3).c_str(),
                  num(s.mean_dau, 1).c_str(), s.fallback_entries);
    os << line;
  }

  os << "\neffective entry rate per page\n";
  for (const auto& s : summaries) {
    os << "  " << s.policy << ":";
    for (double e : s.effective_entry_rate) os << " " << num(e, 4);
    os << "\n";
  }

  bool have_baseline = false;
  if (!baseline.empty()) {
    for (const auto& s : summaries) have_baseline = have_baseline || s.policy == baseline;
  }
  if (have_baseline) {
    os << "\npaired deltas vs " << baseline << " over " << results.size()
       << " seeds (wins-losses, sign-test p)\n";
    for (const auto& s : summaries) {
      if (s.policy == baseline) continue;
      auto d = compare_policies(results, s.policy, baseline);
      os << "  " << s.policy << ": usage " << num(d.usage_delta, 2) << " ("
         << d.usage_wins << "-" << d.usage_losses << ", p=" << num(d.usage_sign_p, 4)
         << "), pdr " << num(d.pdr_delta, 4) << " (" << d.pdr_wins << "-"
         << d.pdr_losses << ", p=" << num(d.pdr_sign_p, 4) << "), lt "
         << num(d.lt_delta, 3) << " (" << d.lt_wins << "-" << d.lt_losses
         << ", p=" << num(d.lt_sign_p, 4) << ")\n";
    }
  }

  if (qini) {
    os << "\nuplift ranking quality (standardized response units)\n";
    os << "  qini " << num(qini->qini, 5) << ", auuc " << num(qini->auuc, 5) << "\n";
    for (std::size_t k = 0; k < qini->per_treatment_qini.size(); ++k)
      os << "  page " << k << ": qini " << num(qini->per_treatment_qini[k], 5)
         << ", auuc " << num(qini->per_treatment_auuc[k], 5) << "\n";
  }
  return os.str();
}

}  // namespace klan::pipeline
