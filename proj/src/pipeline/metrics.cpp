#include "klan/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "klan/error.hpp"

namespace klan::pipeline {

double compute_lt(const std::vector<std::vector<char>>& activity, int first_day, int last_day) {
  if (last_day < first_day) throw DataError("compute_lt: window end before start");
  if (first_day < 0) throw DataError("compute_lt: negative day index");

  long long active_users = 0;
  for (const auto& row : activity) {
    if (static_cast<int>(row.size()) <= last_day)
      throw DataError("compute_lt: activity row shorter than the window");
    for (int d = first_day; d <= last_day; ++d) {
      if (row[d]) {
        ++active_users;
        break;
      }
    }
  }
  if (active_users == 0) throw DataError("compute_lt: no active users in the window");

  int tail_start = std::max(last_day - 6, first_day);
  long long dau_sum = 0;
  for (int d = tail_start; d <= last_day; ++d) {
    for (const auto& row : activity)
      if (row[d]) ++dau_sum;
  }
  return static_cast<double>(dau_sum) / static_cast<double>(active_users);
}

double compute_pdr(const std::vector<sim::SessionLog>& logs) {
  if (logs.empty()) throw DataError("compute_pdr: no sessions");
  long long dropped = 0;
  for (const auto& s : logs)
    if (s.dropped_off) ++dropped;
  return static_cast<double>(dropped) / static_cast<double>(logs.size());
}

ArmMetrics compute_arm_metrics(const std::vector<sim::SessionLog>& logs, int pages,
                               int first_day, int last_day) {
  if (pages < 1) throw DataError("compute_arm_metrics: pages must be positive");
  if (last_day < first_day) throw DataError("compute_arm_metrics: empty day window");

  ArmMetrics m;
  int days = last_day - first_day + 1;
  m.dau.assign(days, 0.0);
  m.effective_entry_rate.assign(pages, 0.0);

  std::map<int, std::set<int>> pages_seen;       // user -> distinct landing pages
  std::map<int, std::set<int>> active_days;      // user -> days with a non-dropped session
  double usage_total = 0.0;
  long long dropped = 0;

  for (const auto& s : logs) {
    if (s.day < first_day || s.day > last_day) continue;
    if (s.landing_page < 0 || s.landing_page >= pages)
      throw DataError("compute_arm_metrics: landing page out of range");
    ++m.sessions;
    usage_total += s.usage_seconds;
    if (s.dropped_off) ++dropped;
    if (!s.dropped_off) active_days[s.user_id].insert(s.day);
    pages_seen[s.user_id].insert(s.landing_page);
    if (s.usage_seconds >= 10.0) m.effective_entry_rate[s.landing_page] += 1.0;
  }
  if (m.sessions == 0) throw DataError("compute_arm_metrics: no sessions in the window");

  m.pdr = static_cast<double>(dropped) / static_cast<double>(m.sessions);
  m.mean_usage = usage_total / static_cast<double>(m.sessions);
  for (int k = 0; k < pages; ++k) m.effective_entry_rate[k] /= static_cast<double>(m.sessions);

  for (const auto& [user, ds] : active_days)
    for (int d : ds) m.dau[d - first_day] += 1.0;

  long long multi = 0;
  for (const auto& [user, ps] : pages_seen)
    if (ps.size() >= 2) ++multi;
  m.multi_page_fraction = static_cast<double>(multi) / static_cast<double>(pages_seen.size());

  // LT needs the per-user activity matrix; users with sessions but no
  // non-dropped ones still count as rows (they are just never active).
  std::vector<std::vector<char>> activity;
  activity.reserve(pages_seen.size());
  for (const auto& [user, ps] : pages_seen) {
    std::vector<char> row(static_cast<std::size_t>(last_day) + 1, 0);
    auto it = active_days.find(user);
    if (it != active_days.end())
      for (int d : it->second) row[d] = 1;
    activity.push_back(std::move(row));
  }
  m.lt = compute_lt(activity, first_day, last_day);
  return m;
}

namespace {

struct RankedUnit {
  double score = 0.0;
  double y = 0.0;  // standardized response
  bool treated = false;
  int user_id = 0;
};

// Area bookkeeping for one treatment arm vs control.
void qini_for_treatment(const std::vector<data::RctInstance>& eval, int k,
                        const UpliftScorer& score, double* qini, double* auuc,
                        std::vector<double>* curve_out) {
  std::vector<const data::RctInstance*> pool;
  long long treated_n = 0;
  for (const auto& x : eval) {
    if (x.treatment == k || x.treatment == 0) {
      pool.push_back(&x);
      if (x.treatment == k) ++treated_n;
    }
  }
  if (treated_n == 0)
    throw DataError("qini_auuc: no instances for treatment " + std::to_string(k));
  if (treated_n == static_cast<long long>(pool.size()))
    throw DataError("qini_auuc: control arm missing");

  // standardize responses over the pool so curve areas are unit-free
  double mean = 0.0;
  for (const auto* x : pool) mean += x->response;
  mean /= static_cast<double>(pool.size());
  double var = 0.0;
  for (const auto* x : pool) var += (x->response - mean) * (x->response - mean);
  var /= static_cast<double>(pool.size());
  double sd = std::sqrt(var);
  if (!(sd > 0.0)) sd = 1.0;

  std::vector<RankedUnit> units;
  units.reserve(pool.size());
  for (const auto* x : pool) {
    RankedUnit u;
    u.score = score(*x, k);
    if (!std::isfinite(u.score)) throw DataError("qini_auuc: non-finite score");
    u.y = (x->response - mean) / sd;
    u.treated = x->treatment == k;
    u.user_id = x->user_id;
    units.push_back(u);
  }
  std::sort(units.begin(), units.end(), [](const RankedUnit& a, const RankedUnit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.user_id < b.user_id;
  });

  std::size_t n = units.size();
  double st = 0.0, sc = 0.0;
  long long nt = 0, nc = 0;
  std::vector<double> curve(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (units[i].treated) {
      st += units[i].y;
      ++nt;
    } else {
      sc += units[i].y;
      ++nc;
    }
    double x_frac = static_cast<double>(i + 1) / static_cast<double>(n);
    double diff = (nt > 0 && nc > 0)
                      ? st / static_cast<double>(nt) - sc / static_cast<double>(nc)
                      : 0.0;
    curve[i] = diff * x_frac;
  }

  double u_final = curve[n - 1];
  double area = 0.0, area_vs_random = 0.0;
  double dx = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x_frac = static_cast<double>(i + 1) / static_cast<double>(n);
    area += curve[i] * dx;
    area_vs_random += (curve[i] - x_frac * u_final) * dx;
  }
  *auuc = area;
  *qini = area_vs_random;
  *curve_out = std::move(curve);
}

}  // namespace

QiniResult qini_auuc(const std::vector<data::RctInstance>& eval, int treatments,
                     const UpliftScorer& score) {
  if (treatments < 1) throw DataError("qini_auuc: treatments must be positive");
  if (eval.empty()) throw DataError("qini_auuc: no eval instances");
  if (!score) throw DataError("qini_auuc: no scorer");

  QiniResult r;
  r.per_treatment_qini.resize(treatments, 0.0);
  r.per_treatment_auuc.resize(treatments, 0.0);
  r.per_treatment_curve.resize(treatments);
  for (int k = 1; k <= treatments; ++k) {
    double q = 0.0, a = 0.0;
    qini_for_treatment(eval, k, score, &q, &a, &r.per_treatment_curve[k - 1]);
    r.per_treatment_qini[k - 1] = q;
    r.per_treatment_auuc[k - 1] = a;
    r.qini += q / static_cast<double>(treatments);
    r.auuc += a / static_cast<double>(treatments);
  }
  return r;
}

double sign_test_pvalue(int wins, int losses) {
  if (wins < 0 || losses < 0) throw DataError("sign_test_pvalue: negative counts");
  int n = wins + losses;
  if (n == 0) return 1.0;

  // exact binomial(n, 1/2) tail, two-sided: sum pmf(i) over all i with
  // pmf(i) <= pmf(observed)
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  double log_half_n = n * std::log(0.5);
  double log_fact = 0.0;  // running log(n choose i)
  for (int i = 0; i <= n; ++i) {
    pmf[i] = std::exp(log_fact + log_half_n);
    if (i < n) log_fact += std::log(static_cast<double>(n - i)) -
                           std::log(static_cast<double>(i + 1));
  }
  double obs = pmf[wins];
  double p = 0.0;
  for (int i = 0; i <= n; ++i)
    if (pmf[i] <= obs * (1.0 + 1e-12)) p += pmf[i];
  return std::min(1.0, p);
}

}  // namespace klan::pipeline
