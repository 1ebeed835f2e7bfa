#include "klan/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "klan/sim/response.hpp"

namespace klan::sim {

namespace {
constexpr std::uint64_t kWorldSalt = 0x776f726c64ULL;
constexpr std::uint64_t kResponseSalt = 0x72657370ULL;
constexpr std::uint64_t kPolicySalt = 0x706f6c696379ULL;

// shares of the multi-entry mass for 2..5 entries
constexpr double kEntryShape[] = {0.50, 0.30, 0.15, 0.05};
}  // namespace

int sample_entry_count(double multi_entry_prob, double u01) {
  double p1 = 1.0 - multi_entry_prob;
  if (u01 < p1) return 1;
  double acc = p1;
  for (int i = 0; i < 4; ++i) {
    acc += multi_entry_prob * kEntryShape[i];
    if (u01 < acc) return i + 2;
  }
  return 5;
}

double expected_entries_per_day(double multi_entry_prob) {
  double e = 1.0 - multi_entry_prob;
  for (int i = 0; i < 4; ++i) e += multi_entry_prob * kEntryShape[i] * (i + 2);
  return e;
}

std::vector<double> interest_distribution(const UserProfile& user) {
  double total = 0.0;
  for (double a : user.affinity) total += a;
  if (total <= 0.0)
    return std::vector<double>(user.affinity.size(),
                               1.0 / user.affinity.size());
  std::vector<double> rho(user.affinity.size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = user.affinity[k] / total;
  return rho;
}

std::vector<SessionLog> simulate_day(const SimConfig& cfg,
                                     const TrafficModel& traffic,
                                     const std::vector<UserProfile>& users,
                                     int day, const PolicyFn& policy,
                                     std::uint64_t arm_salt,
                                     const SessionCallback& on_session) {
  traffic.validate();
  if (!policy) throw std::invalid_argument("simulate_day: empty policy");

  std::vector<SessionLog> logs;
  logs.reserve(users.size() * 2);

  for (const UserProfile& user : users) {
    RngStream world(cfg.seed, stream_id(kWorldSalt, user.user_id, day));

    int entries = sample_entry_count(cfg.multi_entry_prob, world.uniform01());

    std::vector<int> hours(entries);
    for (int e = 0; e < entries; ++e)
      hours[e] = world.categorical(traffic.hourly_weight.data(), 24);
    std::sort(hours.begin(), hours.end());

    std::vector<double> rho = interest_distribution(user);
    int interest = world.categorical(rho.data(), cfg.pages);
    double drift = std::clamp(cfg.drift_prob * user.volatility, 0.0, 1.0);

    for (int e = 0; e < entries; ++e) {
      if (e > 0 && world.bernoulli(drift))
        interest = world.categorical(rho.data(), cfg.pages);
      bool trigger = world.bernoulli(cfg.trigger_prob);

      RngStream policy_rng(
          cfg.seed, stream_id(kPolicySalt ^ arm_salt, user.user_id, day, e));
      int page = policy(EntryContext{user, day, e, hours[e], trigger, policy_rng});
      if (page < 0 || page >= cfg.pages)
        throw std::out_of_range("simulate_day: policy returned bad page");

      RngStream resp(cfg.seed, stream_id(kResponseSalt, user.user_id, day, e));
      SessionOutcome oc = session_response(cfg, user, page, interest, trigger, resp);

      SessionLog log;
      log.user_id = user.user_id;
      log.day = day;
      log.hour = hours[e];
      log.entry_index = e;
      log.landing_page = page;
      log.usage_seconds = oc.usage_seconds;
      log.page_switches = oc.page_switches;
      log.dropped_off = oc.dropped_off;
      log.hidden_interest = interest;
      log.trigger_active = trigger;
      if (on_session) on_session(log);
      logs.push_back(log);
    }
  }

  std::sort(logs.begin(), logs.end(), [](const SessionLog& a, const SessionLog& b) {
    if (a.day != b.day) return a.day < b.day;
    if (a.hour != b.hour) return a.hour < b.hour;
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.entry_index < b.entry_index;
  });
  return logs;
}

}  // namespace klan::sim
