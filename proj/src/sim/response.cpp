#include "klan/sim/response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klan::sim {

bool is_match(const UserProfile& user, int page, int hidden_interest,
              bool trigger_active) {
  return page == (trigger_active ? user.trigger_page : hidden_interest);
}

double affinity_term(const SimConfig& cfg, const UserProfile& user, int page,
                     bool match) {
  if (page < 0 || page >= static_cast<int>(user.affinity.size()))
    throw std::out_of_range("affinity_term: page out of range");
  return cfg.w_static * user.affinity[page] + cfg.w_dynamic * (match ? 1.0 : 0.0);
}

double mean_usage(const SimConfig& cfg, const UserProfile& user, int page,
                  bool match) {
  return user.base_engagement * affinity_term(cfg, user, page, match);
}

double drop_prob(const SimConfig& cfg, const UserProfile& user, int page,
                 bool match) {
  return std::clamp(1.0 - affinity_term(cfg, user, page, match), 0.02, 0.95);
}

SessionOutcome session_response(const SimConfig& cfg, const UserProfile& user,
                                int page, int hidden_interest,
                                bool trigger_active, RngStream& rng) {
  bool match = is_match(user, page, hidden_interest, trigger_active);

  // fixed draw layout: drop uniform, usage gaussian (2), bounce uniform,
  // switch uniform -- pairing across arms relies on this never varying
  double u_drop = rng.uniform01();
  double noise = rng.gaussian(0.0, cfg.noise_std);
  double u_bounce = rng.uniform01();

  SessionOutcome out;
  out.dropped_off = u_drop < drop_prob(cfg, user, page, match);
  if (out.dropped_off) {
    out.usage_seconds = u_bounce * cfg.drop_threshold;  // short bounce
  } else {
    out.usage_seconds = std::max(0.0, mean_usage(cfg, user, page, match) + noise);
    if (out.usage_seconds < cfg.drop_threshold) out.dropped_off = true;
  }

  // switching effort is driven by mismatch
  out.page_switches = rng.poisson(cfg.switch_rate * (match ? 0.0 : 1.0));
  return out;
}

}  // namespace klan::sim
