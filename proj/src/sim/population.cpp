#include "klan/sim/population.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "klan/rng.hpp"

namespace klan::sim {

namespace {
constexpr std::uint64_t kPopulationSalt = 0x706f70756c617465ULL;
}

int activity_bucket_of(double base_engagement) {
  static const double edges[] = {120, 180, 260, 360, 500, 700, 1000};
  int b = 0;
  for (double e : edges)
    if (base_engagement >= e) ++b;
  return b;  // 0..7
}

std::vector<UserProfile> build_population(const SimConfig& cfg) {
  if (cfg.pages < 1) throw std::invalid_argument("build_population: pages < 1");
  if (cfg.users < 0) throw std::invalid_argument("build_population: users < 0");
  const int K = cfg.pages;

  std::vector<UserProfile> users;
  users.reserve(cfg.users);
  for (int uid = 0; uid < cfg.users; ++uid) {
    RngStream rng(cfg.seed, stream_id(kPopulationSalt, uid));
    UserProfile u;
    u.user_id = uid;
    u.base_engagement =
        std::clamp(std::exp(rng.gaussian(std::log(360.0), 0.45)), 60.0, 1800.0);
    u.activity_bucket = activity_bucket_of(u.base_engagement);
    u.volatility = rng.uniform(0.2, 1.8) * cfg.volatility_scale;
    u.dominant = rng.bernoulli(cfg.single_page_fraction);
    u.affinity.resize(K);
    if (u.dominant) {
      // dominant page drawn with weights K, K-1, ..., 1 -> mild page imbalance
      std::vector<double> w(K);
      for (int k = 0; k < K; ++k) w[k] = static_cast<double>(K - k);
      int dom = rng.categorical(w.data(), K);
      for (int k = 0; k < K; ++k)
        u.affinity[k] = (k == dom) ? rng.uniform(0.8, 1.0) : rng.uniform(0.05, 0.2);
    } else {
      for (int k = 0; k < K; ++k) u.affinity[k] = rng.uniform(0.36, 0.60);
    }
    u.trigger_page = static_cast<int>(
        std::max_element(u.affinity.begin(), u.affinity.end()) -
        u.affinity.begin());
    users.push_back(std::move(u));
  }
  return users;
}

PopulationStats population_stats(const std::vector<UserProfile>& users) {
  PopulationStats st;
  if (users.empty()) return st;
  for (const auto& u : users) {
    st.dominant_fraction += u.dominant ? 1.0 : 0.0;
    st.mean_base_engagement += u.base_engagement;
  }
  st.dominant_fraction /= users.size();
  st.mean_base_engagement /= users.size();
  return st;
}

}  // namespace klan::sim
