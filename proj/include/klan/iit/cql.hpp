#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/iit/qnet.hpp"
#include "klan/ops.hpp"
#include "klan/params.hpp"
#include "klan/sim/types.hpp"

namespace klan::iit {

struct CqlConfig {
  int actions = 3;          // pages
  std::size_t hidden = 64;  // width of both hidden layers
  double gamma = 0.9;
  double alpha = 1.0;  // base conservatism weight
  double beta = 1.0;   // traffic sensitivity of the dynamic weight
  bool dynamic_alpha = true;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::size_t steps = 2000;
  std::size_t target_sync = 100;  // hard target refresh period, in steps
  std::uint64_t seed = 1;
};

// Empirical hour-of-day interaction rates. v[t] is total logged usage in
// hour t scaled by 24 / total usage, so the mean over the day is 1: quiet
// hours sit below 1, peak hours above.
struct TrafficStats {
  std::array<double, 24> v{};

  double at_hour(int hour) const;
  static TrafficStats uniform();  // every hour at the mean rate 1
};

TrafficStats compute_traffic_stats(const std::vector<sim::SessionLog>& logs);
void save_traffic_stats(const TrafficStats& stats, const std::string& file);
TrafficStats load_traffic_stats(const std::string& file);

// Traffic-modulated conservatism weight for one transition:
//   alpha_t = clamp(alpha * exp(-beta * (v_hour - 1)) * extra,
//                   0.1 * alpha, 5 * alpha)
// Low-traffic hours (v < 1) raise the weight, busy hours lower it. `extra`
// is a slot for additional multiplicative signals (entry frequency etc.);
// the clamp applies after all factors. This is the raw formula; whether it
// is used at all is gated by CqlConfig::dynamic_alpha at the loss level.
double dynamic_alpha(const CqlConfig& cfg, const TrafficStats& stats, int hour,
                     double extra = 1.0);

// Per-transition extra multiplier fed into dynamic_alpha. Optional.
using AlphaModifier = std::function<double(const data::Transition&)>;

// Main net ("main/...") plus a frozen bootstrap copy ("target/...") in one
// parameter set. Only main/ ever receives gradients; the target moves only
// through sync_target().
class QModel {
 public:
  QModel(const CqlConfig& cfg, std::size_t state_dim);

  ops::Vec q_values(const ops::Vec& state) const;
  ops::Vec target_q_values(const ops::Vec& state) const;
  void sync_target();

  const CqlConfig& config() const { return cfg_; }
  std::size_t state_dim() const { return main_.state_dim; }
  const QNetwork& main_net() const { return main_; }
  ParameterSet& params() { return ps_; }
  const ParameterSet& params() const { return ps_; }

  void save(const std::string& file) const;
  void load(const std::string& file);

 private:
  CqlConfig cfg_;
  QNetwork main_;
  QNetwork target_;
  ParameterSet ps_;
};

using TransitionBatch = std::vector<const data::Transition*>;

// Bellman regression against the frozen target:
//   mean over batch of (Q(s, a) - y)^2,  y = r + gamma * max_a' Q_target(s')
// with the bootstrap term dropped on terminal transitions.
double td_loss(const QModel& model, const TransitionBatch& batch);

// Conservatism penalty, mean over batch of
//   logsumexp_a Q(s, a) - Q(s, a_logged).
// Pushes unlogged actions down relative to the logged one.
double cql_regularizer(const QModel& model, const TransitionBatch& batch);

struct CqlBreakdown {
  double total = 0.0;       // td + weighted regularizer
  double td = 0.0;          // mean squared bellman error
  double reg = 0.0;         // unweighted mean regularizer
  double mean_alpha = 0.0;  // batch mean of the per-transition weight
  double mean_q = 0.0;      // mean main-net Q over batch and actions
};

// total = mean_i (td_i) + mean_i (alpha_i * reg_i), alpha_i from each
// transition's hour when dynamic_alpha is on, else the base alpha.
CqlBreakdown cql_total_loss(const QModel& model, const TransitionBatch& batch,
                            const TrafficStats& stats,
                            const AlphaModifier& extra = nullptr);
// Same value; also accumulates grads under main/ (target stays grad-free).
CqlBreakdown cql_total_loss_and_grad(QModel& model,
                                     const TransitionBatch& batch,
                                     const TrafficStats& stats,
                                     const AlphaModifier& extra = nullptr);

// Softmax over main-net Q-values: the intra-day interest distribution.
ops::Vec interest_scores(const QModel& model, const ops::Vec& state);

}  // namespace klan::iit
