#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/data/schema.hpp"
#include "klan/mlp.hpp"
#include "klan/ops.hpp"
#include "klan/params.hpp"

namespace klan::am {

struct AmConfig {
  int pages = 3;   // one sigmoid tower per page
  int experts = 4;  // shared experts
  std::size_t expert_hidden = 16;
  double lr = 1e-3;
  int epochs = 30;
  int batch_size = 64;
  int max_steps = 0;  // 0 = no cap, otherwise stop early
  std::uint64_t seed = 1;
};

// Multi-gate mixture over shared experts. Input is the concatenated
// real-time context and long-term stats, taken raw and z-scored through the
// stream schema; each page owns a gate that blends the expert outputs and a
// sigmoid head that scores how likely the user is to settle on that page
// right now.
//
// Parameters:
//   expert<e>/w1,b1,w2,b2    relu mlp, input -> hidden -> hidden
//   tower<k>/gate/w, gate/b  [E x input] affine to expert mixing logits
//   tower<k>/head/w, head/b  [1 x hidden] affine to the sigmoid logit
class AmModel {
 public:
  AmModel(const AmConfig& cfg, const data::StreamSchema& schema);

  // blending weights, one per page, each in (0, 1)
  ops::Vec weights(const ops::Vec& context, const ops::Vec& stats) const;

  // mean BCE between the assigned page's tower output and the settled
  // label; every other tower is left out of the loss entirely
  double batch_loss(const std::vector<const data::StreamInstance*>& batch);
  double batch_loss_and_grad(
      const std::vector<const data::StreamInstance*>& batch);

  const AmConfig& config() const { return cfg_; }
  const data::StreamSchema& schema() const { return schema_; }
  std::size_t input_dim() const { return in_; }
  ParameterSet& params() { return ps_; }
  const ParameterSet& params() const { return ps_; }

  void save(const std::string& file) const;
  void load(const std::string& file);

 private:
  struct ExpertsCache;
  struct TowerCache;
  ops::Vec make_input(const ops::Vec& context, const ops::Vec& stats) const;
  void experts_forward(const ops::Vec& f, ExpertsCache* cache) const;
  // returns the tower's sigmoid output
  double tower_forward(const ops::Vec& f, const ExpertsCache& ex, int k,
                       TowerCache* cache) const;
  void tower_backward(const ops::Vec& f, const ExpertsCache& ex, int k,
                      const TowerCache& cache, double dlogit);
  double sample_loss(const data::StreamInstance& inst, double scale,
                     bool with_grad);

  AmConfig cfg_;
  data::StreamSchema schema_;
  std::size_t in_ = 0;
  std::vector<Mlp> experts_;
  ParameterSet ps_;
};

}  // namespace klan::am
