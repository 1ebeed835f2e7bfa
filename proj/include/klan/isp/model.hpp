#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klan/data/records.hpp"
#include "klan/data/schema.hpp"
#include "klan/mlp.hpp"
#include "klan/params.hpp"

namespace klan::isp {

struct IspConfig {
  int treatments = 3;     // K: one branch per non-control treatment
  int experts = 4;        // M: experts per branch
  int embed_dim = 8;      // d: embedding width, also the latent width
  int expert_hidden = 16;
  int tower_hidden = 16;
  double kl_weight = 1.0;
  double lr = 1e-3;
  int epochs = 30;
  int batch_size = 64;
  int max_steps = 0;  // 0 = bounded by epochs only
  std::uint64_t seed = 1;
};

// Multi-branch uplift model. Branch k (1-based, = treatment id) predicts the
// response under treatment k and, via a second pass with the control
// embedding, the branch-local control response. Each branch selects its own
// weighting over the shared feature embeddings, mixes M experts through a
// gate, and reads the response off a private tower. Parameters of different
// branches are disjoint by construction; the shared_trunk variant
// deliberately breaks that (one expert/gate/selector stack for all
// branches) to give the decoupling audit a counterexample.
class IspModel {
 public:
  IspModel(IspConfig cfg, data::RctSchema schema, bool shared_trunk = false);

  // Mean per-sample loss: treated samples contribute the matching branch's
  // squared error only; control samples contribute every branch's control
  // pass plus the latent-alignment KL against the cross-branch mean latent.
  double batch_loss(const std::vector<const data::RctInstance*>& batch);
  // Same value, and accumulates parameter gradients (caller zeroes first).
  double batch_loss_and_grad(const std::vector<const data::RctInstance*>& batch);

  // Response predictions in original units (seconds). Index i holds branch
  // i+1. control_mean is the cross-branch mean control response, clamped
  // away from zero, as used by the preference ratios.
  struct Responses {
    std::vector<double> treated;
    std::vector<double> control;
    double control_mean = 0.0;
  };
  Responses predict_responses(const data::RctInstance& x) const;

  // δ: softmax over (treated response / clamped mean control response).
  std::vector<double> predict_static_preferences(const data::RctInstance& x) const;

  // Parameter-path prefixes owned by branch k for the decoupling audit. In
  // shared-trunk mode the shared stack belongs to every branch.
  std::vector<std::string> branch_prefixes(int k) const;

  // Both passes through branch k: treatment row k and control row 0.
  struct BranchEval {
    double y_hat_k = 0.0;   // normalized scale
    double y_hat_0k = 0.0;
    ops::Vec z_k;
    ops::Vec z_0k;
  };
  BranchEval branch_outputs(const data::RctInstance& x, int k) const;

  // The treatment-conditioned weighting over feature slots and the embedding
  // it selects; exposed so the selection contract stays directly testable.
  struct Selection {
    ops::Vec weights;
    ops::Vec e_x;
  };
  Selection feature_selection(const data::RctInstance& x, int k, int t_row) const;

  ParameterSet& params() { return ps_; }
  const ParameterSet& params() const { return ps_; }
  const IspConfig& config() const { return cfg_; }
  const data::RctSchema& schema() const { return schema_; }
  bool shared_trunk() const { return shared_trunk_; }

  void save(const std::string& file) const;
  void load(const std::string& file);

 private:
  struct BranchCache {
    std::vector<ops::Vec> e_feats;  // f_x feature embeddings
    ops::Vec e_t;
    ops::Vec sel_w;  // softmax weights over feature slots
    ops::Vec f;      // concat(selected embedding, e_t)
    std::vector<Mlp::Cache> expert_caches;
    std::vector<ops::Vec> expert_out;
    ops::Vec gate;
    ops::Vec z;
    Mlp::Cache tower_cache;
    double y_hat = 0.0;  // normalized scale
  };

  BranchCache branch_forward(const std::vector<double>& numeric,
                             const std::vector<int>& categorical, int k,
                             int t_row) const;
  // dy is the loss gradient on y_hat, dz_extra an optional extra gradient on
  // the latent (the KL coupling); accumulates into parameter grads.
  void branch_backward(const BranchCache& cache,
                       const std::vector<double>& numeric,
                       const std::vector<int>& categorical, int k, int t_row,
                       double dy, const ops::Vec* dz_extra);

  double sample_loss(const data::RctInstance& x, double scale, bool with_grad);

  std::string trunk_prefix(int k) const;
  Mlp expert_mlp(int k, int m) const;
  Mlp tower_mlp(int k) const;

  IspConfig cfg_;
  data::RctSchema schema_;
  bool shared_trunk_ = false;
  ParameterSet ps_;
};

}  // namespace klan::isp
