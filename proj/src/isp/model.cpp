#include "klan/isp/model.hpp"

#include <algorithm>
#include <cmath>

#include "klan/checkpoint.hpp"
#include "klan/error.hpp"
#include "klan/ops.hpp"

namespace klan::isp {

namespace {
constexpr double kControlFloor = 1e-6;
}

IspModel::IspModel(IspConfig cfg, data::RctSchema schema, bool shared_trunk)
    : cfg_(cfg), schema_(std::move(schema)), shared_trunk_(shared_trunk) {
  if (cfg_.treatments < 2) throw DataError("IspModel: need at least 2 treatments");
  if (cfg_.experts < 1) throw DataError("IspModel: need at least 1 expert");
  if (cfg_.embed_dim < 1) throw DataError("IspModel: embed_dim must be >= 1");

  const int d = cfg_.embed_dim;
  for (const auto& field : schema_.fields) {
    std::string path = "emb/x/" + field.name + "/table";
    std::size_t rows = field.kind == data::FieldKind::kCategorical
                           ? static_cast<std::size_t>(field.cardinality)
                           : 2;  // numeric: scale row + bias row
    ps_.add(path, xavier_init(rows, d, cfg_.seed, path));
  }
  ps_.add("emb/t/table",
          xavier_init(cfg_.treatments + 1, d, cfg_.seed, "emb/t/table"));

  auto add_trunk = [&](const std::string& prefix) {
    std::string sel = prefix + "/select/w";
    ps_.add(sel, xavier_init(schema_.fields.size(), d, cfg_.seed, sel));
    ps_.add(prefix + "/select/b", Tensor::zeros({schema_.fields.size()}));
    std::string gw = prefix + "/gate/w";
    ps_.add(gw, xavier_init(cfg_.experts, 2 * d, cfg_.seed, gw));
    ps_.add(prefix + "/gate/b",
            Tensor::zeros({static_cast<std::size_t>(cfg_.experts)}));
    for (int m = 0; m < cfg_.experts; ++m) {
      Mlp e{prefix + "/expert" + std::to_string(m),
            static_cast<std::size_t>(2 * d),
            static_cast<std::size_t>(cfg_.expert_hidden),
            static_cast<std::size_t>(d)};
      e.init(ps_, cfg_.seed);
    }
  };

  if (shared_trunk_) add_trunk("shared");
  for (int k = 1; k <= cfg_.treatments; ++k) {
    std::string branch = "branch" + std::to_string(k);
    if (!shared_trunk_) add_trunk(branch);
    Mlp tower{branch + "/tower", static_cast<std::size_t>(d),
              static_cast<std::size_t>(cfg_.tower_hidden), 1};
    tower.init(ps_, cfg_.seed);
  }
}

std::string IspModel::trunk_prefix(int k) const {
  return shared_trunk_ ? "shared" : "branch" + std::to_string(k);
}

Mlp IspModel::expert_mlp(int k, int m) const {
  return Mlp{trunk_prefix(k) + "/expert" + std::to_string(m),
             static_cast<std::size_t>(2 * cfg_.embed_dim),
             static_cast<std::size_t>(cfg_.expert_hidden),
             static_cast<std::size_t>(cfg_.embed_dim)};
}

Mlp IspModel::tower_mlp(int k) const {
  return Mlp{"branch" + std::to_string(k) + "/tower",
             static_cast<std::size_t>(cfg_.embed_dim),
             static_cast<std::size_t>(cfg_.tower_hidden), 1};
}

std::vector<std::string> IspModel::branch_prefixes(int k) const {
  std::string branch = "branch" + std::to_string(k) + "/";
  if (shared_trunk_) return {"shared/", branch};
  return {branch};
}

IspModel::BranchCache IspModel::branch_forward(
    const std::vector<double>& numeric, const std::vector<int>& categorical,
    int k, int t_row) const {
  BranchCache c;
  const std::string trunk = trunk_prefix(k);

  // per-field embeddings, schema order
  std::size_t ni = 0, ci = 0;
  for (const auto& field : schema_.fields) {
    const Tensor& table = ps_.value("emb/x/" + field.name + "/table");
    if (field.kind == data::FieldKind::kCategorical) {
      int v = categorical.at(ci++);
      if (v < 0 || v >= field.cardinality)
        throw DataError("IspModel: categorical value out of range for " +
                        field.name);
      c.e_feats.push_back(ops::embedding_lookup(table, v));
    } else {
      double v = numeric.at(ni++);
      ops::Vec e(cfg_.embed_dim);
      for (int i = 0; i < cfg_.embed_dim; ++i)
        e[i] = v * table.at(0, i) + table.at(1, i);
      c.e_feats.push_back(std::move(e));
    }
  }

  c.e_t = ops::embedding_lookup(ps_.value("emb/t/table"), t_row);

  // treatment-conditioned softmax weighting over the feature slots
  ops::Vec sel_logits = ops::affine_forward(ps_.value(trunk + "/select/w"),
                                            ps_.value(trunk + "/select/b"),
                                            c.e_t);
  c.sel_w = ops::softmax(sel_logits);
  ops::Vec e_x(cfg_.embed_dim, 0.0);
  for (std::size_t j = 0; j < c.e_feats.size(); ++j)
    for (int i = 0; i < cfg_.embed_dim; ++i) e_x[i] += c.sel_w[j] * c.e_feats[j][i];

  c.f = ops::concat(e_x, c.e_t);

  c.expert_caches.resize(cfg_.experts);
  for (int m = 0; m < cfg_.experts; ++m)
    c.expert_out.push_back(
        expert_mlp(k, m).forward(ps_, c.f, &c.expert_caches[m]));

  ops::Vec gate_logits = ops::affine_forward(ps_.value(trunk + "/gate/w"),
                                             ps_.value(trunk + "/gate/b"), c.f);
  c.gate = ops::softmax(gate_logits);

  c.z.assign(cfg_.embed_dim, 0.0);
  for (int m = 0; m < cfg_.experts; ++m)
    for (int i = 0; i < cfg_.embed_dim; ++i)
      c.z[i] += c.gate[m] * c.expert_out[m][i];

  c.y_hat = tower_mlp(k).forward(ps_, c.z, &c.tower_cache)[0];
  return c;
}

void IspModel::branch_backward(const BranchCache& c,
                               const std::vector<double>& numeric,
                               const std::vector<int>& categorical, int k,
                               int t_row, double dy, const ops::Vec* dz_extra) {
  const std::string trunk = trunk_prefix(k);
  const int d = cfg_.embed_dim;

  ops::Vec dz = tower_mlp(k).backward(ps_, c.tower_cache, {dy});
  if (dz_extra)
    for (int i = 0; i < d; ++i) dz[i] += (*dz_extra)[i];

  // gate mixture: z = sum_m g_m expert_m
  ops::Vec dgate(cfg_.experts, 0.0);
  for (int m = 0; m < cfg_.experts; ++m) dgate[m] = ops::dot(dz, c.expert_out[m]);
  ops::Vec dgate_logits = ops::softmax_backward(c.gate, dgate);
  ops::Vec df = ops::affine_backward(ps_.value(trunk + "/gate/w"), c.f,
                                     dgate_logits, &ps_.grad(trunk + "/gate/w"),
                                     &ps_.grad(trunk + "/gate/b"));
  for (int m = 0; m < cfg_.experts; ++m) {
    ops::Vec dout(d);
    for (int i = 0; i < d; ++i) dout[i] = c.gate[m] * dz[i];
    ops::Vec dfm = expert_mlp(k, m).backward(ps_, c.expert_caches[m], dout);
    for (std::size_t i = 0; i < df.size(); ++i) df[i] += dfm[i];
  }

  // split f = concat(e_x, e_t)
  ops::Vec de_x(df.begin(), df.begin() + d);
  ops::Vec de_t(df.begin() + d, df.end());

  // weighted sum over feature embeddings
  ops::Vec dsel_w(c.e_feats.size(), 0.0);
  for (std::size_t j = 0; j < c.e_feats.size(); ++j)
    dsel_w[j] = ops::dot(c.e_feats[j], de_x);
  ops::Vec dsel_logits = ops::softmax_backward(c.sel_w, dsel_w);
  ops::Vec de_t_sel = ops::affine_backward(
      ps_.value(trunk + "/select/w"), c.e_t, dsel_logits,
      &ps_.grad(trunk + "/select/w"), &ps_.grad(trunk + "/select/b"));
  for (int i = 0; i < d; ++i) de_t[i] += de_t_sel[i];

  ops::embedding_backward(ps_.grad("emb/t/table"), t_row, de_t);

  std::size_t ni = 0, ci = 0;
  for (std::size_t j = 0; j < schema_.fields.size(); ++j) {
    const auto& field = schema_.fields[j];
    Tensor& g = ps_.grad("emb/x/" + field.name + "/table");
    if (field.kind == data::FieldKind::kCategorical) {
      int v = categorical.at(ci++);
      for (int i = 0; i < d; ++i) g.at(v, i) += c.sel_w[j] * de_x[i];
    } else {
      double v = numeric.at(ni++);
      for (int i = 0; i < d; ++i) {
        double de = c.sel_w[j] * de_x[i];
        g.at(0, i) += v * de;
        g.at(1, i) += de;
      }
    }
  }
}

double IspModel::sample_loss(const data::RctInstance& x, double scale,
                             bool with_grad) {
  const int K = cfg_.treatments;
  if (x.treatment < 0 || x.treatment > K)
    throw DataError("IspModel: treatment id " + std::to_string(x.treatment) +
                    " out of range");
  auto numeric = schema_.normalized_numeric(x);
  double y = schema_.normalize_response(x.response);

  if (x.treatment != 0) {
    int k = x.treatment;
    BranchCache c = branch_forward(numeric, x.categorical, k, k);
    double loss = ops::mse(y, c.y_hat);
    if (with_grad)
      branch_backward(c, numeric, x.categorical, k, k,
                      scale * ops::mse_grad_pred(y, c.y_hat), nullptr);
    return loss;
  }

  // control sample: every branch's control pass plus latent alignment
  std::vector<BranchCache> caches;
  caches.reserve(K);
  for (int k = 1; k <= K; ++k)
    caches.push_back(branch_forward(numeric, x.categorical, k, 0));

  ops::Vec z_bar(cfg_.embed_dim, 0.0);
  for (const auto& c : caches)
    for (int i = 0; i < cfg_.embed_dim; ++i) z_bar[i] += c.z[i] / K;
  ops::Vec q = ops::softmax(z_bar);

  double loss = 0.0;
  std::vector<ops::Vec> ps_soft;
  for (const auto& c : caches) {
    ops::Vec p = ops::softmax(c.z);
    loss += ops::mse(y, c.y_hat) + cfg_.kl_weight * ops::kl_divergence(p, q);
    ps_soft.push_back(std::move(p));
  }

  if (with_grad) {
    ops::Vec dq_total(cfg_.embed_dim, 0.0);
    std::vector<ops::Vec> dz_kl(K);
    for (int k = 0; k < K; ++k) {
      ops::Vec dp(cfg_.embed_dim, 0.0);
      ops::kl_divergence_backward(ps_soft[k], q, scale * cfg_.kl_weight, &dp,
                                  &dq_total);
      dz_kl[k] = ops::softmax_backward(ps_soft[k], dp);
    }
    ops::Vec dz_bar = ops::softmax_backward(q, dq_total);
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < cfg_.embed_dim; ++i) dz_kl[k][i] += dz_bar[i] / K;
      branch_backward(caches[k], numeric, x.categorical, k + 1, 0,
                      scale * ops::mse_grad_pred(y, caches[k].y_hat),
                      &dz_kl[k]);
    }
  }
  return loss;
}

double IspModel::batch_loss(const std::vector<const data::RctInstance*>& batch) {
  if (batch.empty()) throw DataError("IspModel: empty batch");
  double total = 0.0;
  for (const auto* x : batch) total += sample_loss(*x, 0.0, false);
  return total / batch.size();
}

double IspModel::batch_loss_and_grad(
    const std::vector<const data::RctInstance*>& batch) {
  if (batch.empty()) throw DataError("IspModel: empty batch");
  double scale = 1.0 / batch.size();
  double total = 0.0;
  for (const auto* x : batch) total += sample_loss(*x, scale, true);
  return total / batch.size();
}

IspModel::Responses IspModel::predict_responses(const data::RctInstance& x) const {
  auto numeric = schema_.normalized_numeric(x);
  Responses r;
  for (int k = 1; k <= cfg_.treatments; ++k) {
    r.treated.push_back(schema_.denormalize_response(
        branch_forward(numeric, x.categorical, k, k).y_hat));
    r.control.push_back(schema_.denormalize_response(
        branch_forward(numeric, x.categorical, k, 0).y_hat));
  }
  double mean = 0.0;
  for (double c : r.control) mean += c / cfg_.treatments;
  r.control_mean = std::max(mean, kControlFloor);
  return r;
}

std::vector<double> IspModel::predict_static_preferences(
    const data::RctInstance& x) const {
  Responses r = predict_responses(x);
  ops::Vec ratios(cfg_.treatments);
  for (int k = 0; k < cfg_.treatments; ++k)
    ratios[k] = r.treated[k] / r.control_mean;
  return ops::softmax(ratios);
}

IspModel::BranchEval IspModel::branch_outputs(const data::RctInstance& x,
                                              int k) const {
  if (k < 1 || k > cfg_.treatments)
    throw DataError("branch_outputs: branch " + std::to_string(k) +
                    " out of range");
  auto numeric = schema_.normalized_numeric(x);
  BranchCache treated = branch_forward(numeric, x.categorical, k, k);
  BranchCache control = branch_forward(numeric, x.categorical, k, 0);
  BranchEval eval;
  eval.y_hat_k = treated.y_hat;
  eval.y_hat_0k = control.y_hat;
  eval.z_k = std::move(treated.z);
  eval.z_0k = std::move(control.z);
  return eval;
}

IspModel::Selection IspModel::feature_selection(const data::RctInstance& x,
                                                int k, int t_row) const {
  auto numeric = schema_.normalized_numeric(x);
  BranchCache c = branch_forward(numeric, x.categorical, k, t_row);
  Selection sel;
  sel.weights = c.sel_w;
  sel.e_x.assign(c.f.begin(), c.f.begin() + cfg_.embed_dim);
  return sel;
}

void IspModel::save(const std::string& file) const { save_checkpoint(ps_, file); }

void IspModel::load(const std::string& file) {
  ParameterSet loaded = load_checkpoint(file);
  if (loaded.paths() != ps_.paths())
    throw DataError("checkpoint does not match this model's parameters: " + file);
  for (const auto& path : ps_.paths()) {
    if (!loaded.value(path).same_shape(ps_.value(path)))
      throw DataError("checkpoint shape mismatch at " + path + ": " + file);
  }
  ps_ = std::move(loaded);
}

}  // namespace klan::isp
