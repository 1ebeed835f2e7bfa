#include "klan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klan::ops {

namespace {
constexpr double kProbFloor = 1e-12;
}

Vec affine_forward(const Tensor& W, const Tensor& b, const Vec& x) {
  if (W.ndim() != 2) throw std::invalid_argument("affine: W must be 2-d");
  std::size_t out = W.dim(0), in = W.dim(1);
  if (x.size() != in) throw std::invalid_argument("affine: input size mismatch");
  if (b.numel() != out) throw std::invalid_argument("affine: bias size mismatch");
  Vec y(out);
  const double* w = W.data();
  for (std::size_t i = 0; i < out; ++i) {
    double acc = b.data()[i];
    const double* row = w + i * in;
    for (std::size_t j = 0; j < in; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec affine_backward(const Tensor& W, const Vec& x, const Vec& dy, Tensor* dW,
                    Tensor* db) {
  std::size_t out = W.dim(0), in = W.dim(1);
  if (dy.size() != out) throw std::invalid_argument("affine_backward: dy size");
  Vec dx(in, 0.0);
  const double* w = W.data();
  for (std::size_t i = 0; i < out; ++i) {
    double g = dy[i];
    if (db) db->data()[i] += g;
    const double* row = w + i * in;
    double* dwrow = dW ? dW->data() + i * in : nullptr;
    for (std::size_t j = 0; j < in; ++j) {
      if (dwrow) dwrow[j] += g * x[j];
      dx[j] += g * row[j];
    }
  }
  return dx;
}

Vec relu(const Vec& x) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Vec relu_backward(const Vec& x, const Vec& dy) {
  Vec dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

Vec softmax(const Vec& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

Vec softmax_backward(const Vec& p, const Vec& dp) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += dp[i] * p[i];
  Vec dl(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) dl[i] = p[i] * (dp[i] - s);
  return dl;
}

double logsumexp(const Vec& x) {
  double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

Vec logsumexp_backward(const Vec& x) { return softmax(x); }

Vec embedding_lookup(const Tensor& table, std::size_t row) {
  if (table.ndim() != 2) throw std::invalid_argument("embedding: table must be 2-d");
  if (row >= table.dim(0)) throw std::out_of_range("embedding: row out of range");
  std::size_t d = table.dim(1);
  const double* src = table.data() + row * d;
  return Vec(src, src + d);
}

void embedding_backward(Tensor& dtable, std::size_t row, const Vec& de) {
  std::size_t d = dtable.dim(1);
  if (de.size() != d) throw std::invalid_argument("embedding_backward: size");
  double* dst = dtable.data() + row * d;
  for (std::size_t i = 0; i < d; ++i) dst[i] += de[i];
}

double mse(double target, double pred) {
  double e = target - pred;
  return e * e;
}

double mse_grad_pred(double target, double pred) { return -2.0 * (target - pred); }

double bce(double p, double label) {
  p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

double bce_grad_p(double p, double label) {
  p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  return -(label / p) + (1.0 - label) / (1.0 - p);
}

double kl_divergence(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    double qi = std::max(q[i], kProbFloor);
    s += p[i] * std::log(p[i] / qi);
  }
  return s;
}

void kl_divergence_backward(const Vec& p, const Vec& q, double dl, Vec* dp,
                            Vec* dq) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    double qi = std::max(q[i], kProbFloor);
    if (dp) (*dp)[i] += p[i] > 0.0 ? dl * (std::log(p[i] / qi) + 1.0) : 0.0;
    if (dq) (*dq)[i] += (q[i] >= kProbFloor && p[i] > 0.0) ? dl * (-p[i] / qi) : 0.0;
  }
}

double sigmoid(double x) {
  if (x >= 0.0) {
    double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  double z = std::exp(x);
  return z / (1.0 + z);
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace klan::ops
