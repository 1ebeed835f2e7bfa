#pragma once

#include <vector>

#include "klan/tensor.hpp"

namespace klan::ops {

using Vec = std::vector<double>;

// y = W x + b, W is [out x in]
Vec affine_forward(const Tensor& W, const Tensor& b, const Vec& x);
// Accumulates dW, db; returns dx. Pass dW/db = nullptr to skip.
Vec affine_backward(const Tensor& W, const Vec& x, const Vec& dy, Tensor* dW,
                    Tensor* db);

Vec relu(const Vec& x);
Vec relu_backward(const Vec& x, const Vec& dy);

// numerically stable (max subtraction); output sums to 1
Vec softmax(const Vec& logits);
// given softmax output p and upstream dp, returns dlogits
Vec softmax_backward(const Vec& p, const Vec& dp);

double logsumexp(const Vec& x);
// d logsumexp / dx = softmax(x)
Vec logsumexp_backward(const Vec& x);

// row lookup from a [rows x dim] table
Vec embedding_lookup(const Tensor& table, std::size_t row);
// accumulate de into the looked-up row of dtable
void embedding_backward(Tensor& dtable, std::size_t row, const Vec& de);

double mse(double target, double pred);
double mse_grad_pred(double target, double pred);  // d mse / d pred

// binary cross-entropy with p clamped to [1e-12, 1 - 1e-12]
double bce(double p, double label);
double bce_grad_p(double p, double label);

// KL(p || q) with q clamped to >= 1e-12; p entries of 0 contribute 0
double kl_divergence(const Vec& p, const Vec& q);
// gradients w.r.t. p and q
void kl_divergence_backward(const Vec& p, const Vec& q, double dl, Vec* dp,
                            Vec* dq);

double sigmoid(double x);

double dot(const Vec& a, const Vec& b);
Vec concat(const Vec& a, const Vec& b);

}  // namespace klan::ops
