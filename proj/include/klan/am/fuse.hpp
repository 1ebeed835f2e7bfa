#pragma once

#include "klan/ops.hpp"

namespace klan::am {

// Blend the inter-day preference delta with the intra-day interest p, one
// weight per page: sigma_k = gamma_k * delta_k + (1 - gamma_k) * p_k.
// delta and p must lie on the probability simplex, gamma componentwise in
// [0, 1]; each sigma_k then falls between delta_k and p_k.
ops::Vec fuse_scores(const ops::Vec& delta, const ops::Vec& p,
                     const ops::Vec& gamma);

// argmax over fused scores; ties resolve to the lowest page index
int select_page(const ops::Vec& sigma);

}  // namespace klan::am
