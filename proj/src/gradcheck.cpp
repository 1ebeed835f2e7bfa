#include "klan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace klan {

GradCheckReport finite_diff_grad_check(
    ParameterSet& ps, const std::function<double()>& loss,
    const std::function<void()>& backward, double eps,
    const std::vector<std::string>& only_prefixes) {
  ps.zero_grads();
  backward();

  auto selected = [&](const std::string& path) {
    if (only_prefixes.empty()) return true;
    for (const auto& p : only_prefixes)
      if (path.rfind(p, 0) == 0) return true;
    return false;
  };

  GradCheckReport report;
  for (const std::string& path : ps.paths()) {
    if (!selected(path)) continue;
    Tensor& t = ps.value(path);
    const Tensor& g = ps.grad(path);
    for (std::size_t i = 0; i < t.numel(); ++i) {
      double orig = t.data()[i];
      t.data()[i] = orig + eps;
      double lp = loss();
      t.data()[i] = orig - eps;
      double lm = loss();
      t.data()[i] = orig;
      double numeric = (lp - lm) / (2.0 * eps);
      double analytic = g.data()[i];
      double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1.0});
      double rel = std::fabs(analytic - numeric) / denom;
      GradCheckEntry e{path, i, analytic, numeric, rel};
      if (rel >= report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = e;
      }
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

}  // namespace klan
