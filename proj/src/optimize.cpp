#include "maxdissim/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace maxdissim {

NelderMeadResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                      const NelderMeadOptions& options) {
  const int n = static_cast<int>(start.size());
  int evals = 0;
  auto clamp = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.cwiseMax(lower).cwiseMin(upper); };
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  std::vector<Eigen::VectorXd> pts(n + 1);
  std::vector<double> vals(n + 1);
  pts[0] = clamp(start);
  vals[0] = eval(pts[0]);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = pts[0];
    v[i] += step[i];
    // Reflect the initial edge inward when it would leave the box.
    if (v[i] > upper[i]) v[i] = pts[0][i] - step[i];
    pts[i + 1] = clamp(v);
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<int> order(n + 1);
  bool converged = false;
  while (evals < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    double diameter = 0;
    for (int i = 1; i <= n; ++i) diameter = std::max(diameter, (pts[order[i]] - pts[best]).lpNorm<Eigen::Infinity>());
    if (diameter < options.tolerance) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[order[i]];
    centroid /= n;

    Eigen::VectorXd reflected = clamp(centroid + (centroid - pts[worst]));
    double fr = eval(reflected);
    if (fr > vals[best]) {
      Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - pts[worst]));
      double fe = eval(expanded);
      if (fe > fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr > vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    Eigen::VectorXd contracted = fr > vals[worst] ? clamp(centroid + 0.5 * (reflected - centroid))
                                                  : clamp(centroid + 0.5 * (pts[worst] - centroid));
    double fc = eval(contracted);
    if (fc > std::max(fr, vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      int k = order[i];
      pts[k] = clamp(pts[best] + 0.5 * (pts[k] - pts[best]));
      vals[k] = eval(pts[k]);
    }
  }
  int best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals, converged};
}

}  // namespace maxdissim
