#include "absa/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "absa/error.hpp"

namespace absa {

namespace {

// Ridders' extrapolation of central differences (Numerical Recipes dfridr).
template <typename Diff>
double ridders(const Diff& central, double h) {
  constexpr int kTableau = 10;
  constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink, kSafe = 2.0;
  double a[kTableau][kTableau];
  a[0][0] = central(h);
  double best = a[0][0];
  double err = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kTableau; ++i) {
    h /= kShrink;
    a[0][i] = central(h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
  }
  return best;
}

}  // namespace

GradCheckResult grad_check(const LossFn& fn, ParamStore& store,
                           const GradCheckOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw InvalidArgument("grad_check: epsilon must be > 0");
  forward_backward(fn, store);

  std::mt19937_64 rng(opts.seed);
  GradCheckResult result;
  for (auto& [name, e] : store.entries()) {
    std::vector<std::size_t> coords(e.value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (opts.max_coords_per_param && coords.size() > opts.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const double saved = e.value[i];
      auto central = [&](double h) {
        e.value[i] = saved + h;
        const double plus = evaluate_loss(fn, store);
        e.value[i] = saved - h;
        const double minus = evaluate_loss(fn, store);
        e.value[i] = saved;
        if (!std::isfinite(plus) || !std::isfinite(minus)) {
          throw NumericError("grad_check: non-finite loss when perturbing " + name +
                             "[" + std::to_string(i) + "]");
        }
        return (plus - minus) / (2.0 * h);
      };
      const double numeric = opts.method == Differencing::kRidders ? ridders(central, opts.epsilon)
                                                                   : central(opts.epsilon);
      const double analytic = e.grad[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      const double rel = std::abs(analytic - numeric) / denom;
      if (++result.coords_checked == 1 || rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_param = name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  store.clear_gradients();
  return result;
}

}  // namespace absa
