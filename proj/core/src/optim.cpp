#include "absa/optim.hpp"

#include <cmath>

#include "absa/error.hpp"

namespace absa {

void AdamConfig::validate() const {
  if (!(lr >= 0.0)) throw InvalidArgument("AdamConfig: lr must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw InvalidArgument("AdamConfig: beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw InvalidArgument("AdamConfig: beta2 must be in (0,1)");
  if (!(eps > 0.0)) throw InvalidArgument("AdamConfig: eps must be > 0");
  if (!(l2_lambda >= 0.0)) throw InvalidArgument("AdamConfig: l2_lambda must be >= 0");
}

namespace {

double run(const LossFn& fn, ParamStore& store, GradMode mode) {
  Graph g(&store, mode);
  const Var loss = fn(g);
  const Tensor& lv = g.value(loss);
  if (lv.size() != 1) {
    throw ShapeError("forward_backward: loss must be a scalar, got " +
                     shape_string(lv.shape()));
  }
  if (mode == GradMode::kOn) g.backward(loss);
  return lv[0];
}

}  // namespace

double forward_backward(const LossFn& fn, ParamStore& store) {
  store.zero_grad();
  const double loss = run(fn, store, GradMode::kOn);
  store.mark_gradients_populated();
  return loss;
}

double evaluate_loss(const LossFn& fn, ParamStore& store) {
  return run(fn, store, GradMode::kOff);
}

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  cfg.validate();
  if (!store.gradients_populated()) {
    throw InvalidArgument("adam_step: gradients were never populated for this step");
  }
  store.advance_step();
  const double t = static_cast<double>(store.step());
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, e] : store.entries()) {
    double* theta = e.value.data();
    const double* grad = e.grad.data();
    double* m = e.first_moment.data();
    double* v = e.second_moment.data();
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double g = grad[i] + cfg.l2_lambda * theta[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
  store.clear_gradients();
}

}  // namespace absa
