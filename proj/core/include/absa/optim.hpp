#pragma once

#include <functional>

#include "absa/graph.hpp"
#include "absa/param_store.hpp"

namespace absa {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Added to the gradient as l2_lambda * theta before the moment update.
  double l2_lambda = 0.0;

  void validate() const;
};

// Builds a loss on the given graph. The graph is bound to the store being
// differentiated.
using LossFn = std::function<Var(Graph&)>;

// Zeroes the store's gradients, evaluates `fn`, backpropagates, and returns
// the scalar loss. Parameters the loss never touched keep a zero gradient.
double forward_backward(const LossFn& fn, ParamStore& store);

// Evaluates `fn` without recording gradients.
double evaluate_loss(const LossFn& fn, ParamStore& store);

// One bias-corrected Adam update over every entry; clears gradients after.
void adam_step(ParamStore& store, const AdamConfig& cfg);

}  // namespace absa
