#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dab/graph.hpp"
#include "dab/tensor.hpp"

namespace dab {

// First-order optimizers over a fixed set of named graph parameters. Each
// optimizer instance owns its moment state; two optimizers over disjoint
// parameter sets (as in the alternating training loop) never interact.
enum class OptKind { Sgd, Adam };

struct OptimizerState {
  OptKind kind = OptKind::Sgd;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;  // completed steps, incremented before bias correction
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

class Optimizer {
 public:
  Optimizer(OptKind kind, double lr, std::vector<std::string> param_names);

  static Optimizer sgd(double lr, std::vector<std::string> names) {
    return Optimizer(OptKind::Sgd, lr, std::move(names));
  }
  static Optimizer adam(double lr, std::vector<std::string> names) {
    return Optimizer(OptKind::Adam, lr, std::move(names));
  }

  // Applies one update in place to each owned parameter. Gradients for
  // names outside the owned set are ignored; a missing gradient for an
  // owned name is an error.
  void step(Graph& g, const std::map<std::string, Tensor>& grads);

  const OptimizerState& state() const { return state_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  OptimizerState state_;
  std::vector<std::string> names_;
};

}  // namespace dab
