#include "dab/optimizer.hpp"

#include <cmath>

#include "dab/errors.hpp"

namespace dab {

Optimizer::Optimizer(OptKind kind, double lr, std::vector<std::string> param_names)
    : names_(std::move(param_names)) {
  state_.kind = kind;
  state_.lr = lr;
  if (lr <= 0.0) throw Error("optimizer learning rate must be positive");
  if (names_.empty()) throw Error("optimizer needs at least one parameter name");
}

void Optimizer::step(Graph& g, const std::map<std::string, Tensor>& grads) {
  if (state_.kind == OptKind::Adam) state_.t += 1;

  for (const auto& name : names_) {
    auto git = grads.find(name);
    if (git == grads.end()) throw Error("no gradient for parameter '" + name + "'");
    const Tensor& grad = git->second;
    Tensor& w = g.param(name);
    if (!w.same_shape(grad)) {
      throw ShapeError("gradient shape " + shape_str(grad.shape) + " vs parameter '" +
                       name + "' " + shape_str(w.shape));
    }
    if (!grad.all_finite()) {
      throw NumericError("non-finite gradient for parameter '" + name + "'");
    }

    if (state_.kind == OptKind::Sgd) {
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        w.data[i] -= state_.lr * grad.data[i];
      }
      continue;
    }

    auto mit = state_.m.find(name);
    if (mit == state_.m.end()) {
      mit = state_.m.emplace(name, Tensor::zeros(w.shape)).first;
      state_.v.emplace(name, Tensor::zeros(w.shape));
    }
    Tensor& m = mit->second;
    Tensor& v = state_.v.at(name);

    const double b1 = state_.beta1, b2 = state_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state_.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state_.t));
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      const double gi = grad.data[i];
      m.data[i] = b1 * m.data[i] + (1.0 - b1) * gi;
      v.data[i] = b2 * v.data[i] + (1.0 - b2) * gi * gi;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      w.data[i] -= state_.lr * mhat / (std::sqrt(vhat) + state_.eps);
    }
  }
}

}  // namespace dab
