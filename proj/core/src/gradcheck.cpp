#include "dab/gradcheck.hpp"

#include <cmath>

#include "dab/errors.hpp"

namespace dab {

namespace {

double eval_scalar(Graph& g, NodeId loss, const Bindings& inputs) {
  Exec ex(g);
  ex.forward(inputs, {loss});
  const Tensor& t = ex.value(loss);
  if (t.size() != 1) {
    throw Error("finite_difference_check: output is not scalar, shape " +
                shape_str(t.shape));
  }
  return t.data[0];
}

double check_params(Graph& g, NodeId loss, const Bindings& inputs, double step,
                    const std::string& only) {
  if (step <= 0.0) throw Error("finite_difference_check: step must be positive");

  const double v0 = eval_scalar(g, loss, inputs);
  const double v1 = eval_scalar(g, loss, inputs);
  if (v0 != v1) {
    throw Error("finite_difference_check: loss is not deterministic (got " +
                std::to_string(v0) + " then " + std::to_string(v1) + ")");
  }

  Exec ex(g);
  ex.forward(inputs, {loss});
  auto grads = ex.backward(loss);

  double worst = 0.0;
  for (const auto& name : g.param_names()) {
    if (!only.empty() && name != only) continue;
    Tensor& w = g.param(name);
    const Tensor& grad = grads.at(name);
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      const double keep = w.data[i];
      w.data[i] = keep + step;
      const double up = eval_scalar(g, loss, inputs);
      w.data[i] = keep - step;
      const double dn = eval_scalar(g, loss, inputs);
      w.data[i] = keep;
      const double fd = (up - dn) / (2.0 * step);
      const double a = grad.data[i];
      const double rel = std::fabs(a - fd) / std::max(1.0, std::fabs(a));
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

}  // namespace

double finite_difference_check(Graph& g, NodeId loss, const Bindings& inputs,
                               double step) {
  return check_params(g, loss, inputs, step, "");
}

double finite_difference_check_param(Graph& g, NodeId loss, const Bindings& inputs,
                                     const std::string& param, double step) {
  g.param(param);  // throws if unknown
  return check_params(g, loss, inputs, step, param);
}

}  // namespace dab
