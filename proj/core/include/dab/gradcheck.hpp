#pragma once

#include <string>

#include "dab/graph.hpp"

namespace dab {

// Central-difference validation of the analytic gradients of a scalar graph
// output. Perturbs every entry of every parameter by +-step, holding the
// bindings fixed, and returns the worst relative error
//     |analytic - fd| / max(1, |analytic|).
// The loss is evaluated twice up front; if the two values differ the loss
// is not a pure function of parameters and bindings (e.g. hidden sampling)
// and the check refuses to run.
double finite_difference_check(Graph& g, NodeId loss, const Bindings& inputs,
                               double step = 1e-6);

// Same, but restricted to one named parameter.
double finite_difference_check_param(Graph& g, NodeId loss, const Bindings& inputs,
                                     const std::string& param, double step = 1e-6);

}  // namespace dab
