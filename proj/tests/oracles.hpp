#pragma once

// Independent reference implementations used to check the library: numeric
// quadrature and Monte Carlo for divergences, quadratic-time metric
// definitions, hand-rolled optimizer recurrences, and the analytic
// binary-source rate-distortion curve. Deliberately slow and simple.

#include <cstddef>
#include <vector>

#include "dab/gaussian.hpp"
#include "dab/rng.hpp"

namespace oracle {

// KL(N(mp, sp^2) || N(mq, sq^2)) by adaptive Simpson integration of
// p(x) ln(p(x)/q(x)) over +-12 standard deviations of p.
double kl_quadrature_1d(double mp, double sp, double mq, double sq);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// KL(p || q) as a Monte Carlo average of log p(z) - log q(z), z ~ p.
McEstimate kl_monte_carlo(const dab::DiagGaussian& p, const dab::DiagGaussian& q,
                          std::size_t n_samples, dab::Rng& rng);

// O(n^2) pairwise AUROC: wins + half-ties over positive/negative pairs.
double auroc_pairs(const std::vector<double>& scores, const std::vector<int>& labels);

// Average precision by walking distinct score thresholds in descending
// order; every positive recalled at a threshold gets that threshold's
// precision.
double auprc_thresholds(const std::vector<double>& scores,
                        const std::vector<int>& labels);

// Adam recurrence on a single weight, returning the weight after each step.
std::vector<double> adam_scalar(double w0, const std::vector<double>& grads,
                                double lr, double beta1 = 0.9, double beta2 = 0.999,
                                double eps = 1e-8);

// Rate of the binary uniform source under Hamming distortion at expected
// distortion d, in nats: ln 2 - H_b(d).
double binary_hamming_rate(double d);

}  // namespace oracle
