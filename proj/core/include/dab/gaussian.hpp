#pragma once

#include <vector>

#include "dab/graph.hpp"
#include "dab/rng.hpp"

namespace dab {

// Diagonal Gaussian stored as mean and scale (stddev per coordinate).
// Scales come out of raw network outputs through
//     scale = max(softplus(raw - 5.0), 1e-8)
// so they are always strictly positive; the -5 shift keeps freshly
// initialized encoders narrow instead of unit-width.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> scale;

  std::size_t dim() const { return mean.size(); }
};

inline constexpr double kScaleRawShift = 5.0;
inline constexpr double kScaleFloor = 1e-8;

double scale_from_raw(double raw);

// Builds a DiagGaussian out of raw head outputs (mean passes through).
DiagGaussian from_raw(const std::vector<double>& mean_raw,
                      const std::vector<double>& scale_raw);

// KL(p || q) in nats, closed form:
//   sum_j [ ln(q.scale/p.scale) + (p.scale^2 + (p.mean-q.mean)^2) / (2 q.scale^2) - 1/2 ]
double kl(const DiagGaussian& p, const DiagGaussian& q);

// Reparameterized draw mean + scale*eps with eps ~ N(0, I) from rng.
std::vector<double> sample(const DiagGaussian& p, Rng& rng);

// Log density at z, constants included.
double log_prob(const DiagGaussian& p, const std::vector<double>& z);

// Graph-side versions, for losses that need gradients. Shapes follow the
// model's conventions: per-batch matrices [B,L] against either another
// [B,L] or a rank-1 {L} (a codebook entry broadcast across the batch).
//
// scale_from_raw_node: raw -> max(softplus(raw - 5), 1e-8), elementwise.
NodeId scale_from_raw_node(Graph& g, NodeId raw);

// kl_node: per-row KL, output {B} (or scalar if inputs are rank-1).
NodeId kl_node(Graph& g, NodeId mean_p, NodeId scale_p, NodeId mean_q, NodeId scale_q);

}  // namespace dab
