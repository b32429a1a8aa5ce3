#include "dab/gaussian.hpp"

#include <cmath>

#include "dab/errors.hpp"

namespace dab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dims(const DiagGaussian& d, const char* who) {
  if (d.mean.size() != d.scale.size()) {
    throw ShapeError(std::string(who) + ": mean dim " + std::to_string(d.mean.size()) +
                     " vs scale dim " + std::to_string(d.scale.size()));
  }
  if (d.mean.empty()) throw ShapeError(std::string(who) + ": empty distribution");
  for (double s : d.scale) {
    if (!(s > 0.0)) {
      throw NumericError(std::string(who) + ": nonpositive scale " + std::to_string(s));
    }
  }
}

}  // namespace

double scale_from_raw(double raw) {
  const double x = raw - kScaleRawShift;
  const double sp = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return sp > kScaleFloor ? sp : kScaleFloor;
}

DiagGaussian from_raw(const std::vector<double>& mean_raw,
                      const std::vector<double>& scale_raw) {
  if (mean_raw.size() != scale_raw.size()) {
    throw ShapeError("from_raw: mean width " + std::to_string(mean_raw.size()) +
                     " vs scale width " + std::to_string(scale_raw.size()));
  }
  DiagGaussian d;
  d.mean = mean_raw;
  d.scale.resize(scale_raw.size());
  for (std::size_t i = 0; i < scale_raw.size(); ++i) {
    d.scale[i] = scale_from_raw(scale_raw[i]);
  }
  return d;
}

double kl(const DiagGaussian& p, const DiagGaussian& q) {
  check_dims(p, "kl: p");
  check_dims(q, "kl: q");
  if (p.dim() != q.dim()) {
    throw ShapeError("kl: dim mismatch " + std::to_string(p.dim()) + " vs " +
                     std::to_string(q.dim()));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const double sp = p.scale[j], sq = q.scale[j];
    const double dm = p.mean[j] - q.mean[j];
    total += std::log(sq / sp) + (sp * sp + dm * dm) / (2.0 * sq * sq) - 0.5;
  }
  return total;
}

std::vector<double> sample(const DiagGaussian& p, Rng& rng) {
  check_dims(p, "sample");
  std::vector<double> z(p.dim());
  for (std::size_t j = 0; j < p.dim(); ++j) {
    z[j] = p.mean[j] + p.scale[j] * rng.normal();
  }
  return z;
}

double log_prob(const DiagGaussian& p, const std::vector<double>& z) {
  check_dims(p, "log_prob");
  if (z.size() != p.dim()) {
    throw ShapeError("log_prob: point dim " + std::to_string(z.size()) + " vs " +
                     std::to_string(p.dim()));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    const double d = (z[j] - p.mean[j]) / p.scale[j];
    total += -0.5 * kLog2Pi - std::log(p.scale[j]) - 0.5 * d * d;
  }
  return total;
}

NodeId scale_from_raw_node(Graph& g, NodeId raw) {
  return g.clamp_min(g.softplus(g.sub(raw, g.constant(kScaleRawShift))), kScaleFloor);
}

NodeId kl_node(Graph& g, NodeId mean_p, NodeId scale_p, NodeId mean_q, NodeId scale_q) {
  // log(sq/sp) + (sp^2 + (mp-mq)^2) / (2 sq^2) - 1/2, summed over the
  // latent axis. p side is [B,L]; q side may be {L} (broadcast) or [B,L].
  NodeId log_ratio = g.sub(g.log(scale_q), g.log(scale_p));
  NodeId diff2 = g.square(g.sub(mean_p, mean_q));
  NodeId num = g.add(g.square(scale_p), diff2);
  NodeId den = g.mul(g.square(scale_q), g.constant(2.0));
  NodeId terms = g.sub(g.add(log_ratio, g.div(num, den)), g.constant(0.5));
  return g.reduce_sum(terms, 1);
}

}  // namespace dab
