#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

double log_normal_pdf(double x, double m, double s) {
  const double z = (x - m) / s;
  return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * M_PI);
}

double kl_integrand(double x, double mp, double sp, double mq, double sq) {
  const double lp = log_normal_pdf(x, mp, sp);
  const double lq = log_normal_pdf(x, mq, sq);
  return std::exp(lp) * (lp - lq);
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(double a, double b, double fa, double fm, double fb, double whole,
                double tol, int depth, double mp, double sp, double mq, double sq) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = kl_integrand(lm, mp, sp, mq, sq);
  const double frm = kl_integrand(rm, mp, sp, mq, sq);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(a, m, fa, flm, fm, left, tol / 2.0, depth - 1, mp, sp, mq, sq) +
         adaptive(m, b, fm, frm, fb, right, tol / 2.0, depth - 1, mp, sp, mq, sq);
}

}  // namespace

double kl_quadrature_1d(double mp, double sp, double mq, double sq) {
  const double a = mp - 12.0 * sp;
  const double b = mp + 12.0 * sp;
  const double m = 0.5 * (a + b);
  const double fa = kl_integrand(a, mp, sp, mq, sq);
  const double fm = kl_integrand(m, mp, sp, mq, sq);
  const double fb = kl_integrand(b, mp, sp, mq, sq);
  const double whole = simpson(a, b, fa, fm, fb);
  return adaptive(a, b, fa, fm, fb, whole, 1e-12, 40, mp, sp, mq, sq);
}

McEstimate kl_monte_carlo(const dab::DiagGaussian& p, const dab::DiagGaussian& q,
                          std::size_t n_samples, dab::Rng& rng) {
  double sum = 0.0, sumsq = 0.0;
  std::vector<double> z(p.dim());
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t i = 0; i < p.dim(); ++i)
      z[i] = p.mean[i] + p.scale[i] * rng.normal();
    const double v = dab::log_prob(p, z) - dab::log_prob(q, z);
    sum += v;
    sumsq += v * v;
  }
  McEstimate e;
  const double n = static_cast<double>(n_samples);
  e.mean = sum / n;
  const double var = std::max(0.0, sumsq / n - e.mean * e.mean);
  e.std_error = std::sqrt(var / n);
  return e;
}

double auroc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t n_pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++n_pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  if (n_pairs == 0) throw std::runtime_error("oracle auroc: single-class input");
  return wins / static_cast<double>(n_pairs);
}

double auprc_thresholds(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
  std::size_t total_pos = 0;
  for (int l : labels) total_pos += static_cast<std::size_t>(l);
  if (total_pos == 0) throw std::runtime_error("oracle auprc: no positives");

  double ap = 0.0;
  std::size_t prev_tp = 0;
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] ? tp : fp) += 1;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += static_cast<double>(tp - prev_tp) * precision;
    prev_tp = tp;
  }
  return ap / static_cast<double>(total_pos);
}

std::vector<double> adam_scalar(double w0, const std::vector<double>& grads,
                                double lr, double beta1, double beta2, double eps) {
  std::vector<double> out;
  double w = w0, m = 0.0, v = 0.0;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const double g = grads[t - 1];
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(beta1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(beta2, static_cast<double>(t)));
    w -= lr * mhat / (std::sqrt(vhat) + eps);
    out.push_back(w);
  }
  return out;
}

double binary_hamming_rate(double d) {
  if (d <= 0.0 || d >= 0.5) return d <= 0.0 ? std::log(2.0) : 0.0;
  const double hb = -d * std::log(d) - (1.0 - d) * std::log(1.0 - d);
  return std::log(2.0) - hb;
}

}  // namespace oracle
