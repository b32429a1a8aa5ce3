#include "dab/rate_distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dab {

namespace {

constexpr double kNInf = -std::numeric_limits<double>::infinity();

void conditional_update(const DistortionMatrix& dist, const std::vector<double>& marginal,
                        double alpha, std::vector<std::vector<double>>& cond) {
  const std::size_t n = dist.rows(), m = dist.cols();
  std::vector<double> logq(m);
  for (std::size_t j = 0; j < m; ++j) {
    logq[j] = marginal[j] > 0.0 ? std::log(marginal[j]) : kNInf;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double mx = kNInf;
    std::vector<double>& row = cond[i];
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = logq[j] == kNInf ? kNInf : logq[j] - alpha * dist.d[i][j];
      mx = std::max(mx, row[j]);
    }
    if (mx == kNInf) throw NumericError("conditional update: marginal lost all mass");
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (row[j] != kNInf) z += std::exp(row[j] - mx);
    }
    const double log_z = mx + std::log(z);
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = row[j] == kNInf ? 0.0 : std::exp(row[j] - log_z);
    }
  }
}

void marginal_update(const std::vector<double>& probs,
                     const std::vector<std::vector<double>>& cond,
                     std::vector<double>& marginal) {
  const std::size_t m = marginal.size();
  std::fill(marginal.begin(), marginal.end(), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) marginal[j] += probs[i] * cond[i][j];
  }
}

RdSolution make_solution(const DiscreteSource& source, const DistortionMatrix& dist,
                         const std::vector<std::vector<double>>& cond,
                         const std::vector<double>& marginal, double alpha,
                         std::size_t iterations) {
  RdSolution s;
  s.conditional = cond;
  s.marginal = marginal;
  s.rate = rd_mutual_information(source.probs, cond);
  s.distortion = rd_expected_distortion(source.probs, cond, dist);
  s.lagrangian = s.rate + alpha * s.distortion;
  s.iterations = iterations;
  return s;
}

}  // namespace

void validate_source(const DiscreteSource& s) {
  if (s.probs.empty()) throw Error("source has no symbols");
  double total = 0.0;
  for (double p : s.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw NumericError("source probabilities must be finite and >= 0");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw NumericError("source probabilities sum to " + std::to_string(total));
  }
}

void validate_distortion(const DistortionMatrix& dm) {
  if (dm.d.empty() || dm.d[0].empty()) throw Error("distortion matrix is empty");
  const std::size_t m = dm.d[0].size();
  for (const auto& row : dm.d) {
    if (row.size() != m) throw ShapeError("distortion matrix is ragged");
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) {
        throw NumericError("distortion entries must be finite and >= 0");
      }
    }
  }
}

double rd_mutual_information(const std::vector<double>& probs,
                             const std::vector<std::vector<double>>& conditional) {
  const std::size_t n = probs.size();
  if (conditional.size() != n) throw ShapeError("conditional rows != source symbols");
  const std::size_t m = conditional.empty() ? 0 : conditional[0].size();
  std::vector<double> q(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (conditional[i].size() != m) throw ShapeError("conditional matrix is ragged");
    for (std::size_t j = 0; j < m; ++j) q[j] += probs[i] * conditional[i][j];
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (probs[i] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const double c = conditional[i][j];
      if (c == 0.0) continue;
      mi += probs[i] * c * std::log(c / q[j]);
    }
  }
  return mi > 0.0 ? mi : 0.0;
}

double rd_expected_distortion(const std::vector<double>& probs,
                              const std::vector<std::vector<double>>& conditional,
                              const DistortionMatrix& dist) {
  double e = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (std::size_t j = 0; j < conditional[i].size(); ++j) {
      e += probs[i] * conditional[i][j] * dist.d[i][j];
    }
  }
  return e;
}

RdSolution blahut_arimoto(const DiscreteSource& source, const DistortionMatrix& dist,
                          double alpha, double tol, std::size_t max_iters) {
  validate_source(source);
  validate_distortion(dist);
  if (dist.rows() != source.n()) {
    throw ShapeError("distortion rows " + std::to_string(dist.rows()) +
                     " vs source symbols " + std::to_string(source.n()));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw NumericError("alpha must be >= 0");
  if (!(tol > 0.0)) throw Error("tol must be positive");
  if (max_iters == 0) throw Error("max_iters must be positive");

  const std::size_t n = source.n(), m = dist.cols();
  std::vector<double> marginal(m, 1.0 / static_cast<double>(m));
  std::vector<std::vector<double>> cond(n, std::vector<double>(m, 0.0));

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    conditional_update(dist, marginal, alpha, cond);
    marginal_update(source.probs, cond, marginal);
    const double rate = rd_mutual_information(source.probs, cond);
    const double ed = rd_expected_distortion(source.probs, cond, dist);
    const double lag = rate + alpha * ed;
    if (std::fabs(prev - lag) < tol) {
      return make_solution(source, dist, cond, marginal, alpha, it);
    }
    prev = lag;
  }
  throw ConvergenceError(
      "blahut_arimoto: no convergence to tol " + std::to_string(tol) + " within " +
          std::to_string(max_iters) + " iterations",
      make_solution(source, dist, cond, marginal, alpha, max_iters));
}

// ---------------------------------------------------------------------------

double bregman_divergence(BregmanGen gen, const std::vector<double>& x,
                          const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw ShapeError("bregman_divergence: dims " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
  switch (gen) {
    case BregmanGen::SquaredEuclidean: {
      // f(v) = |v|^2, grad f(y) = 2y.
      double fx = 0.0, fy = 0.0, inner = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        fx += x[i] * x[i];
        fy += y[i] * y[i];
        inner += (x[i] - y[i]) * 2.0 * y[i];
      }
      return fx - fy - inner;
    }
    case BregmanGen::NegativeEntropy: {
      // f(v) = sum v ln v, grad f(y) = ln y + 1. x entries may be 0
      // (0 ln 0 = 0); y must be strictly positive.
      double fx = 0.0, fy = 0.0, inner = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0)) throw NumericError("negative-entropy: x entry < 0");
        if (!(y[i] > 0.0)) throw NumericError("negative-entropy: y entry <= 0");
        if (x[i] > 0.0) fx += x[i] * std::log(x[i]);
        fy += y[i] * std::log(y[i]);
        inner += (x[i] - y[i]) * (std::log(y[i]) + 1.0);
      }
      return fx - fy - inner;
    }
  }
  throw Error("unknown Bregman generator");
}

RdfcResult rdfc_alternating(const std::vector<std::vector<double>>& source_points,
                            const DiscreteSource& source, BregmanGen gen,
                            std::vector<std::vector<double>> reproductions,
                            double alpha, double tol, std::size_t max_iters) {
  validate_source(source);
  if (source_points.size() != source.n()) {
    throw ShapeError("rdfc: " + std::to_string(source_points.size()) + " points vs " +
                     std::to_string(source.n()) + " probabilities");
  }
  if (reproductions.empty()) throw Error("rdfc: need at least one reproduction point");
  const std::size_t n = source_points.size(), m = reproductions.size();
  const std::size_t width = source_points[0].size();
  for (const auto& x : source_points) {
    if (x.size() != width) throw ShapeError("rdfc: ragged source points");
    if (gen == BregmanGen::NegativeEntropy) {
      for (double v : x) {
        if (!(v > 0.0)) {
          throw NumericError("rdfc: negative-entropy needs strictly positive points");
        }
      }
    }
  }
  for (const auto& y : reproductions) {
    if (y.size() != width) throw ShapeError("rdfc: reproduction width mismatch");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw NumericError("alpha must be >= 0");
  if (!(tol > 0.0)) throw Error("tol must be positive");

  DistortionMatrix dm;
  dm.d.assign(n, std::vector<double>(m, 0.0));
  auto refresh_distortion = [&]() {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        dm.d[i][j] = bregman_divergence(gen, source_points[i], reproductions[j]);
  };

  std::vector<double> marginal(m, 1.0 / static_cast<double>(m));
  std::vector<std::vector<double>> cond(n, std::vector<double>(m, 0.0));

  refresh_distortion();
  conditional_update(dm, marginal, alpha, cond);
  marginal_update(source.probs, cond, marginal);

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    // Support step: each reproduction moves to the weighted mean of its
    // soft cell. For any Bregman divergence the right-argument minimizer
    // of the weighted sum is the arithmetic mean of the assigned points.
    for (std::size_t j = 0; j < m; ++j) {
      double wsum = 0.0;
      std::vector<double> acc(width, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = source.probs[i] * cond[i][j];
        if (w == 0.0) continue;
        wsum += w;
        for (std::size_t t = 0; t < width; ++t) acc[t] += w * source_points[i][t];
      }
      if (wsum > 0.0) {
        for (std::size_t t = 0; t < width; ++t) reproductions[j][t] = acc[t] / wsum;
      }
      // zero-mass cells keep their previous location
    }
    refresh_distortion();

    conditional_update(dm, marginal, alpha, cond);
    marginal_update(source.probs, cond, marginal);

    const double rate = rd_mutual_information(source.probs, cond);
    const double ed = rd_expected_distortion(source.probs, cond, dm);
    const double lag = rate + alpha * ed;
    if (std::fabs(prev - lag) < tol) {
      RdfcResult res;
      res.reproductions = std::move(reproductions);
      res.solution = make_solution(source, dm, cond, marginal, alpha, it);
      return res;
    }
    prev = lag;
  }
  throw ConvergenceError(
      "rdfc_alternating: no convergence to tol " + std::to_string(tol) + " within " +
          std::to_string(max_iters) + " iterations",
      make_solution(source, dm, cond, marginal, alpha, max_iters));
}

std::vector<std::vector<double>> init_reproductions(
    const std::vector<std::vector<double>>& source_points, std::size_t m, Rng& rng,
    Seeding seeding) {
  const std::size_t n = source_points.size();
  if (m == 0 || m > n) {
    throw Error("init_reproductions: need 1 <= m <= n, got m=" + std::to_string(m) +
                " n=" + std::to_string(n));
  }
  std::vector<std::vector<double>> out;
  out.reserve(m);

  if (seeding == Seeding::Uniform) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t pick = j + rng.uniform_index(n - j);
      std::swap(idx[j], idx[pick]);
      out.push_back(source_points[idx[j]]);
    }
    return out;
  }

  // k-means++: spread picks out proportionally to squared distance from
  // the nearest already-chosen point.
  auto sq_dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      const double d = a[t] - b[t];
      s += d * d;
    }
    return s;
  };
  out.push_back(source_points[rng.uniform_index(n)]);
  std::vector<double> best(n);
  while (out.size() < m) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double b = sq_dist(source_points[i], out[0]);
      for (std::size_t j = 1; j < out.size(); ++j) {
        b = std::min(b, sq_dist(source_points[i], out[j]));
      }
      best[i] = b;
      total += b;
    }
    if (total == 0.0) {
      // all remaining points coincide with chosen ones; fall back to uniform
      out.push_back(source_points[rng.uniform_index(n)]);
      continue;
    }
    double u = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      u -= best[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    out.push_back(source_points[pick]);
  }
  return out;
}

bool verify_centroid(const std::vector<std::vector<double>>& dists,
                     const std::vector<double>& weights, std::size_t trials,
                     double perturb_scale, Rng& rng) {
  if (dists.empty() || dists.size() != weights.size()) {
    throw ShapeError("verify_centroid: " + std::to_string(dists.size()) +
                     " distributions vs " + std::to_string(weights.size()) + " weights");
  }
  const std::size_t width = dists[0].size();
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw NumericError("verify_centroid: negative weight");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9) {
    throw NumericError("verify_centroid: weights sum to " + std::to_string(wsum));
  }
  if (!(perturb_scale > 0.0)) throw Error("verify_centroid: perturb_scale must be > 0");

  std::vector<double> q(width, 0.0);
  for (std::size_t i = 0; i < dists.size(); ++i) {
    if (dists[i].size() != width) throw ShapeError("verify_centroid: ragged distributions");
    for (std::size_t c = 0; c < width; ++c) {
      if (!(dists[i][c] >= 0.0)) throw NumericError("verify_centroid: negative probability");
      q[c] += weights[i] * dists[i][c];
    }
  }

  auto weighted_kl_to = [&](const std::vector<double>& ref) {
    double total = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
      if (weights[i] == 0.0) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < width; ++c) {
        const double p = dists[i][c];
        if (p == 0.0) continue;
        if (ref[c] <= 0.0) return std::numeric_limits<double>::infinity();
        d += p * std::log(p / ref[c]);
      }
      total += weights[i] * d;
    }
    return total;
  };

  const double base = weighted_kl_to(q);
  std::vector<double> qp(width);
  for (std::size_t t = 0; t < trials; ++t) {
    double s = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      qp[c] = q[c] > 0.0 ? q[c] * std::exp(perturb_scale * rng.normal()) : 0.0;
      s += qp[c];
    }
    for (std::size_t c = 0; c < width; ++c) qp[c] /= s;
    if (weighted_kl_to(qp) < base) return false;
  }
  return true;
}

}  // namespace dab
