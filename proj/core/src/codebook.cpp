#include "dab/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dab/errors.hpp"
#include "dab/wire.hpp"

namespace dab {

namespace {

constexpr char kMagic[4] = {'D', 'A', 'B', 'C'};
constexpr std::uint32_t kVersion = 1;

void check_rows(const std::vector<AssignmentRow>& rows, std::size_t k) {
  if (rows.empty()) throw Error("assignment batch is empty");
  for (const auto& row : rows) {
    if (row.size() != k) {
      throw ShapeError("assignment row width " + std::to_string(row.size()) +
                       " vs codebook size " + std::to_string(k));
    }
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw NumericError("negative assignment probability");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-9) {
      throw NumericError("assignment row sums to " + std::to_string(s) + ", not 1");
    }
  }
}

}  // namespace

Codebook make_codebook(std::size_t k, std::size_t dim, double alpha, double gamma,
                       Rng& rng) {
  if (k < 1) throw Error("codebook needs at least one centroid");
  if (dim < 1) throw Error("codebook dimension must be positive");
  Codebook cb;
  cb.alpha = alpha;
  cb.gamma = gamma;
  cb.centroids.resize(k);
  for (auto& c : cb.centroids) {
    c.mean.resize(dim);
    c.scale.assign(dim, 1.0);
    for (auto& m : c.mean) m = rng.normal(0.0, 0.1);
  }
  cb.pi.assign(k, 1.0 / static_cast<double>(k));
  cb.pi_ma = cb.pi;
  cb.cov_num.assign(k, std::vector<double>(dim, 0.0));
  cb.cov_den.assign(k, 0.0);
  validate_codebook(cb);
  return cb;
}

void validate_codebook(const Codebook& cb) {
  const std::size_t k = cb.k();
  if (k < 1) throw Error("codebook is empty");
  const std::size_t dim = cb.centroids[0].dim();
  if (dim < 1) throw Error("codebook centroids have dimension 0");
  for (const auto& c : cb.centroids) {
    if (c.dim() != dim || c.scale.size() != dim) {
      throw ShapeError("codebook centroids disagree on dimension");
    }
    for (double s : c.scale) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw NumericError("centroid scale must be positive and finite");
      }
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) throw NumericError("centroid mean must be finite");
    }
  }
  if (cb.pi.size() != k || cb.pi_ma.size() != k) {
    throw ShapeError("marginal size does not match codebook size");
  }
  double s = 0.0;
  for (double v : cb.pi) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw NumericError("marginal entries must be >= 0");
    s += v;
  }
  if (std::fabs(s - 1.0) > 1e-12) {
    throw NumericError("marginal sums to " + std::to_string(s) + ", expected 1");
  }
  if (!(cb.alpha >= 0.0) || !std::isfinite(cb.alpha)) {
    throw NumericError("alpha must be nonnegative and finite");
  }
  if (!(cb.gamma >= 0.0 && cb.gamma <= 1.0)) {
    throw NumericError("gamma must lie in [0,1]");
  }
  if (cb.cov_num.size() != k || cb.cov_den.size() != k) {
    throw ShapeError("covariance accumulator size does not match codebook size");
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (cb.cov_num[j].size() != dim) {
      throw ShapeError("covariance numerator width does not match dimension");
    }
    if (!(cb.cov_den[j] >= 0.0)) throw NumericError("covariance denominator must be >= 0");
  }
}

std::vector<double> distances_to(const Codebook& cb, const DiagGaussian& enc) {
  std::vector<double> d(cb.k());
  for (std::size_t j = 0; j < cb.k(); ++j) d[j] = kl(enc, cb.centroids[j]);
  return d;
}

AssignmentRow assignment_probs(const std::vector<double>& distances,
                               const std::vector<double>& pi, double alpha) {
  const std::size_t k = distances.size();
  if (k == 0) throw Error("assignment_probs: no centroids");
  if (pi.size() != k) {
    throw ShapeError("assignment_probs: " + std::to_string(k) + " distances vs " +
                     std::to_string(pi.size()) + " marginal entries");
  }
  if (!(alpha >= 0.0)) throw NumericError("assignment_probs: negative alpha");
  double pi_sum = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0)) throw NumericError("assignment_probs: negative marginal entry");
    pi_sum += p;
  }
  if (pi_sum <= 0.0) throw NumericError("assignment_probs: marginal is all zero");
  for (double d : distances) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw NumericError("assignment_probs: distance must be finite and >= 0, got " +
                         std::to_string(d));
    }
  }

  if (alpha == 0.0) return pi;  // exp factor is 1 for every entry

  // log weights ln(pi_j) - alpha*d_j, normalized by log-sum-exp. Entries
  // with pi_j == 0 stay exactly 0.
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> t(k);
  double mx = ninf;
  for (std::size_t j = 0; j < k; ++j) {
    t[j] = pi[j] > 0.0 ? std::log(pi[j]) - alpha * distances[j] : ninf;
    mx = std::max(mx, t[j]);
  }
  double z = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (t[j] != ninf) z += std::exp(t[j] - mx);
  }
  const double log_z = mx + std::log(z);
  AssignmentRow row(k);
  for (std::size_t j = 0; j < k; ++j) {
    row[j] = t[j] == ninf ? 0.0 : std::exp(t[j] - log_z);
  }
  return row;
}

double uncertainty(const Codebook& cb, const DiagGaussian& enc) {
  const std::vector<double> d = distances_to(cb, enc);
  const AssignmentRow row = assignment_probs(d, cb.pi, cb.alpha);
  double u = 0.0;
  for (std::size_t j = 0; j < cb.k(); ++j) u += row[j] * d[j];
  return u;
}

double mutual_information(const std::vector<AssignmentRow>& rows,
                          const std::vector<double>& pi) {
  const std::size_t k = pi.size();
  check_rows(rows, k);
  double total = 0.0;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] == 0.0) continue;  // 0 ln 0 = 0
      if (pi[j] <= 0.0) {
        throw NumericError("mutual_information: assignment mass on centroid " +
                           std::to_string(j) + " with zero marginal");
      }
      total += row[j] * std::log(row[j] / pi[j]);
    }
  }
  const double mi = total / static_cast<double>(rows.size());
  return mi > 0.0 ? mi : 0.0;  // clip float dust below zero
}

void update_marginal(Codebook& cb, const std::vector<AssignmentRow>& rows) {
  check_rows(rows, cb.k());
  const double inv_b = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < cb.k(); ++j) {
    double mean_j = 0.0;
    for (const auto& row : rows) mean_j += row[j];
    mean_j *= inv_b;
    cb.pi_ma[j] = cb.gamma * cb.pi_ma[j] + (1.0 - cb.gamma) * mean_j;
  }
}

void commit_marginal(Codebook& cb) {
  double s = 0.0;
  for (double v : cb.pi_ma) s += v;
  if (!(s > 0.0)) throw NumericError("commit_marginal: moving average sums to zero");
  for (std::size_t j = 0; j < cb.k(); ++j) cb.pi[j] = cb.pi_ma[j] / s;
}

void reset_marginal_ma(Codebook& cb) { cb.pi_ma = cb.pi; }

void accumulate_covariances(Codebook& cb, const std::vector<DiagGaussian>& encoders,
                            const std::vector<AssignmentRow>& rows) {
  if (encoders.size() != rows.size()) {
    throw ShapeError("covariance batch: " + std::to_string(encoders.size()) +
                     " encoders vs " + std::to_string(rows.size()) + " rows");
  }
  check_rows(rows, cb.k());
  const std::size_t dim = cb.dim();
  for (std::size_t i = 0; i < encoders.size(); ++i) {
    const DiagGaussian& e = encoders[i];
    if (e.dim() != dim) {
      throw ShapeError("encoder dim " + std::to_string(e.dim()) + " vs codebook dim " +
                       std::to_string(dim));
    }
    for (std::size_t j = 0; j < cb.k(); ++j) {
      const double w = rows[i][j];
      if (w == 0.0) continue;
      const auto& m = cb.centroids[j].mean;
      for (std::size_t t = 0; t < dim; ++t) {
        const double dm = e.mean[t] - m[t];
        cb.cov_num[j][t] += w * (e.scale[t] * e.scale[t] + dm * dm);
      }
      cb.cov_den[j] += w;
    }
  }
}

void commit_covariances(Codebook& cb) {
  for (std::size_t j = 0; j < cb.k(); ++j) {
    if (cb.cov_den[j] == 0.0) continue;  // nothing assigned; keep the old variance
    for (std::size_t t = 0; t < cb.dim(); ++t) {
      double var = cb.cov_num[j][t] / cb.cov_den[j];
      if (var < kVarianceFloor) var = kVarianceFloor;
      cb.centroids[j].scale[t] = std::sqrt(var);
    }
  }
}

void reset_covariance_accumulators(Codebook& cb) {
  for (auto& num : cb.cov_num) std::fill(num.begin(), num.end(), 0.0);
  std::fill(cb.cov_den.begin(), cb.cov_den.end(), 0.0);
}

std::vector<std::uint8_t> serialize(const Codebook& cb) {
  validate_codebook(cb);
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u64(cb.k());
  w.u64(cb.dim());
  w.f64(cb.alpha);
  w.f64(cb.gamma);
  for (double v : cb.pi) w.f64(v);
  for (double v : cb.pi_ma) w.f64(v);
  for (const auto& c : cb.centroids) {
    for (double v : c.mean) w.f64(v);
    for (double v : c.scale) w.f64(v);
  }
  for (const auto& num : cb.cov_num) {
    for (double v : num) w.f64(v);
  }
  for (double v : cb.cov_den) w.f64(v);
  return w.take();
}

Codebook deserialize_codebook(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("codebook: bad magic header");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw IoError("codebook: unsupported version " + std::to_string(version) +
                  " (expected " + std::to_string(kVersion) + ")");
  }
  const std::uint64_t k = r.u64();
  const std::uint64_t dim = r.u64();
  if (k == 0 || dim == 0 || k > (1u << 20) || dim > (1u << 20)) {
    throw IoError("codebook: unreasonable size k=" + std::to_string(k) + " dim=" +
                  std::to_string(dim));
  }
  Codebook cb;
  cb.alpha = r.f64();
  cb.gamma = r.f64();
  cb.pi.resize(k);
  for (auto& v : cb.pi) v = r.f64();
  cb.pi_ma.resize(k);
  for (auto& v : cb.pi_ma) v = r.f64();
  cb.centroids.resize(k);
  for (auto& c : cb.centroids) {
    c.mean.resize(dim);
    for (auto& v : c.mean) v = r.f64();
    c.scale.resize(dim);
    for (auto& v : c.scale) v = r.f64();
  }
  cb.cov_num.assign(k, std::vector<double>(dim));
  for (auto& num : cb.cov_num) {
    for (auto& v : num) v = r.f64();
  }
  cb.cov_den.resize(k);
  for (auto& v : cb.cov_den) v = r.f64();
  if (!r.done()) {
    throw IoError("codebook: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  validate_codebook(cb);
  return cb;
}

}  // namespace dab
