#pragma once

#include <cstdint>
#include <vector>

#include "dab/gaussian.hpp"
#include "dab/rng.hpp"

namespace dab {

// Soft assignment of one encoder distribution over the codebook entries.
// Entries are nonnegative and sum to 1.
using AssignmentRow = std::vector<double>;

// A learned set of k diagonal-Gaussian centroids with a marginal weight
// vector pi over them. pi_ma is the in-flight moving average of the
// marginal; cov_num/cov_den accumulate the closed-form variance update.
// Both are committed by explicit calls at the end of their training phase,
// never implicitly.
struct Codebook {
  double alpha = 1.0;  // assignment sharpness (inverse temperature)
  double gamma = 0.0;  // marginal moving-average momentum
  std::vector<DiagGaussian> centroids;
  std::vector<double> pi;
  std::vector<double> pi_ma;
  std::vector<std::vector<double>> cov_num;  // k x dim
  std::vector<double> cov_den;               // k

  std::size_t k() const { return centroids.size(); }
  std::size_t dim() const { return centroids.empty() ? 0 : centroids[0].dim(); }
};

// Fresh codebook: centroid means drawn N(0, 0.1^2), unit scales, uniform
// marginal, zeroed accumulators.
Codebook make_codebook(std::size_t k, std::size_t dim, double alpha, double gamma,
                       Rng& rng);

void validate_codebook(const Codebook& cb);

// KL(enc || centroid_j) for every centroid.
std::vector<double> distances_to(const Codebook& cb, const DiagGaussian& enc);

// Soft assignment given distances d and marginal pi:
//     row_j ∝ pi_j * exp(-alpha * d_j)
// computed through log-sum-exp so it survives distances up to ~1e6.
// alpha == 0 returns pi unchanged. Errors: negative distance, negative
// alpha, all-zero pi, size mismatch.
AssignmentRow assignment_probs(const std::vector<double>& distances,
                               const std::vector<double>& pi, double alpha);

// Distance-based uncertainty of one encoder distribution: the assignment-
// weighted mean of its distances to the centroids. Deterministic, no
// sampling involved.
double uncertainty(const Codebook& cb, const DiagGaussian& enc);

// Mean over the batch of sum_j row_j * ln(row_j / pi_j), with 0 ln 0 = 0.
// Errors if some row puts mass on a centroid with pi_j == 0.
double mutual_information(const std::vector<AssignmentRow>& rows,
                          const std::vector<double>& pi);

// pi_ma <- gamma * pi_ma + (1 - gamma) * batch_mean(rows)
void update_marginal(Codebook& cb, const std::vector<AssignmentRow>& rows);

// pi <- normalize(pi_ma). Normalization only removes accumulated float
// drift; pi_ma is already a convex combination of assignment rows.
void commit_marginal(Codebook& cb);

// pi_ma <- pi, called at the start of the marginal phase.
void reset_marginal_ma(Codebook& cb);

// Accumulates the closed-form variance statistics for each centroid j:
//     cov_num[j] += sum_i row_i[j] * (enc_i.scale^2 + (enc_i.mean - m_j)^2)
//     cov_den[j] += sum_i row_i[j]
// using the centroid means as they currently stand.
void accumulate_covariances(Codebook& cb, const std::vector<DiagGaussian>& encoders,
                            const std::vector<AssignmentRow>& rows);

// variance_j = cov_num[j] / cov_den[j], floored at 1e-6; a centroid whose
// denominator is zero keeps its previous variance.
void commit_covariances(Codebook& cb);

void reset_covariance_accumulators(Codebook& cb);

inline constexpr double kVarianceFloor = 1e-6;

// Versioned little-endian binary encoding; deserialize validates magic,
// version, exact length and all codebook invariants.
std::vector<std::uint8_t> serialize(const Codebook& cb);
Codebook deserialize_codebook(const std::vector<std::uint8_t>& bytes);

}  // namespace dab
