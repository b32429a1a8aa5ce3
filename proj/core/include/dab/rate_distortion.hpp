#pragma once

#include <cstddef>
#include <vector>

#include "dab/errors.hpp"
#include "dab/rng.hpp"

namespace dab {

// Probability vector over n source symbols. Entries >= 0, sum 1 (1e-12).
struct DiscreteSource {
  std::vector<double> probs;
  std::size_t n() const { return probs.size(); }
};

void validate_source(const DiscreteSource& s);

// d[i][j] = distortion of reproducing source symbol i as symbol j.
// Rectangular n x m, all entries finite and >= 0.
struct DistortionMatrix {
  std::vector<std::vector<double>> d;
  std::size_t rows() const { return d.size(); }
  std::size_t cols() const { return d.empty() ? 0 : d[0].size(); }
};

void validate_distortion(const DistortionMatrix& d);

// One point on a rate-distortion curve plus the optimizing quantizer.
struct RdSolution {
  double rate = 0.0;        // I(X; Xhat) in nats
  double distortion = 0.0;  // E[d]
  std::vector<std::vector<double>> conditional;  // n x m, rows sum to 1
  std::vector<double> marginal;                  // m
  std::size_t iterations = 0;
  double lagrangian = 0.0;  // rate + alpha * distortion
};

// Thrown when an iterative solver hits max_iters before reaching tol. The
// last iterate is carried along so callers can inspect how far it got.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, RdSolution last)
      : Error(msg), last_iterate(std::move(last)) {}
  RdSolution last_iterate;
};

// Mutual information of source probs with a conditional n x m matrix, and
// the expected distortion of the induced joint. Shared by the solvers and
// their tests.
double rd_mutual_information(const std::vector<double>& probs,
                             const std::vector<std::vector<double>>& conditional);
double rd_expected_distortion(const std::vector<double>& probs,
                              const std::vector<std::vector<double>>& conditional,
                              const DistortionMatrix& dist);

// Classic alternating minimization of I + alpha*E[d] over the conditional
// and the reproduction marginal, for a fixed distortion matrix. Stops when
// the Lagrangian improves by less than tol between iterations; the
// Lagrangian never increases along the way. alpha trades rate against
// distortion (alpha = 0 pins the rate at 0).
RdSolution blahut_arimoto(const DiscreteSource& source, const DistortionMatrix& dist,
                          double alpha, double tol = 1e-12,
                          std::size_t max_iters = 100000);

// ---------------------------------------------------------------------------
// Bregman geometry for the continuous-reproduction solver.

enum class BregmanGen {
  SquaredEuclidean,  // f(x) = |x|^2, divergence |x - y|^2
  NegativeEntropy,   // f(p) = sum p ln p, divergence = discrete KL on the simplex
};

// D_f(x, y) = f(x) - f(y) - <x - y, grad f(y)>. NegativeEntropy requires
// strictly positive y (and x entries may be 0).
double bregman_divergence(BregmanGen gen, const std::vector<double>& x,
                          const std::vector<double>& y);

// Rate-distortion with a finite candidate codebook that moves: alternates
// (1) re-fitting each reproduction point to the weighted mean of its soft
// cell, which is the optimal Bregman centroid, (2) the conditional update,
// (3) the marginal update. Objective I + alpha*E[d] never increases across
// any of the three sub-steps.
struct RdfcResult {
  std::vector<std::vector<double>> reproductions;  // m points
  RdSolution solution;
};

RdfcResult rdfc_alternating(const std::vector<std::vector<double>>& source_points,
                            const DiscreteSource& source, BregmanGen gen,
                            std::vector<std::vector<double>> reproductions_init,
                            double alpha, double tol = 1e-12,
                            std::size_t max_iters = 100000);

// Reproduction seeding: m distinct source points chosen uniformly without
// replacement, or spread out k-means++ style (squared-Euclidean weights).
enum class Seeding { Uniform, KmeansPlusPlus };

std::vector<std::vector<double>> init_reproductions(
    const std::vector<std::vector<double>>& source_points, std::size_t m, Rng& rng,
    Seeding seeding = Seeding::Uniform);

// Checks the mixture optimality of the weighted KL centroid: the
// weighted mean of KL(p_i || q*) at the mixture q* = sum_i w_i p_i must not
// beat any random simplex perturbation of q*. Returns true when q* wins
// every trial.
bool verify_centroid(const std::vector<std::vector<double>>& dists,
                     const std::vector<double>& weights, std::size_t trials,
                     double perturb_scale, Rng& rng);

}  // namespace dab
