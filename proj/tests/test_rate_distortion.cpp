#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "dab/codebook.hpp"
#include "dab/rate_distortion.hpp"
#include "dab/rng.hpp"

#include "oracles.hpp"

using namespace dab;

namespace {

DiscreteSource uniform_source(std::size_t n) {
  DiscreteSource s;
  s.probs.assign(n, 1.0 / double(n));
  return s;
}

DistortionMatrix hamming(std::size_t n) {
  DistortionMatrix dm;
  dm.d.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) dm.d[i][i] = 0.0;
  return dm;
}

DistortionMatrix random_matrix(std::size_t n, std::size_t m, Rng& rng) {
  DistortionMatrix dm;
  dm.d.assign(n, std::vector<double>(m));
  for (auto& row : dm.d)
    for (auto& v : row) v = rng.uniform() * 4.0;
  return dm;
}

DiscreteSource random_source(std::size_t n, Rng& rng) {
  DiscreteSource s;
  s.probs.resize(n);
  double sum = 0.0;
  for (auto& p : s.probs) {
    p = 0.05 + rng.uniform();
    sum += p;
  }
  for (auto& p : s.probs) p /= sum;
  return s;
}

}  // namespace

TEST_SUITE("rate_distortion") {

TEST_CASE("binary uniform source under Hamming distortion matches theory") {
  // At trade-off alpha the optimizer sits where the slope of the curve is
  // -alpha; for this source the whole curve is ln2 - Hb(d) and the solver
  // must land on it.
  const DiscreteSource src = uniform_source(2);
  const DistortionMatrix dm = hamming(2);
  int checked = 0;
  for (double alpha : {0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0}) {
    RdSolution sol = blahut_arimoto(src, dm, alpha, 1e-14);
    const double expect_d = 1.0 / (1.0 + std::exp(alpha));
    CHECK(sol.distortion == doctest::Approx(expect_d).epsilon(1e-6));
    CHECK(sol.rate ==
          doctest::Approx(oracle::binary_hamming_rate(sol.distortion)).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked == 7);
}

TEST_CASE("alpha zero pins the rate at zero") {
  Rng rng(5);
  RdSolution sol = blahut_arimoto(random_source(4, rng), random_matrix(4, 3, rng), 0.0);
  CHECK(sol.rate == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("large alpha drives distortion to the row minima") {
  // With a huge trade-off every symbol maps to its cheapest reproduction.
  Rng rng(6);
  const DiscreteSource src = random_source(5, rng);
  const DistortionMatrix dm = random_matrix(5, 4, rng);
  RdSolution sol = blahut_arimoto(src, dm, 200.0);
  double best = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    best += src.probs[i] * *std::min_element(dm.d[i].begin(), dm.d[i].end());
  }
  CHECK(sol.distortion == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("solution bookkeeping is self-consistent") {
  Rng rng(7);
  const DiscreteSource src = random_source(6, rng);
  const DistortionMatrix dm = random_matrix(6, 5, rng);
  RdSolution sol = blahut_arimoto(src, dm, 1.5);
  CHECK(sol.rate == doctest::Approx(rd_mutual_information(src.probs, sol.conditional))
                        .epsilon(1e-12));
  CHECK(sol.distortion ==
        doctest::Approx(rd_expected_distortion(src.probs, sol.conditional, dm))
            .epsilon(1e-12));
  CHECK(sol.lagrangian == doctest::Approx(sol.rate + 1.5 * sol.distortion).epsilon(1e-12));
  for (const auto& row : sol.conditional) {
    double s = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("lagrangian never increases across iterations") {
  // Run the solver with an unreachably small tolerance at increasing
  // iteration caps and collect the objective after each cap; intermediate
  // states arrive on the convergence exception.
  Rng rng(8);
  const DiscreteSource src = random_source(5, rng);
  const DistortionMatrix dm = random_matrix(5, 4, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t iters = 1; iters <= 40; ++iters) {
    double lag;
    bool converged = false;
    try {
      lag = blahut_arimoto(src, dm, 2.0, 1e-300, iters).lagrangian;
      converged = true;
    } catch (const ConvergenceError& e) {
      lag = e.last_iterate.lagrangian;
    }
    CHECK(lag <= prev + 1e-12);
    prev = lag;
    if (converged) break;  // stationary in float; later caps change nothing
  }
}

TEST_CASE("reproduction column order does not matter") {
  Rng rng(9);
  const DiscreteSource src = random_source(4, rng);
  DistortionMatrix dm = random_matrix(4, 3, rng);
  RdSolution base = blahut_arimoto(src, dm, 1.0);

  DistortionMatrix swapped = dm;
  for (auto& row : swapped.d) std::swap(row[0], row[2]);
  RdSolution perm = blahut_arimoto(src, swapped, 1.0);
  CHECK(perm.rate == doctest::Approx(base.rate).epsilon(1e-8));
  CHECK(perm.distortion == doctest::Approx(base.distortion).epsilon(1e-8));
}

TEST_CASE("input validation") {
  DiscreteSource bad;
  bad.probs = {0.5, 0.6};
  CHECK_THROWS_AS(validate_source(bad), Error);
  bad.probs = {0.5, -0.5, 1.0};
  CHECK_THROWS_AS(validate_source(bad), Error);
  bad.probs = {};
  CHECK_THROWS_AS(validate_source(bad), Error);

  DistortionMatrix dm;
  dm.d = {{0.0, 1.0}, {1.0}};
  CHECK_THROWS_AS(validate_distortion(dm), Error);
  dm.d = {{0.0, -1.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(validate_distortion(dm), Error);

  // Source/matrix row mismatch surfaces from the solver.
  CHECK_THROWS_AS(blahut_arimoto(uniform_source(3), hamming(2), 1.0), Error);
}

TEST_CASE("bregman divergences on worked examples") {
  // Squared Euclidean between (0,0) and (3,4).
  CHECK(bregman_divergence(BregmanGen::SquaredEuclidean, {0.0, 0.0}, {3.0, 4.0}) ==
        doctest::Approx(25.0).epsilon(1e-12));
  // Negative entropy generator on the simplex is the discrete KL.
  const double expect = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  CHECK(bregman_divergence(BregmanGen::NegativeEntropy, {0.5, 0.5}, {0.25, 0.75}) ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.143841).epsilon(1e-5));
  // Both vanish only at x == y.
  CHECK(bregman_divergence(BregmanGen::SquaredEuclidean, {1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(bregman_divergence(BregmanGen::NegativeEntropy, {0.3, 0.7}, {0.3, 0.7}) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("moving-codebook solver objective never increases") {
  Rng rng(10);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 12; ++i) {
    pts.push_back({rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)});
  }
  DiscreteSource src = uniform_source(pts.size());
  auto init = init_reproductions(pts, 3, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t iters = 1; iters <= 30; ++iters) {
    double lag;
    bool converged = false;
    try {
      lag = rdfc_alternating(pts, src, BregmanGen::SquaredEuclidean, init, 1.0, 1e-300,
                             iters)
                .solution.lagrangian;
      converged = true;
    } catch (const ConvergenceError& e) {
      lag = e.last_iterate.lagrangian;
    }
    CHECK(lag <= prev + 1e-10);
    prev = lag;
    if (converged) break;
  }
}

TEST_CASE("moving-codebook solver with one reproduction finds the mean") {
  // Squared-Euclidean with a single reproduction point: the optimum is the
  // source mean with zero rate.
  std::vector<std::vector<double>> pts = {{0.0, 0.0}, {2.0, 0.0}, {1.0, 3.0}};
  DiscreteSource src = uniform_source(3);
  auto res = rdfc_alternating(pts, src, BregmanGen::SquaredEuclidean,
                              {{5.0, 5.0}}, 1.0, 1e-13);
  CHECK(res.reproductions[0][0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.reproductions[0][1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.solution.rate == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("negative-entropy cells re-fit to the weighted mixture") {
  // Distributions assigned to one reproduction point: the optimal centroid
  // under KL(p_i || q) is exactly the weighted mixture of the p_i.
  std::vector<std::vector<double>> pts = {{0.8, 0.2}, {0.2, 0.8}, {0.5, 0.5}};
  DiscreteSource src = uniform_source(3);
  auto res = rdfc_alternating(pts, src, BregmanGen::NegativeEntropy,
                              {{0.9, 0.1}}, 2.0, 1e-13);
  CHECK(res.reproductions[0][0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.reproductions[0][1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("seeding produces distinct source points") {
  Rng rng(11);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({double(i), double(i % 3)});
  for (auto mode : {Seeding::Uniform, Seeding::KmeansPlusPlus}) {
    auto reps = init_reproductions(pts, 5, rng, mode);
    CHECK(reps.size() == 5);
    for (std::size_t a = 0; a < reps.size(); ++a) {
      CHECK(std::find(pts.begin(), pts.end(), reps[a]) != pts.end());
      for (std::size_t b = a + 1; b < reps.size(); ++b) {
        CHECK(reps[a] != reps[b]);
      }
    }
  }
  CHECK_THROWS_AS(init_reproductions(pts, 21, rng), Error);
}

TEST_CASE("weighted mixture beats random perturbations as a KL centroid") {
  Rng rng(12);
  std::vector<std::vector<double>> dists;
  std::vector<double> weights;
  double wsum = 0.0;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> p(4);
    double s = 0.0;
    for (auto& v : p) {
      v = 0.1 + rng.uniform();
      s += v;
    }
    for (auto& v : p) v /= s;
    dists.push_back(p);
    weights.push_back(0.2 + rng.uniform());
    wsum += weights.back();
  }
  for (auto& w : weights) w /= wsum;
  CHECK(verify_centroid(dists, weights, 100, 0.05, rng));
  CHECK(verify_centroid(dists, weights, 100, 0.5, rng));
}

TEST_CASE("fixed encoders reduce the training update to the classic solver") {
  // Freeze a set of encoder distributions and a codebook; alternating the
  // assignment rule with a momentum-free marginal update is exactly the
  // classic alternating minimization on the KL cost matrix with a uniform
  // source. Rates and distortions must agree to high precision.
  Rng rng(13);
  for (int instance = 0; instance < 10; ++instance) {
    const std::size_t n = 4 + rng.uniform_index(5);
    const std::size_t k = 2 + rng.uniform_index(3);
    const double alpha = 0.5 + rng.uniform() * 2.0;

    Codebook cb = make_codebook(k, 2, alpha, 0.0, rng);  // gamma 0: no momentum
    for (auto& c : cb.centroids) {
      for (auto& m : c.mean) m = rng.normal(0.0, 2.0);
      for (auto& s : c.scale) s = 0.5 + rng.uniform();
    }
    std::vector<DiagGaussian> encs(n);
    for (auto& e : encs) {
      e.mean = {rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
      e.scale = {0.5 + rng.uniform(), 0.5 + rng.uniform()};
    }

    DistortionMatrix dm;
    dm.d.resize(n);
    for (std::size_t i = 0; i < n; ++i) dm.d[i] = distances_to(cb, encs[i]);

    // Alternate assignment and marginal refresh until the marginal stops
    // moving, mirroring the solver's inner loop.
    std::vector<AssignmentRow> rows(n);
    for (int it = 0; it < 4000; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = assignment_probs(dm.d[i], cb.pi, cb.alpha);
      }
      std::vector<double> before = cb.pi;
      update_marginal(cb, rows);
      commit_marginal(cb);
      double moved = 0.0;
      for (std::size_t j = 0; j < k; ++j) moved += std::fabs(cb.pi[j] - before[j]);
      if (moved < 1e-15) break;
    }
    const double my_rate = mutual_information(rows, cb.pi);
    double my_dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) my_dist += rows[i][j] * dm.d[i][j] / double(n);
    }

    RdSolution sol = blahut_arimoto(uniform_source(n), dm, alpha, 1e-15);
    CHECK(my_rate == doctest::Approx(sol.rate).epsilon(1e-6));
    CHECK(my_dist == doctest::Approx(sol.distortion).epsilon(1e-6));
  }
}

}  // TEST_SUITE
