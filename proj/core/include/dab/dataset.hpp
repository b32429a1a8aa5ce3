#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dab {

// In-memory table of feature rows with an optional numeric target column.
// Generated sets are already shuffled; CSV-loaded sets keep file order.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::string target_name;
  bool has_target = false;

  // z-score stats when normalization was applied (one entry per feature).
  bool normalized = false;
  std::vector<double> norm_mean;
  std::vector<double> norm_std;

  std::size_t n() const { return x.size(); }
  std::size_t dim() const { return x.empty() ? 0 : x[0].size(); }
};

struct DatasetPair {
  Dataset train;
  Dataset test;
};

// 1-D cubic regression toy: n_train inputs uniform on [-4,4], targets
// x^3 + eps with eps ~ N(0, 9). The test set is a noise-free 201-point
// grid spanning [-5,5], so it reaches past the training support on both
// sides.
DatasetPair gen_cubic(std::uint64_t seed, std::size_t n_train = 20);

// Same target law but inputs drawn from two disjoint clusters,
// uniform on [-5,-2] and [2,5], n_per_cluster each. Test grid: 241 points
// spanning [-6,6], crossing the empty gap between the clusters.
DatasetPair gen_two_clusters(std::uint64_t seed, std::size_t n_per_cluster = 10);

// Isotropic Gaussian blob classification with a held-out OOD blob.
struct BlobSpec {
  std::vector<std::vector<double>> centers;  // one per class, >= 2
  double stddev = 1.0;
  std::size_t n_per_center_train = 100;
  std::size_t n_per_center_test = 50;
  std::vector<double> ood_center;
  std::size_t ood_n = 100;
};

struct BlobsResult {
  Dataset train;  // labeled
  Dataset test;   // labeled, fresh draws
  Dataset ood;    // unlabeled draws around ood_center
};

BlobsResult gen_blobs(std::uint64_t seed, const BlobSpec& spec);

// CSV with a header row. target_column selects the target by name; pass ""
// for a feature-only file. normalize applies per-feature z-scoring with a
// 1e-12 stddev floor (constant columns map to zero) and records the stats
// on the returned Dataset.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 bool normalize);

// Re-applies stats from a training set to a held-out table, so evaluation
// uses the same affine map the model saw.
void normalize_with(Dataset& ds, const std::vector<double>& mean,
                    const std::vector<double>& stddev);

void write_csv(const std::string& path, const Dataset& ds);

}  // namespace dab
