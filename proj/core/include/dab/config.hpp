#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dab/dataset.hpp"

namespace dab {

enum class Task { Regression, Classification };
enum class Activation { Elu, Relu };

// Vib mode trains the same network with a single fixed-weight codebook
// entry and no marginal machinery; beta is then the single KL coefficient.
enum class TrainMode { Dab, Vib };

// Model and optimization hyperparameters. input_dim and (for
// classification) num_classes of 0 mean "resolve from the training data".
struct DabConfig {
  Task task = Task::Regression;
  TrainMode mode = TrainMode::Dab;
  std::size_t input_dim = 0;
  std::size_t latent_dim = 8;
  std::size_t num_classes = 0;
  std::vector<std::size_t> encoder_hidden = {100, 100};
  Activation activation = Activation::Elu;
  std::size_t k = 1;
  double beta = 1.0;
  double alpha = 5.0;
  double gamma = 0.0;
  double lr_theta = 1e-3;
  double lr_phi = 1e-2;
  double init_gain = 1.0;  // scales the uniform fan-based weight init
  std::size_t epochs = 1500;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 1;
  bool margin_enabled = false;
  double u_lb = 100.0;
};

// Where the training data comes from.
enum class DataSource { Generator, Csv };

struct DataConfig {
  DataSource source = DataSource::Generator;
  std::string generator = "cubic";  // cubic | two-clusters | blobs
  std::uint64_t seed = 0;           // 0 = use the model seed
  std::size_t n_train = 20;         // cubic
  std::size_t n_per_cluster = 10;   // two-clusters
  BlobSpec blobs;                   // blobs
  std::string train_csv;
  std::string target_column = "y";
  bool normalize = false;
};

struct RunConfig {
  DabConfig model;
  DataConfig data;
};

// Parses either the native key/value text format (dotted keys, '#'
// comments) or a JSON object with the same schema; the first non-space
// character decides which. Unknown keys, type errors and out-of-range
// values are all collected and reported together in one ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Canonical encodings. round-trip: parse(to_text(c)) == c.
std::string to_text(const RunConfig& c);
std::string to_json(const RunConfig& c);

// Semantic validation shared by every entry path into training.
void validate(const DabConfig& c);

// Named hyperparameter bundles shipped with the tool. Unknown name throws
// with the list of valid ones.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace dab
