#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dab/codebook.hpp"
#include "dab/config.hpp"
#include "dab/dataset.hpp"
#include "dab/graph.hpp"
#include "dab/gaussian.hpp"

namespace dab {

// Per-epoch training trace. Term columns satisfy
//   total = nll + beta*mi + alpha*beta*distortion + margin
// to float accumulation error. wall_seconds is measured and deliberately
// kept out of the CSV encoding so reruns stay byte-identical.
struct TrainReport {
  struct Epoch {
    double total = 0.0;
    double nll = 0.0;
    double mi = 0.0;
    double distortion = 0.0;
    double margin = 0.0;
    double accuracy = 0.0;  // classification only
  };
  std::vector<Epoch> epochs;
  double wall_seconds = 0.0;
};

std::string train_report_csv(const TrainReport& rep, Task task);

// Fills input_dim (and, for classification, num_classes when left at 0)
// from the training table, and validates the targets against the task.
DabConfig resolve_config(DabConfig cfg, const Dataset& train);

// Encoder/decoder network, its loss graph, and the codebook, built from a
// resolved config. Parameter init order is fixed (encoder, decoder,
// codebook means) so a seed pins every weight.
class DabModel {
 public:
  explicit DabModel(DabConfig cfg);

  const DabConfig& config() const { return cfg_; }
  Codebook& codebook() { return cb_; }
  const Codebook& codebook() const { return cb_; }
  Graph& graph() { return g_; }
  const Graph& graph() const { return g_; }

  // Everything the loss graph needs for one batch except the latent noise:
  // assignment rows against the committed marginal (these enter the graph
  // as constants, gradients never flow through them), the mutual
  // information value, and, with the margin enabled, correctness masks
  // from the decoder's output at the encoder mean.
  struct BatchContext {
    Bindings bindings;
    std::vector<DiagGaussian> encoders;
    std::vector<std::vector<double>> distances;  // B x k
    std::vector<AssignmentRow> rows;
    std::vector<int> pred_labels;  // classification
    std::vector<int> correct;      // classification
    double mi = 0.0;
  };
  BatchContext prepare_batch(const std::vector<std::vector<double>>& x,
                             const std::vector<double>& y);

  // Inference helpers; decoding happens at the encoder mean (zero noise).
  std::vector<DiagGaussian> encode(const std::vector<std::vector<double>>& xs);

  struct Prediction {
    double value = 0.0;  // regression output, or the predicted label
    int label = -1;      // classification argmax
    double uncertainty = 0.0;
  };
  Prediction predict_with_uncertainty(const std::vector<double>& x);
  std::vector<Prediction> predict_batch(const std::vector<std::vector<double>>& xs);

  // Parameter bookkeeping for the two optimizers.
  std::vector<std::string> theta_param_names() const;  // encoder + decoder
  std::vector<std::string> phi_param_names() const;    // codebook means

  // Copies the graph-side codebook means into the Codebook after a phi
  // update, keeping the two views of the centroids coherent.
  void sync_codebook_means_from_graph();

  // z-score stats applied to inputs at train time; stored so scoring uses
  // the same map. Empty when inputs were raw.
  std::vector<double> norm_mean;
  std::vector<double> norm_std;

 private:
  void build_graph();
  NodeId build_encoder(NodeId x);
  Tensor zeros_noise(std::size_t batch) const;

  DabConfig cfg_;
  Graph g_;
  Codebook cb_;
  std::size_t out_dim_ = 1;
};

// Alternating optimization: per epoch a gradient pass over the network
// weights, a gradient pass over the codebook means with the closed-form
// variance refit committed at the end, then the marginal moving-average
// pass committed at the end. Assignment probabilities are refreshed from
// the committed marginal on every batch of every pass.
TrainReport train(DabModel& model, const Dataset& trainset);

}  // namespace dab
