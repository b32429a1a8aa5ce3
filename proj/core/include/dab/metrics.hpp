#pragma once

#include <vector>

namespace dab {

// Score/label pairs for threshold-free ranking metrics. Labels are 0/1;
// higher scores are supposed to indicate the positive class.
struct ScoredLabels {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Mann-Whitney AUROC: fraction of positive/negative pairs ranked correctly,
// ties worth 1/2. Computed by sorting, O(n log n). Errors: empty input,
// size mismatch, single-class input, non-finite score.
double auroc(const ScoredLabels& s);

// Average precision with ties handled as rank blocks: items sharing a score
// form one block and every positive in the block gets the precision at the
// block's end. Errors: no positives.
double auprc(const ScoredLabels& s);

// AUROC of uncertainty as a misclassification detector: positives are the
// points the model got wrong. correct[i] is 1 when prediction i was right.
// Errors: all correct or all wrong (no pairs to rank).
double calibration_auroc(const std::vector<double>& uncertainty,
                         const std::vector<int>& correct);

// Fraction of exact label matches.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual);

}  // namespace dab
