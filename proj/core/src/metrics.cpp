#include "dab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dab/errors.hpp"

namespace dab {

namespace {

void check_input(const ScoredLabels& s) {
  if (s.scores.empty()) throw Error("metric input is empty");
  if (s.scores.size() != s.labels.size()) {
    throw ShapeError("metric input: " + std::to_string(s.scores.size()) + " scores vs " +
                     std::to_string(s.labels.size()) + " labels");
  }
  for (double v : s.scores) {
    if (!std::isfinite(v)) throw NumericError("metric input: non-finite score");
  }
  for (int l : s.labels) {
    if (l != 0 && l != 1) throw Error("metric input: labels must be 0 or 1");
  }
}

// Indices sorted by descending score. Stable so equal scores keep input
// order, though all consumers treat equal scores as one block anyway.
std::vector<std::size_t> order_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double auroc(const ScoredLabels& s) {
  check_input(s);
  std::size_t pos = 0;
  for (int l : s.labels) pos += static_cast<std::size_t>(l);
  const std::size_t neg = s.labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw Error("auroc: input contains a single class (" + std::to_string(pos) +
                " positives, " + std::to_string(neg) + " negatives)");
  }

  // Walk blocks of equal score from the top. Within a block every
  // positive/negative pair is a tie; a positive beats exactly the
  // negatives in strictly lower blocks.
  const auto idx = order_desc(s.scores);
  double wins = 0.0;
  std::size_t neg_above = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::size_t block_pos = 0, block_neg = 0;
    while (j < idx.size() && s.scores[idx[j]] == s.scores[idx[i]]) {
      if (s.labels[idx[j]]) {
        ++block_pos;
      } else {
        ++block_neg;
      }
      ++j;
    }
    wins += static_cast<double>(block_pos) *
            (static_cast<double>(neg - neg_above - block_neg) +
             0.5 * static_cast<double>(block_neg));
    neg_above += block_neg;
    i = j;
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(const ScoredLabels& s) {
  check_input(s);
  std::size_t pos = 0;
  for (int l : s.labels) pos += static_cast<std::size_t>(l);
  if (pos == 0) throw Error("auprc: no positive labels");

  const auto idx = order_desc(s.scores);
  double ap = 0.0;
  std::size_t seen = 0, seen_pos = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::size_t block_pos = 0;
    while (j < idx.size() && s.scores[idx[j]] == s.scores[idx[i]]) {
      block_pos += static_cast<std::size_t>(s.labels[idx[j]]);
      ++j;
    }
    seen += j - i;
    seen_pos += block_pos;
    const double precision = static_cast<double>(seen_pos) / static_cast<double>(seen);
    ap += static_cast<double>(block_pos) * precision;
    i = j;
  }
  return ap / static_cast<double>(pos);
}

double calibration_auroc(const std::vector<double>& uncertainty,
                         const std::vector<int>& correct) {
  if (uncertainty.size() != correct.size()) {
    throw ShapeError("calibration_auroc: " + std::to_string(uncertainty.size()) +
                     " scores vs " + std::to_string(correct.size()) + " outcomes");
  }
  ScoredLabels s;
  s.scores = uncertainty;
  s.labels.reserve(correct.size());
  for (int c : correct) {
    if (c != 0 && c != 1) throw Error("calibration_auroc: outcomes must be 0 or 1");
    s.labels.push_back(c ? 0 : 1);  // a mistake is the positive class
  }
  std::size_t mistakes = 0;
  for (int l : s.labels) mistakes += static_cast<std::size_t>(l);
  if (mistakes == 0 || mistakes == s.labels.size()) {
    throw Error("calibration_auroc: degenerate correctness (all " +
                std::string(mistakes == 0 ? "correct" : "wrong") + ")");
  }
  return auroc(s);
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.empty()) throw Error("accuracy: empty input");
  if (predicted.size() != actual.size()) {
    throw ShapeError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(actual.size()) + " labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    hits += predicted[i] == actual[i] ? 1u : 0u;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace dab
