#pragma once

// External clustering quality: purity, best-mapping accuracy (Kuhn-Munkres),
// and pair-counting F1. Label values are arbitrary non-negative integers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "imvc/matrix.hpp"

namespace imvc::metrics {

using Label = std::int64_t;

struct ContingencyTable {
  std::vector<Label> pred_labels;   // row r counts predicted label pred_labels[r]
  std::vector<Label> truth_labels;  // column c counts true label truth_labels[c]
  std::vector<std::vector<std::size_t>> counts;
  std::size_t total = 0;
};

ContingencyTable contingency(std::span<const Label> pred, std::span<const Label> truth);

double purity(std::span<const Label> pred, std::span<const Label> truth);

/// Minimum-cost perfect matching on a square matrix; result[row] = column.
std::vector<std::size_t> hungarian(const Matrix& cost);
double assignment_cost(const Matrix& cost, std::span<const std::size_t> assignment);

double clustering_accuracy(std::span<const Label> pred, std::span<const Label> truth);

struct PairCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct PairwiseF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  PairCounts pairs;
};

/// Precision/recall over unordered instance pairs; 0 where a ratio is 0/0.
PairwiseF1 pairwise_f1(std::span<const Label> pred, std::span<const Label> truth);

struct Report {
  double purity = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

Report evaluate(std::span<const Label> pred, std::span<const Label> truth);

template <class Int>
std::vector<Label> to_labels(std::span<const Int> v) {
  return std::vector<Label>(v.begin(), v.end());
}

}  // namespace imvc::metrics
