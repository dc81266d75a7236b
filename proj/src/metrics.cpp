#include "imvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace imvc::metrics {
namespace {

void check_lengths(std::span<const Label> pred, std::span<const Label> truth, std::size_t min_n) {
  if (pred.size() != truth.size())
    throw DimensionError("label vectors differ in length: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(truth.size()));
  if (pred.size() < min_n)
    throw ConfigError("need at least " + std::to_string(min_n) + " labeled instances");
}

std::uint64_t choose2(std::uint64_t n) { return n * (n ? n - 1 : 0) / 2; }

}  // namespace

ContingencyTable contingency(std::span<const Label> pred, std::span<const Label> truth) {
  check_lengths(pred, truth, 0);
  std::map<Label, std::size_t> prow, tcol;
  for (auto p : pred) prow.emplace(p, 0);
  for (auto t : truth) tcol.emplace(t, 0);
  ContingencyTable table;
  for (auto& [label, idx] : prow) {
    idx = table.pred_labels.size();
    table.pred_labels.push_back(label);
  }
  for (auto& [label, idx] : tcol) {
    idx = table.truth_labels.size();
    table.truth_labels.push_back(label);
  }
  table.counts.assign(prow.size(), std::vector<std::size_t>(tcol.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++table.counts[prow[pred[i]]][tcol[truth[i]]];
  table.total = pred.size();
  return table;
}

double purity(std::span<const Label> pred, std::span<const Label> truth) {
  check_lengths(pred, truth, 1);
  const auto table = contingency(pred, truth);
  std::size_t hit = 0;
  for (const auto& row : table.counts) hit += *std::max_element(row.begin(), row.end());
  return static_cast<double>(hit) / static_cast<double>(table.total);
}

// O(n^3) shortest augmenting path with dual potentials (rows 1..n, cols 1..n).
std::vector<std::size_t> hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw DimensionError("hungarian: cost matrix must be square");
  for (double v : cost.values())
    if (!std::isfinite(v)) throw NumericError("hungarian: non-finite cost");
  if (n == 0) return {};

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double assignment_cost(const Matrix& cost, std::span<const std::size_t> assignment) {
  double total = 0.0;
  for (std::size_t r = 0; r < assignment.size(); ++r) total += cost(r, assignment[r]);
  return total;
}

double clustering_accuracy(std::span<const Label> pred, std::span<const Label> truth) {
  check_lengths(pred, truth, 1);
  const auto table = contingency(pred, truth);
  // Pad to square with zero rows/columns; maximize matches by minimizing (max - count).
  const std::size_t k = std::max(table.pred_labels.size(), table.truth_labels.size());
  Matrix cost(k, k, static_cast<double>(table.total));
  for (std::size_t r = 0; r < table.pred_labels.size(); ++r)
    for (std::size_t c = 0; c < table.truth_labels.size(); ++c)
      cost(r, c) -= static_cast<double>(table.counts[r][c]);
  const auto assignment = hungarian(cost);
  std::size_t hit = 0;
  for (std::size_t r = 0; r < table.pred_labels.size(); ++r)
    if (assignment[r] < table.truth_labels.size()) hit += table.counts[r][assignment[r]];
  return static_cast<double>(hit) / static_cast<double>(table.total);
}

PairwiseF1 pairwise_f1(std::span<const Label> pred, std::span<const Label> truth) {
  check_lengths(pred, truth, 2);
  const auto table = contingency(pred, truth);
  std::uint64_t same_both = 0, same_pred = 0, same_truth = 0;
  std::vector<std::uint64_t> col(table.truth_labels.size(), 0);
  for (const auto& row : table.counts) {
    std::uint64_t r = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      same_both += choose2(row[c]);
      r += row[c];
      col[c] += row[c];
    }
    same_pred += choose2(r);
  }
  for (auto c : col) same_truth += choose2(c);

  PairwiseF1 out;
  out.pairs.tp = same_both;
  out.pairs.fp = same_pred - same_both;
  out.pairs.fn = same_truth - same_both;
  out.pairs.tn = choose2(table.total) - out.pairs.tp - out.pairs.fp - out.pairs.fn;
  const auto& p = out.pairs;
  if (p.tp + p.fp > 0) out.precision = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
  if (p.tp + p.fn > 0) out.recall = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
  if (out.precision + out.recall > 0.0)
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

Report evaluate(std::span<const Label> pred, std::span<const Label> truth) {
  return {purity(pred, truth), clustering_accuracy(pred, truth), pairwise_f1(pred, truth).f1};
}

}  // namespace imvc::metrics
