#pragma once

// Fixed-structure tree refinement. Each internal node is re-fit on the
// instances whose final label actually depends on its left/right decision;
// leaves take the majority label of what reaches them. Nodes are visited
// deepest level first, and empty branches are pruned after every pass.

#include <cstddef>
#include <span>
#include <vector>

#include "imvc/dtree.hpp"

namespace imvc::tao {

using dtree::DecisionTree;
using dtree::Label;

/// reach[id] = instances currently routed through node id (ascending).
using NodeReachSet = std::vector<std::vector<std::size_t>>;

NodeReachSet compute_reach(const DecisionTree& tree, const Matrix& x);

struct CareInstance {
  std::size_t index = 0;
  bool correct_left = false;
  bool correct_right = false;

  bool operator==(const CareInstance&) const = default;
};

/// Majority label of the reaching instances (ties: smallest index), or
/// `current` if nothing reaches the leaf.
Label relabel_leaf(Label current, std::span<const std::size_t> reach,
                   std::span<const Label> labels, std::size_t k);

/// Label of the leaf reached by x when descending from `node`.
Label subtree_label(const DecisionTree& tree, std::size_t node, std::span<const double> x);

/// Reaching instances whose label is correct on exactly one side of `node`.
std::vector<CareInstance> care_set(const DecisionTree& tree, std::size_t node,
                                   std::span<const std::size_t> reach, const Matrix& x,
                                   std::span<const Label> labels);

/// Care instances sent to the side where they would be mislabeled.
std::size_t node_objective(const Matrix& x, std::span<const CareInstance> care,
                           std::size_t feature, double threshold);

struct NodeUpdate {
  bool changed = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t objective_before = 0;
  std::size_t objective_after = 0;
};

/// Re-fits (feature, threshold) of an internal node over every midpoint of
/// the reaching instances. The current split is kept unless a candidate is
/// strictly better. Ties: lowest objective, then feature, then threshold.
NodeUpdate optimize_node(DecisionTree& tree, std::size_t node,
                         std::span<const std::size_t> reach, const Matrix& x,
                         std::span<const Label> labels);

namespace serial {
NodeUpdate optimize_node(DecisionTree& tree, std::size_t node,
                         std::span<const std::size_t> reach, const Matrix& x,
                         std::span<const Label> labels);
}

/// Drops internal nodes with an empty child (replacing them by the other
/// child), renumbers in breadth-first order, and refreshes node counts.
NodeReachSet prune_and_reallocate(DecisionTree& tree, const Matrix& x);

struct PassStats {
  std::size_t leaves_relabeled = 0;
  std::size_t nodes_resplit = 0;
  std::size_t nodes_pruned = 0;
};

/// One reverse breadth-first sweep against fixed labels, then pruning.
PassStats tao_pass(DecisionTree& tree, const Matrix& x, std::span<const Label> labels);

struct OptimizeConfig {
  std::size_t max_iterations = 50;
};

struct OptimizeResult {
  std::size_t iterations = 0;
  bool converged = false;
  /// misclassification against the labels used by each pass, before and after it.
  std::vector<std::size_t> loss_before;
  std::vector<std::size_t> loss_after;
  std::vector<std::size_t> node_counts;  // tree size after each pass
};

/// Runs passes starting from `initial_labels`, then from the tree's own
/// predictions, until a pass leaves the tree unchanged or the cap is hit.
OptimizeResult optimize_tree(DecisionTree& tree, const Matrix& x,
                             std::span<const Label> initial_labels,
                             const OptimizeConfig& config = {});

}  // namespace imvc::tao
