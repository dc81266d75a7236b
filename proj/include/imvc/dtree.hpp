#pragma once

// CART classification trees over the concatenated original features, split
// by Gini impurity. Instances go left iff x[feature] <= threshold.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "imvc/matrix.hpp"

namespace imvc::dtree {

using Label = std::size_t;
inline constexpr std::size_t kNoChild = static_cast<std::size_t>(-1);

struct TreeNode {
  std::size_t id = 0;
  bool leaf = true;
  std::size_t feature = 0;   // internal only
  double threshold = 0.0;    // internal only
  Label label = 0;           // leaf only
  std::size_t left = kNoChild;
  std::size_t right = kNoChild;
  std::size_t depth = 0;
  std::size_t count = 0;     // training instances reaching the node

  bool operator==(const TreeNode&) const = default;
};

/// Node arena; nodes[root] is the root. Ids equal arena positions.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t root, std::size_t k,
               std::size_t feature_dim);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }
  const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
  TreeNode& node(std::size_t id) { return nodes_.at(id); }
  std::size_t root() const { return root_; }
  std::size_t k() const { return k_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  /// Throws DimensionError/ConfigError if the arena is not a well-formed tree.
  void validate() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t root_ = 0;
  std::size_t k_ = 0;
  std::size_t feature_dim_ = 0;
};

/// 1 - sum p_i^2. Throws ConfigError on an empty set.
double gini(std::span<const Label> labels);

/// Weighted child impurity of splitting at x[feature] <= threshold.
double split_gini(const Matrix& x, std::span<const Label> labels, std::size_t feature,
                  double threshold);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // split_gini at this split
};

/// Threshold between two consecutive distinct sorted values.
double midpoint(double lo, double hi);

/// Exhaustive search over every feature and every midpoint between distinct
/// consecutive values of the rows in `subset`. Ties: lowest score, then
/// lowest feature, then lowest threshold. Empty if no threshold exists.
std::optional<Split> best_split(const Matrix& x, std::span<const Label> labels,
                                std::span<const std::size_t> subset, std::size_t k);
std::optional<Split> best_split(const Matrix& x, std::span<const Label> labels, std::size_t k);

namespace serial {
std::optional<Split> best_split(const Matrix& x, std::span<const Label> labels,
                                std::span<const std::size_t> subset, std::size_t k);
}

struct BuildConfig {
  std::size_t max_depth = 10;  // edges on the longest root-leaf path
  std::size_t min_num = 10;    // nodes with fewer instances become leaves
};

/// Majority label; ties go to the smallest index.
Label majority_label(std::span<const Label> labels, std::span<const std::size_t> subset,
                     std::size_t k);

DecisionTree build_tree(const Matrix& x, std::span<const Label> labels, std::size_t k,
                        const BuildConfig& config = {});

/// Leaf id reached by x when descending from `start`.
std::size_t route(const DecisionTree& tree, std::span<const double> x, std::size_t start);
Label predict(const DecisionTree& tree, std::span<const double> x);
std::vector<Label> predict_batch(const DecisionTree& tree, const Matrix& x);

/// N minus the number of instances whose predicted label equals labels[i].
std::size_t misclassification(const DecisionTree& tree, const Matrix& x,
                              std::span<const Label> labels);

}  // namespace imvc::dtree
