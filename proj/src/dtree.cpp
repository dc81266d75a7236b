#include "imvc/dtree.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>

namespace imvc::dtree {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t root, std::size_t k,
                           std::size_t feature_dim)
    : nodes_(std::move(nodes)), root_(root), k_(k), feature_dim_(feature_dim) {
  validate();
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

void DecisionTree::validate() const {
  if (nodes_.empty()) throw ConfigError("tree: no nodes");
  if (root_ >= nodes_.size()) throw ConfigError("tree: root out of range");
  std::vector<int> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{root_};
  if (nodes_[root_].depth != 0) throw ConfigError("tree: root depth must be 0");
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    if (seen[id]++) throw ConfigError("tree: node " + std::to_string(id) + " reached twice");
    const auto& n = nodes_[id];
    if (n.id != id) throw ConfigError("tree: node id does not match arena position");
    if (n.leaf) {
      if (n.label >= k_) throw ConfigError("tree: leaf label out of range");
      continue;
    }
    if (n.feature >= feature_dim_) throw DimensionError("tree: split feature out of range");
    for (auto c : {n.left, n.right}) {
      if (c >= nodes_.size()) throw ConfigError("tree: internal node missing a child");
      if (nodes_[c].depth != n.depth + 1) throw ConfigError("tree: child depth mismatch");
      stack.push_back(c);
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ConfigError("tree: node " + std::to_string(i) + " unreachable");
}

double gini(std::span<const Label> labels) {
  if (labels.empty()) throw ConfigError("gini: empty label set");
  std::vector<std::size_t> counts;
  for (auto l : labels) {
    if (l >= counts.size()) counts.resize(l + 1, 0);
    ++counts[l];
  }
  const double n = static_cast<double>(labels.size());
  double sum = 0.0;
  for (auto c : counts) sum += (c / n) * (c / n);
  return 1.0 - sum;
}

double split_gini(const Matrix& x, std::span<const Label> labels, std::size_t feature,
                  double threshold) {
  if (feature >= x.cols()) throw DimensionError("split_gini: feature out of range");
  if (labels.size() != x.rows()) throw DimensionError("split_gini: label count mismatch");
  if (labels.empty()) throw ConfigError("split_gini: no instances");
  std::vector<Label> left, right;
  for (std::size_t i = 0; i < x.rows(); ++i)
    (x(i, feature) <= threshold ? left : right).push_back(labels[i]);
  const double n = static_cast<double>(labels.size());
  double out = 0.0;
  if (!left.empty()) out += left.size() / n * gini(left);
  if (!right.empty()) out += right.size() / n * gini(right);
  return out;
}

double midpoint(double lo, double hi) {
  const double m = std::midpoint(lo, hi);
  return m < hi ? m : lo;
}

namespace {

// Split quality as the exact fraction (sum cL^2 / nL + sum cR^2 / nR); larger is better.
struct Purity {
  std::int64_t num = 0;
  std::int64_t den = 1;

  bool better_than(const Purity& o) const {
    return static_cast<__int128>(num) * o.den > static_cast<__int128>(o.num) * den;
  }
};

struct Candidate {
  bool valid = false;
  Purity purity;
  double threshold = 0.0;
};

Candidate scan_feature(const Matrix& x, std::span<const Label> labels,
                       std::span<const std::size_t> subset, std::size_t k, std::size_t f,
                       std::vector<std::size_t>& order) {
  order.assign(subset.begin(), subset.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  std::vector<std::int64_t> left(k, 0), right(k, 0);
  for (auto i : order) ++right[labels[i]];
  std::int64_t sq_left = 0, sq_right = 0;
  for (auto c : right) sq_right += c * c;
  const auto n = static_cast<std::int64_t>(order.size());

  Candidate best;
  for (std::int64_t pos = 0; pos + 1 < n; ++pos) {
    const auto l = labels[order[pos]];
    sq_left += 2 * left[l] + 1;
    sq_right -= 2 * right[l] - 1;
    ++left[l];
    --right[l];
    const double lo = x(order[pos], f), hi = x(order[pos + 1], f);
    if (!(lo < hi)) continue;
    const std::int64_t nl = pos + 1, nr = n - nl;
    Purity p{sq_left * nr + sq_right * nl, nl * nr};
    if (!best.valid || p.better_than(best.purity)) best = {true, p, midpoint(lo, hi)};
  }
  return best;
}

std::optional<Split> reduce(const std::vector<Candidate>& per_feature, std::size_t n) {
  std::optional<std::size_t> arg;
  for (std::size_t f = 0; f < per_feature.size(); ++f) {
    if (!per_feature[f].valid) continue;
    if (!arg || per_feature[f].purity.better_than(per_feature[*arg].purity)) arg = f;
  }
  if (!arg) return std::nullopt;
  const auto& c = per_feature[*arg];
  const double score = 1.0 - static_cast<double>(c.purity.num) /
                                 static_cast<double>(c.purity.den) / static_cast<double>(n);
  return Split{*arg, c.threshold, score};
}

void check_inputs(const Matrix& x, std::span<const Label> labels,
                  std::span<const std::size_t> subset, std::size_t k) {
  if (labels.size() != x.rows()) throw DimensionError("best_split: label count mismatch");
  for (auto i : subset) {
    if (i >= x.rows()) throw DimensionError("best_split: subset index out of range");
    if (labels[i] >= k) throw ConfigError("best_split: label out of range");
  }
}

}  // namespace

std::optional<Split> best_split(const Matrix& x, std::span<const Label> labels,
                                std::span<const std::size_t> subset, std::size_t k) {
  check_inputs(x, labels, subset, k);
  std::vector<Candidate> per_feature(x.cols());
  const auto d = static_cast<std::int64_t>(x.cols());
#pragma omp parallel
  {
    std::vector<std::size_t> order;
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t f = 0; f < d; ++f)
      per_feature[f] = scan_feature(x, labels, subset, k, static_cast<std::size_t>(f), order);
  }
  return reduce(per_feature, subset.size());
}

std::optional<Split> best_split(const Matrix& x, std::span<const Label> labels, std::size_t k) {
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  return best_split(x, labels, all, k);
}

namespace serial {
std::optional<Split> best_split(const Matrix& x, std::span<const Label> labels,
                                std::span<const std::size_t> subset, std::size_t k) {
  check_inputs(x, labels, subset, k);
  std::vector<Candidate> per_feature(x.cols());
  std::vector<std::size_t> order;
  for (std::size_t f = 0; f < x.cols(); ++f)
    per_feature[f] = scan_feature(x, labels, subset, k, f, order);
  return reduce(per_feature, subset.size());
}
}  // namespace serial

Label majority_label(std::span<const Label> labels, std::span<const std::size_t> subset,
                     std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (auto i : subset) ++counts[labels[i]];
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

DecisionTree build_tree(const Matrix& x, std::span<const Label> labels, std::size_t k,
                        const BuildConfig& config) {
  if (x.rows() == 0) throw ConfigError("build_tree: empty input");
  if (labels.size() != x.rows()) throw DimensionError("build_tree: label count mismatch");
  if (k == 0) throw ConfigError("build_tree: K must be positive");
  if (config.max_depth < 1 || config.min_num < 1)
    throw ConfigError("build_tree: max_depth and min_num must be at least 1");
  for (auto l : labels)
    if (l >= k) throw ConfigError("build_tree: label out of range");

  struct Pending {
    std::size_t id;
    std::vector<std::size_t> subset;
  };
  std::vector<TreeNode> nodes;
  std::deque<Pending> queue;
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  nodes.push_back(TreeNode{.id = 0, .depth = 0, .count = all.size()});
  queue.push_back({0, std::move(all)});

  // Breadth-first so node ids increase level by level.
  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();
    const auto& subset = cur.subset;
    const std::size_t depth = nodes[cur.id].depth;
    const Label majority = majority_label(labels, subset, k);

    bool pure = std::all_of(subset.begin(), subset.end(),
                            [&](std::size_t i) { return labels[i] == labels[subset.front()]; });
    std::optional<Split> split;
    if (subset.size() >= config.min_num && depth < config.max_depth && !pure)
      split = best_split(x, labels, subset, k);
    if (!split) {
      nodes[cur.id].leaf = true;
      nodes[cur.id].label = majority;
      continue;
    }

    Pending left{nodes.size(), {}}, right{nodes.size() + 1, {}};
    for (auto i : subset)
      (x(i, split->feature) <= split->threshold ? left : right).subset.push_back(i);
    auto& node = nodes[cur.id];
    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left.id;
    node.right = right.id;
    nodes.push_back(TreeNode{.id = left.id, .depth = depth + 1, .count = left.subset.size()});
    nodes.push_back(TreeNode{.id = right.id, .depth = depth + 1, .count = right.subset.size()});
    queue.push_back(std::move(left));
    queue.push_back(std::move(right));
  }
  return DecisionTree(std::move(nodes), 0, k, x.cols());
}

std::size_t route(const DecisionTree& tree, std::span<const double> x, std::size_t start) {
  std::size_t id = start;
  const auto& nodes = tree.nodes();
  while (!nodes[id].leaf) {
    const auto& n = nodes[id];
    id = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return id;
}

Label predict(const DecisionTree& tree, std::span<const double> x) {
  if (x.size() != tree.feature_dim())
    throw DimensionError("predict: instance has " + std::to_string(x.size()) +
                         " features, tree expects " + std::to_string(tree.feature_dim()));
  return tree.node(route(tree, x, tree.root())).label;
}

std::vector<Label> predict_batch(const DecisionTree& tree, const Matrix& x) {
  if (x.cols() != tree.feature_dim()) throw DimensionError("predict_batch: dimension mismatch");
  std::vector<Label> out(x.rows());
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = tree.node(route(tree, x.row(i), tree.root())).label;
  return out;
}

std::size_t misclassification(const DecisionTree& tree, const Matrix& x,
                              std::span<const Label> labels) {
  if (labels.size() != x.rows()) throw DimensionError("misclassification: label count mismatch");
  const auto pred = predict_batch(tree, x);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != labels[i] ? 1 : 0;
  return wrong;
}

}  // namespace imvc::dtree
