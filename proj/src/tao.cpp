#include "imvc/tao.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>

namespace imvc::tao {

using dtree::TreeNode;

NodeReachSet compute_reach(const DecisionTree& tree, const Matrix& x) {
  if (x.cols() != tree.feature_dim()) throw DimensionError("compute_reach: dimension mismatch");
  NodeReachSet reach(tree.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t id = tree.root();
    while (true) {
      reach[id].push_back(i);
      const auto& n = tree.node(id);
      if (n.leaf) break;
      id = x(i, n.feature) <= n.threshold ? n.left : n.right;
    }
  }
  return reach;
}

Label relabel_leaf(Label current, std::span<const std::size_t> reach,
                   std::span<const Label> labels, std::size_t k) {
  if (reach.empty()) return current;
  return dtree::majority_label(labels, reach, k);
}

Label subtree_label(const DecisionTree& tree, std::size_t node, std::span<const double> x) {
  return tree.node(dtree::route(tree, x, node)).label;
}

std::vector<CareInstance> care_set(const DecisionTree& tree, std::size_t node,
                                   std::span<const std::size_t> reach, const Matrix& x,
                                   std::span<const Label> labels) {
  const auto& n = tree.node(node);
  if (n.leaf) throw ConfigError("care_set: node " + std::to_string(node) + " is a leaf");
  std::vector<CareInstance> out;
  for (auto i : reach) {
    const bool left_ok = subtree_label(tree, n.left, x.row(i)) == labels[i];
    const bool right_ok = subtree_label(tree, n.right, x.row(i)) == labels[i];
    if (left_ok != right_ok) out.push_back({i, left_ok, right_ok});
  }
  return out;
}

std::size_t node_objective(const Matrix& x, std::span<const CareInstance> care,
                           std::size_t feature, double threshold) {
  std::size_t wrong = 0;
  for (const auto& c : care) {
    const bool goes_left = x(c.index, feature) <= threshold;
    wrong += (goes_left ? c.correct_left : c.correct_right) ? 0 : 1;
  }
  return wrong;
}

namespace {

struct Candidate {
  std::size_t cost = std::numeric_limits<std::size_t>::max();
  double threshold = 0.0;
};

// Sweep thresholds upward; delta is the change in cost when an instance moves
// from the right side to the left side.
Candidate scan_feature(const Matrix& x, std::span<const std::size_t> reach,
                       std::span<const int> delta, std::size_t base_cost, std::size_t f,
                       std::vector<std::size_t>& order) {
  order.resize(reach.size());
  for (std::size_t p = 0; p < reach.size(); ++p) order[p] = p;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x(reach[a], f) < x(reach[b], f);
  });
  Candidate best;
  auto cost = static_cast<std::int64_t>(base_cost);
  for (std::size_t p = 0; p + 1 < order.size(); ++p) {
    cost += delta[order[p]];
    const double lo = x(reach[order[p]], f), hi = x(reach[order[p + 1]], f);
    if (!(lo < hi)) continue;
    const auto c = static_cast<std::size_t>(cost);
    if (c < best.cost) best = {c, dtree::midpoint(lo, hi)};
  }
  return best;
}

struct Prepared {
  std::vector<int> delta;  // aligned with reach
  std::size_t base_cost = 0;
  std::size_t before = 0;
  bool any_care = false;
};

Prepared prepare(const DecisionTree& tree, std::size_t node, std::span<const std::size_t> reach,
                 const Matrix& x, std::span<const Label> labels) {
  if (labels.size() != x.rows()) throw DimensionError("optimize_node: label count mismatch");
  const auto care = care_set(tree, node, reach, x, labels);
  const auto& n = tree.node(node);
  Prepared p;
  p.any_care = !care.empty();
  p.before = node_objective(x, care, n.feature, n.threshold);
  p.delta.assign(reach.size(), 0);
  std::size_t ci = 0;
  for (std::size_t r = 0; r < reach.size() && ci < care.size(); ++r) {
    if (reach[r] != care[ci].index) continue;
    if (care[ci].correct_left) {
      p.delta[r] = -1;
      ++p.base_cost;
    } else {
      p.delta[r] = +1;
    }
    ++ci;
  }
  return p;
}

NodeUpdate finish(DecisionTree& tree, std::size_t node, const Prepared& p,
                  const std::vector<Candidate>& per_feature) {
  auto& n = tree.node(node);
  NodeUpdate u{false, n.feature, n.threshold, p.before, p.before};
  std::size_t arg = per_feature.size();
  for (std::size_t f = 0; f < per_feature.size(); ++f)
    if (per_feature[f].cost != std::numeric_limits<std::size_t>::max() &&
        (arg == per_feature.size() || per_feature[f].cost < per_feature[arg].cost))
      arg = f;
  if (arg != per_feature.size() && per_feature[arg].cost < p.before) {
    n.feature = arg;
    n.threshold = per_feature[arg].threshold;
    u = {true, arg, n.threshold, p.before, per_feature[arg].cost};
  }
  return u;
}

}  // namespace

NodeUpdate optimize_node(DecisionTree& tree, std::size_t node,
                         std::span<const std::size_t> reach, const Matrix& x,
                         std::span<const Label> labels) {
  const auto p = prepare(tree, node, reach, x, labels);
  if (!p.any_care || p.before == 0) return finish(tree, node, p, {});
  std::vector<Candidate> per_feature(x.cols());
  const auto d = static_cast<std::int64_t>(x.cols());
#pragma omp parallel
  {
    std::vector<std::size_t> order;
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t f = 0; f < d; ++f)
      per_feature[f] =
          scan_feature(x, reach, p.delta, p.base_cost, static_cast<std::size_t>(f), order);
  }
  return finish(tree, node, p, per_feature);
}

namespace serial {
NodeUpdate optimize_node(DecisionTree& tree, std::size_t node,
                         std::span<const std::size_t> reach, const Matrix& x,
                         std::span<const Label> labels) {
  const auto p = prepare(tree, node, reach, x, labels);
  if (!p.any_care || p.before == 0) return finish(tree, node, p, {});
  std::vector<Candidate> per_feature(x.cols());
  std::vector<std::size_t> order;
  for (std::size_t f = 0; f < x.cols(); ++f)
    per_feature[f] = scan_feature(x, reach, p.delta, p.base_cost, f, order);
  return finish(tree, node, p, per_feature);
}
}  // namespace serial

NodeReachSet prune_and_reallocate(DecisionTree& tree, const Matrix& x) {
  const auto reach = compute_reach(tree, x);
  auto resolve = [&](std::size_t id) {
    while (!tree.node(id).leaf) {
      const auto& n = tree.node(id);
      if (reach[n.left].empty() && !reach[n.right].empty()) {
        id = n.right;
      } else if (reach[n.right].empty()) {
        id = n.left;
      } else {
        break;
      }
    }
    return id;
  };

  std::vector<TreeNode> nodes;
  std::deque<std::size_t> queue;  // old ids, aligned with nodes
  queue.push_back(resolve(tree.root()));
  nodes.push_back(tree.node(queue.front()));
  nodes[0].id = 0;
  nodes[0].depth = 0;
  for (std::size_t next = 0; next < nodes.size(); ++next) {
    const std::size_t old = queue[next];
    nodes[next].count = reach[old].size();
    if (nodes[next].leaf) continue;
    const std::size_t old_children[] = {nodes[next].left, nodes[next].right};
    for (int side = 0; side < 2; ++side) {
      const std::size_t old_child = resolve(old_children[side]);
      TreeNode copy = tree.node(old_child);
      copy.id = nodes.size();
      copy.depth = nodes[next].depth + 1;
      (side == 0 ? nodes[next].left : nodes[next].right) = copy.id;
      queue.push_back(old_child);
      nodes.push_back(copy);
    }
  }
  tree = DecisionTree(std::move(nodes), 0, tree.k(), tree.feature_dim());
  return compute_reach(tree, x);
}

PassStats tao_pass(DecisionTree& tree, const Matrix& x, std::span<const Label> labels) {
  if (labels.size() != x.rows()) throw DimensionError("tao_pass: label count mismatch");
  for (auto l : labels)
    if (l >= tree.k()) throw ConfigError("tao_pass: label out of range");
  // Ancestors of a node are visited after it, so its reach set stays valid all pass.
  const auto reach = compute_reach(tree, x);
  std::vector<std::vector<std::size_t>> levels(tree.depth() + 1);
  for (const auto& n : tree.nodes()) levels[n.depth].push_back(n.id);

  PassStats stats;
  for (std::size_t d = levels.size(); d-- > 0;) {
    for (auto id : levels[d]) {
      auto& n = tree.node(id);
      if (n.leaf) {
        const Label l = relabel_leaf(n.label, reach[id], labels, tree.k());
        if (l != n.label) {
          n.label = l;
          ++stats.leaves_relabeled;
        }
      } else if (optimize_node(tree, id, reach[id], x, labels).changed) {
        ++stats.nodes_resplit;
      }
    }
  }
  const std::size_t before = tree.size();
  prune_and_reallocate(tree, x);
  stats.nodes_pruned = before - tree.size();
  return stats;
}

namespace {

bool same_model(const DecisionTree& a, const DecisionTree& b) {
  if (a.size() != b.size() || a.root() != b.root()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &p = a.node(i), &q = b.node(i);
    if (p.leaf != q.leaf || p.left != q.left || p.right != q.right) return false;
    if (p.leaf ? p.label != q.label : (p.feature != q.feature || p.threshold != q.threshold))
      return false;
  }
  return true;
}

}  // namespace

OptimizeResult optimize_tree(DecisionTree& tree, const Matrix& x,
                             std::span<const Label> initial_labels, const OptimizeConfig& config) {
  if (config.max_iterations == 0) throw ConfigError("optimize_tree: iteration cap must be positive");
  OptimizeResult result;
  std::vector<Label> labels(initial_labels.begin(), initial_labels.end());
  while (result.iterations < config.max_iterations) {
    const DecisionTree snapshot = tree;
    result.loss_before.push_back(dtree::misclassification(tree, x, labels));
    tao_pass(tree, x, labels);
    result.loss_after.push_back(dtree::misclassification(tree, x, labels));
    result.node_counts.push_back(tree.size());
    ++result.iterations;
    if (same_model(snapshot, tree)) {
      result.converged = true;
      break;
    }
    labels = dtree::predict_batch(tree, x);
  }
  return result;
}

}  // namespace imvc::tao
