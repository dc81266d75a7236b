#pragma once

// Six instances, three pseudo-labels. The root sends x6 to a leaf labeled 2;
// the other five reach internal node 2, whose children are leaves labeled 0
// and 1. Under the initial split (x[1] <= 2.5) x2 (label 2) is wrong on both
// sides and x5 (label 1) is routed left although only the right side fits.

#include "imvc/dtree.hpp"

namespace fixture {

struct Fig2 {
  imvc::Matrix x{{1.0, 1.0}, {2.0, 3.0}, {3.0, 4.0}, {1.5, 2.0}, {3.5, 2.2}, {0.0, 0.0}};
  std::vector<imvc::dtree::Label> labels{0, 2, 1, 0, 1, 2};
  imvc::dtree::DecisionTree tree;
  std::size_t node = 2;

  Fig2() {
    using imvc::dtree::TreeNode;
    std::vector<TreeNode> nodes{
        {.id = 0, .leaf = false, .feature = 0, .threshold = 0.5, .left = 1, .right = 2},
        {.id = 1, .leaf = true, .label = 2, .depth = 1},
        {.id = 2, .leaf = false, .feature = 1, .threshold = 2.5, .left = 3, .right = 4, .depth = 1},
        {.id = 3, .leaf = true, .label = 0, .depth = 2},
        {.id = 4, .leaf = true, .label = 1, .depth = 2}};
    tree = imvc::dtree::DecisionTree(nodes, 0, 3, 2);
  }
};

}  // namespace fixture
