#pragma once

// End-to-end interpretable multi-view clustering:
//   initialize: pretrain one autoencoder per view, k-means on the joined
//               embeddings, CART tree on the joined original features.
//   cycles:     feature phase (reconstruction + cross-entropy against the
//               tree's one-hot output), then tree phase (fresh k-means
//               labels, fixed-structure tree refinement).
// The reported clustering is always the tree's output.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "imvc/dataio.hpp"
#include "imvc/dtree.hpp"
#include "imvc/kmeans.hpp"
#include "imvc/nncore.hpp"
#include "imvc/tao.hpp"

namespace imvc::pipeline {

using dtree::Label;

struct PipelineConfig {
  std::size_t k = 0;
  std::size_t e1 = 200;
  std::size_t e2 = 400;
  std::size_t max_depth = 10;
  std::size_t min_num = 10;
  double lambda = 0.1;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t outer_cycles = 5;
  bool standardize = false;
  std::vector<std::size_t> hidden = {128, 64};
  std::size_t tao_max_iterations = 50;
  kmeans::KMeansConfig kmeans;

  void validate() const;
};

struct LabelSet {
  std::vector<Label> hard;
  Matrix indicator;  // N x K one-hot

  static LabelSet from_hard(std::vector<Label> hard, std::size_t k);
};

struct LossHistory {
  std::vector<std::vector<double>> pretrain;               // [view][epoch]
  std::vector<std::vector<std::vector<double>>> feature;   // [cycle][view][epoch]
  std::vector<tao::OptimizeResult> tree;                   // one per cycle
};

struct ModelState {
  PipelineConfig config;
  std::vector<std::size_t> view_dims;
  std::vector<dataio::FeatureScaling> scaling;  // empty unless standardizing
  std::vector<nn::Autoencoder> autoencoders;
  std::vector<Matrix> centers;                  // per view, K x embed_dim
  dtree::DecisionTree tree;
  LabelSet labels;                              // tree output on the training data
  std::vector<Label> pseudo_labels;             // most recent k-means labels
  LossHistory history;
  std::size_t cycles_run = 0;
  bool converged = false;
};

/// Row-wise join of per-view blocks, view order preserved.
Matrix concat_embeddings(std::span<const Matrix> per_view);

/// Applies the stored standardization (if any) and checks view shapes.
std::vector<Matrix> prepare_views(const ModelState& state, std::span<const Matrix> views);

ModelState initialize(std::span<const Matrix> views, const PipelineConfig& config);
/// `views` must already be prepared.
void feature_phase(ModelState& state, std::span<const Matrix> views);
void tree_phase(ModelState& state, std::span<const Matrix> views);
ModelState fit(std::span<const Matrix> views, const PipelineConfig& config);

/// Embeds prepared views with the current autoencoders.
Matrix embed(const ModelState& state, std::span<const Matrix> views);

/// Tree assignment for raw (unprepared) views.
std::vector<Label> predict(const ModelState& state, std::span<const Matrix> views);

struct PathStep {
  std::size_t feature = 0;  // global index into the joined features
  std::size_t view = 0;
  std::size_t local_feature = 0;
  double threshold = 0.0;
  double value = 0.0;
  bool went_left = false;
};

struct Explanation {
  std::vector<PathStep> path;
  Label label = 0;
};

/// Decision path of one instance; `instance_views[v]` holds its raw view-v features.
Explanation explain(const ModelState& state, std::span<const std::vector<double>> instance_views);

}  // namespace imvc::pipeline
