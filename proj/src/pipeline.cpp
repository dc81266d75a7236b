#include "imvc/pipeline.hpp"

#include <cmath>
#include <string>

#include "imvc/metrics.hpp"
#include "imvc/random.hpp"

namespace imvc::pipeline {
namespace {

constexpr std::uint64_t kStreamAutoencoder = 100;
constexpr std::uint64_t kStreamKMeans = 1000;
constexpr std::uint64_t kStreamJitter = 2000;
constexpr double kJitterScale = 1e-3;

std::vector<double> pretrain(nn::Autoencoder& ae, const Matrix& x, std::size_t epochs) {
  std::vector<double> trace;
  trace.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto fwd = ae.forward(x);
    auto g = nn::backward(ae, x, fwd);
    trace.push_back(g.loss.total);
    ae.optimizer().step(ae.parameters(), g.grads.spans());
  }
  return trace;
}

Matrix initial_centers(const Matrix& z, std::span<const Label> labels, std::size_t k, Rng& rng) {
  const std::size_t d = z.cols();
  Matrix centers(k, d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    ++counts[labels[i]];
    auto c = centers.row(labels[i]);
    for (std::size_t j = 0; j < d; ++j) c[j] += z(i, j);
  }
  std::vector<double> global(d, 0.0);
  double mean_all = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) global[j] += z(i, j) / static_cast<double>(z.rows());
  for (double g : global) mean_all += g / static_cast<double>(d);
  double var = 0.0;
  for (double v : z.values()) var += (v - mean_all) * (v - mean_all);
  const double sd = std::sqrt(var / static_cast<double>(z.size()));

  for (std::size_t j = 0; j < k; ++j) {
    auto c = centers.row(j);
    if (counts[j] > 0) {
      for (double& v : c) v /= static_cast<double>(counts[j]);
    } else {
      for (std::size_t t = 0; t < d; ++t)
        c[t] = global[t] + kJitterScale * sd * standard_normal(rng);
    }
  }
  return centers;
}

// Renames fresh k-means clusters to the previous labels they overlap most
// (one-to-one), so cluster names stay stable from cycle to cycle.
void align_labels(std::vector<Label>& fresh, std::span<const Label> previous, std::size_t k) {
  if (previous.size() != fresh.size()) return;
  Matrix cost(k, k, 0.0);
  for (std::size_t i = 0; i < fresh.size(); ++i) cost(fresh[i], previous[i]) -= 1.0;
  const auto map = metrics::hungarian(cost);
  for (auto& l : fresh) l = map[l];
}

}  // namespace

void PipelineConfig::validate() const {
  if (k < 2) throw ConfigError("config: K must be at least 2");
  if (e1 < 1 || e2 < 1) throw ConfigError("config: e1 and e2 must be at least 1");
  if (max_depth < 1 || min_num < 1) throw ConfigError("config: max-depth and min-num must be at least 1");
  if (!(lambda >= 0.0)) throw ConfigError("config: lambda must be non-negative");
  if (!(lr > 0.0)) throw ConfigError("config: learning rate must be positive");
  if (hidden.empty()) throw ConfigError("config: autoencoder needs hidden layers");
}

LabelSet LabelSet::from_hard(std::vector<Label> hard, std::size_t k) {
  LabelSet s{std::move(hard), Matrix()};
  s.indicator = Matrix(s.hard.size(), k, 0.0);
  for (std::size_t i = 0; i < s.hard.size(); ++i) {
    if (s.hard[i] >= k) throw ConfigError("label out of range");
    s.indicator(i, s.hard[i]) = 1.0;
  }
  return s;
}

Matrix concat_embeddings(std::span<const Matrix> per_view) {
  if (per_view.empty()) throw DimensionError("concat_embeddings: no views");
  return hconcat(per_view);
}

std::vector<Matrix> prepare_views(const ModelState& state, std::span<const Matrix> views) {
  if (views.size() != state.view_dims.size())
    throw DimensionError("expected " + std::to_string(state.view_dims.size()) + " views, got " +
                         std::to_string(views.size()));
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].cols() != state.view_dims[v])
      throw DimensionError("view " + std::to_string(v) + " has " + std::to_string(views[v].cols()) +
                           " features, model expects " + std::to_string(state.view_dims[v]));
    if (views[v].rows() != views.front().rows())
      throw DimensionError("view " + std::to_string(v) + " row count differs from view 0");
    out.push_back(state.scaling.empty() ? views[v] : state.scaling[v].apply(views[v]));
  }
  return out;
}

Matrix embed(const ModelState& state, std::span<const Matrix> views) {
  std::vector<Matrix> z;
  for (std::size_t v = 0; v < views.size(); ++v) z.push_back(state.autoencoders[v].encode(views[v]));
  return concat_embeddings(z);
}

ModelState initialize(std::span<const Matrix> raw_views, const PipelineConfig& config) {
  config.validate();
  if (raw_views.empty()) throw DimensionError("initialize: no views");
  const std::size_t n = raw_views.front().rows();
  if (n < config.k) throw ConfigError("initialize: fewer instances than clusters");

  ModelState state;
  state.config = config;
  for (const auto& v : raw_views) state.view_dims.push_back(v.cols());
  if (config.standardize)
    for (const auto& v : raw_views) state.scaling.push_back(dataio::fit_scaling(v));
  const auto views = prepare_views(state, raw_views);

  nn::AdamConfig adam;
  adam.lr = config.lr;
  for (std::size_t v = 0; v < views.size(); ++v) {
    state.autoencoders.emplace_back(views[v].cols(), config.hidden,
                                    derive_seed(config.seed, kStreamAutoencoder + v), v, adam);
    state.history.pretrain.push_back(pretrain(state.autoencoders[v], views[v], config.e1));
  }

  const Matrix z = embed(state, views);
  auto km = kmeans::fit(z, config.k, derive_seed(config.seed, kStreamKMeans), config.kmeans);
  state.pseudo_labels = km.labels;

  const Matrix x = concat_embeddings(views);
  state.tree = dtree::build_tree(x, km.labels, config.k, {config.max_depth, config.min_num});
  state.labels = LabelSet::from_hard(dtree::predict_batch(state.tree, x), config.k);
  return state;
}

void feature_phase(ModelState& state, std::span<const Matrix> views) {
  const auto& config = state.config;
  const Matrix x = concat_embeddings(views);
  state.labels = LabelSet::from_hard(dtree::predict_batch(state.tree, x), config.k);
  const std::size_t cycle = state.history.feature.size();
  auto& traces = state.history.feature.emplace_back(views.size());
  state.centers.resize(views.size());

  for (std::size_t v = 0; v < views.size(); ++v) {
    auto& ae = state.autoencoders[v];
    Rng jitter(derive_seed(config.seed, kStreamJitter + cycle * views.size() + v));
    Matrix centers = initial_centers(ae.encode(views[v]), state.labels.hard, config.k, jitter);
    nn::AdamConfig adam = ae.optimizer().config();
    nn::AdamState center_opt(adam);
    const nn::ClusterObjective objective{state.labels.indicator, centers, config.lambda};

    auto& trace = traces[v];
    trace.reserve(config.e2);
    for (std::size_t e = 0; e < config.e2; ++e) {
      const auto fwd = ae.forward(views[v]);
      auto g = nn::backward(ae, views[v], fwd, &objective);
      trace.push_back(g.loss.total);
      ae.optimizer().step(ae.parameters(), g.grads.spans());
      const std::span<double> cp[] = {centers.values()};
      const std::span<const double> cg[] = {g.grads.centers.values()};
      center_opt.step(cp, cg);
    }
    state.centers[v] = std::move(centers);
  }
}

void tree_phase(ModelState& state, std::span<const Matrix> views) {
  const auto& config = state.config;
  const std::size_t cycle = state.history.tree.size() + 1;
  const Matrix z = embed(state, views);
  auto km = kmeans::fit(z, config.k, derive_seed(config.seed, kStreamKMeans + cycle), config.kmeans);
  align_labels(km.labels, state.labels.hard, config.k);
  state.pseudo_labels = km.labels;

  const Matrix x = concat_embeddings(views);
  state.history.tree.push_back(
      tao::optimize_tree(state.tree, x, km.labels, {config.tao_max_iterations}));
  state.labels = LabelSet::from_hard(dtree::predict_batch(state.tree, x), config.k);
}

ModelState fit(std::span<const Matrix> raw_views, const PipelineConfig& config) {
  ModelState state = initialize(raw_views, config);
  const auto views = prepare_views(state, raw_views);
  for (std::size_t c = 0; c < config.outer_cycles; ++c) {
    const std::vector<Label> previous = state.labels.hard;
    feature_phase(state, views);
    tree_phase(state, views);
    ++state.cycles_run;
    if (state.labels.hard == previous) {
      state.converged = true;
      break;
    }
  }
  return state;
}

std::vector<Label> predict(const ModelState& state, std::span<const Matrix> views) {
  const auto prepared = prepare_views(state, views);
  return dtree::predict_batch(state.tree, concat_embeddings(prepared));
}

Explanation explain(const ModelState& state, std::span<const std::vector<double>> instance_views) {
  if (instance_views.size() != state.view_dims.size())
    throw DimensionError("explain: expected " + std::to_string(state.view_dims.size()) + " views");
  std::vector<Matrix> rows;
  for (std::size_t v = 0; v < instance_views.size(); ++v) {
    if (instance_views[v].size() != state.view_dims[v])
      throw DimensionError("explain: view " + std::to_string(v) + " has wrong dimension");
    rows.emplace_back(1, instance_views[v].size(), instance_views[v]);
  }
  const Matrix x = concat_embeddings(prepare_views(state, rows));

  Explanation out;
  std::size_t id = state.tree.root();
  while (!state.tree.node(id).leaf) {
    const auto& n = state.tree.node(id);
    const auto ref = dataio::attribute_feature(state.view_dims, n.feature);
    const double value = x(0, n.feature);
    const bool left = value <= n.threshold;
    out.path.push_back({n.feature, ref.view, ref.local, n.threshold, value, left});
    id = left ? n.left : n.right;
  }
  out.label = state.tree.node(id).label;
  return out;
}

}  // namespace imvc::pipeline
