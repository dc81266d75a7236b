#pragma once

// Dataset manifests, CSV views, standardization, synthetic multi-view data,
// and tree export (JSON / Graphviz DOT).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imvc/dtree.hpp"
#include "imvc/matrix.hpp"

namespace imvc::dataio {

struct ViewSpec {
  std::string path;  // relative paths resolve against the manifest directory
  std::size_t dim = 0;
};

struct DatasetManifest {
  std::string name;
  std::vector<ViewSpec> views;
  std::optional<std::string> labels_path;
  std::size_t n = 0;
};

struct Dataset {
  std::string name;
  std::vector<Matrix> views;
  std::optional<std::vector<std::int64_t>> truth;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Loads and validates every view (row counts, declared dims) plus labels.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Comma-separated numbers, no header. Values written in shortest round-trip form.
Matrix read_csv(const std::filesystem::path& path);
void write_csv(const Matrix& m, const std::filesystem::path& path);

/// One integer per line.
std::vector<std::int64_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::vector<std::int64_t>& labels, const std::filesystem::path& path);

/// Per-feature affine map x' = (x - mean) / scale; scale 0 marks a constant feature.
struct FeatureScaling {
  std::vector<double> mean;
  std::vector<double> scale;

  Matrix apply(const Matrix& view) const;
};

/// Population (1/N) mean and standard deviation of each column.
FeatureScaling fit_scaling(const Matrix& view);

/// z-score each column; constant columns become 0. Needs at least 2 rows.
Matrix standardize(const Matrix& view);

struct SynthConfig {
  std::size_t n_per_cluster = 200;
  std::size_t k = 3;
  std::size_t views = 3;
  std::vector<std::size_t> dims = {10};  // last entry repeats for remaining views
  double noise = 0.5;
  std::uint64_t seed = 0;
};

/// K isotropic Gaussian blobs per view, cluster means at least 6*noise apart,
/// one shared (shuffled) instance-to-cluster assignment across views.
Dataset synth_multiview(const SynthConfig& config);

/// Writes view{v}.csv, labels.csv and manifest.json into `dir`.
std::filesystem::path write_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Global feature -> (view, local index) given per-view dims.
struct FeatureRef {
  std::size_t view = 0;
  std::size_t local = 0;
};
FeatureRef attribute_feature(const std::vector<std::size_t>& view_dims, std::size_t feature);
std::vector<std::size_t> view_offsets(const std::vector<std::size_t>& view_dims);

inline constexpr int kTreeSchemaVersion = 1;

std::string tree_to_json(const dtree::DecisionTree& tree, const std::vector<std::size_t>& view_dims);
dtree::DecisionTree tree_from_json(const std::string& text);
/// Internal nodes read "V{v}[{local}] ≤ {threshold}" (v 1-based), leaves "cluster {l}".
std::string tree_to_dot(const dtree::DecisionTree& tree, const std::vector<std::size_t>& view_dims);

}  // namespace imvc::dataio
