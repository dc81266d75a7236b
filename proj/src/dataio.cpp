#include "imvc/dataio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "imvc/random.hpp"

namespace imvc::dataio {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

DatasetManifest read_manifest(const fs::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    DatasetManifest m;
    m.name = doc.value("name", path.stem().string());
    for (const auto& v : doc.at("views"))
      m.views.push_back({v.at("path").get<std::string>(), v.at("dim").get<std::size_t>()});
    if (doc.contains("labels_path") && !doc["labels_path"].is_null())
      m.labels_path = doc["labels_path"].get<std::string>();
    m.n = doc.at("n").get<std::size_t>();
    if (m.views.empty()) throw LoadError(path.string() + ": manifest lists no views");
    return m;
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": bad manifest: " + e.what());
  }
}

void write_manifest(const DatasetManifest& m, const fs::path& path) {
  json doc;
  doc["name"] = m.name;
  doc["n"] = m.n;
  doc["views"] = json::array();
  for (const auto& v : m.views) doc["views"].push_back({{"path", v.path}, {"dim", v.dim}});
  if (m.labels_path) doc["labels_path"] = *m.labels_path;
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

Matrix read_csv(const fs::path& path) {
  auto in = open_input(path);
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const std::string cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last)
        throw LoadError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                        cell + "'");
      data.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": ragged row with " +
                      std::to_string(count) + " cells, expected " + std::to_string(cols));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

void write_csv(const Matrix& m, const fs::path& path) {
  auto out = open_output(path);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

std::vector<std::int64_t> read_labels(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::int64_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + cell + "'");
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const std::vector<std::int64_t>& labels, const fs::path& path) {
  auto out = open_output(path);
  for (auto l : labels) out << l << '\n';
}

Dataset load_dataset(const fs::path& manifest_path) {
  const auto m = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  Dataset d;
  d.name = m.name;
  for (std::size_t v = 0; v < m.views.size(); ++v) {
    const auto file = resolve(m.views[v].path);
    if (!fs::exists(file)) throw LoadError("view " + std::to_string(v) + ": missing file " + file.string());
    Matrix view = read_csv(file);
    if (view.cols() != m.views[v].dim)
      throw LoadError("view " + std::to_string(v) + " (" + m.views[v].path + ") has " +
                      std::to_string(view.cols()) + " columns, manifest declares " +
                      std::to_string(m.views[v].dim));
    if (view.rows() != m.n)
      throw LoadError("view " + std::to_string(v) + " (" + m.views[v].path + ") has " +
                      std::to_string(view.rows()) + " rows, manifest declares n=" +
                      std::to_string(m.n));
    if (!d.views.empty() && view.rows() != d.views.front().rows())
      throw LoadError("row count mismatch: view 0 has " + std::to_string(d.views.front().rows()) +
                      ", view " + std::to_string(v) + " has " + std::to_string(view.rows()));
    d.views.push_back(std::move(view));
  }
  if (m.labels_path) {
    const auto file = resolve(*m.labels_path);
    if (!fs::exists(file)) throw LoadError("missing labels file " + file.string());
    auto labels = read_labels(file);
    if (labels.size() != m.n)
      throw LoadError("labels file has " + std::to_string(labels.size()) + " rows, expected " +
                      std::to_string(m.n));
    d.truth = std::move(labels);
  }
  return d;
}

Matrix FeatureScaling::apply(const Matrix& view) const {
  if (view.cols() != mean.size()) throw DimensionError("scaling: feature count mismatch");
  Matrix out(view.rows(), view.cols());
  for (std::size_t r = 0; r < view.rows(); ++r)
    for (std::size_t c = 0; c < view.cols(); ++c)
      out(r, c) = scale[c] > 0.0 ? (view(r, c) - mean[c]) / scale[c] : 0.0;
  return out;
}

FeatureScaling fit_scaling(const Matrix& view) {
  if (view.rows() < 2) throw ConfigError("standardize: need at least 2 rows");
  const double n = static_cast<double>(view.rows());
  FeatureScaling s{std::vector<double>(view.cols(), 0.0), std::vector<double>(view.cols(), 0.0)};
  for (std::size_t c = 0; c < view.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < view.rows(); ++r) sum += view(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < view.rows(); ++r) ss += (view(r, c) - mean) * (view(r, c) - mean);
    s.mean[c] = mean;
    const double sd = std::sqrt(ss / n);
    // Treat variance at rounding level as constant.
    s.scale[c] = (sd > 0.0 && sd > 1e-12 * std::abs(mean)) ? sd : 0.0;
  }
  return s;
}

Matrix standardize(const Matrix& view) { return fit_scaling(view).apply(view); }

Dataset synth_multiview(const SynthConfig& config) {
  if (config.k < 2) throw ConfigError("synth: K must be at least 2");
  if (config.views < 1) throw ConfigError("synth: need at least one view");
  if (config.n_per_cluster < 1) throw ConfigError("synth: n per cluster must be positive");
  if (config.dims.empty()) throw ConfigError("synth: no view dimensions given");
  if (config.noise < 0.0) throw ConfigError("synth: noise must be non-negative");
  for (auto d : config.dims)
    if (d == 0) throw ConfigError("synth: view dimensions must be positive");

  Rng rng(config.seed);
  const std::size_t n = config.n_per_cluster * config.k;
  std::vector<std::int64_t> truth(n);
  for (std::size_t i = 0; i < n; ++i) truth[i] = static_cast<std::int64_t>(i % config.k);
  for (std::size_t i = n; i-- > 1;) {
    const auto j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i + 1));
    std::swap(truth[i], truth[std::min(j, i)]);
  }

  Dataset data;
  data.name = "synth";
  const double min_sep = 6.0 * config.noise;
  for (std::size_t v = 0; v < config.views; ++v) {
    const std::size_t dim = config.dims[std::min(v, config.dims.size() - 1)];
    double half_width = std::max(5.0, 4.0 * config.noise);
    Matrix means(config.k, dim);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > 0 && attempt % 100 == 0) half_width *= 2.0;
      for (double& m : means.values()) m = (2.0 * unit_uniform(rng) - 1.0) * half_width;
      double closest = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < config.k; ++a)
        for (std::size_t b = a + 1; b < config.k; ++b) {
          double d2 = 0.0;
          for (std::size_t c = 0; c < dim; ++c) d2 += std::pow(means(a, c) - means(b, c), 2);
          closest = std::min(closest, std::sqrt(d2));
        }
      if (closest >= min_sep && closest > 0.0) break;
    }
    Matrix view(n, dim);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < dim; ++c)
        view(i, c) = means(static_cast<std::size_t>(truth[i]), c) +
                     (config.noise > 0.0 ? config.noise * standard_normal(rng) : 0.0);
    data.views.push_back(std::move(view));
  }
  data.truth = std::move(truth);
  return data;
}

fs::path write_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  DatasetManifest m;
  m.name = data.name;
  m.n = data.views.empty() ? 0 : data.views.front().rows();
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const std::string file = "view" + std::to_string(v) + ".csv";
    write_csv(data.views[v], dir / file);
    m.views.push_back({file, data.views[v].cols()});
  }
  if (data.truth) {
    write_labels(*data.truth, dir / "labels.csv");
    m.labels_path = "labels.csv";
  }
  const auto manifest = dir / "manifest.json";
  write_manifest(m, manifest);
  return manifest;
}

std::vector<std::size_t> view_offsets(const std::vector<std::size_t>& view_dims) {
  std::vector<std::size_t> out(view_dims.size() + 1, 0);
  std::partial_sum(view_dims.begin(), view_dims.end(), out.begin() + 1);
  return out;
}

FeatureRef attribute_feature(const std::vector<std::size_t>& view_dims, std::size_t feature) {
  std::size_t offset = 0;
  for (std::size_t v = 0; v < view_dims.size(); ++v) {
    if (feature < offset + view_dims[v]) return {v, feature - offset};
    offset += view_dims[v];
  }
  throw DimensionError("feature " + std::to_string(feature) + " beyond total dimension " +
                       std::to_string(offset));
}

std::string tree_to_json(const dtree::DecisionTree& tree, const std::vector<std::size_t>& view_dims) {
  json doc;
  doc["schema_version"] = kTreeSchemaVersion;
  doc["K"] = tree.k();
  doc["feature_dim"] = tree.feature_dim();
  doc["root"] = tree.root();
  doc["view_offsets"] = view_offsets(view_dims);
  doc["nodes"] = json::array();
  for (const auto& n : tree.nodes()) {
    json rec{{"id", n.id}, {"kind", n.leaf ? "leaf" : "internal"}, {"depth", n.depth},
             {"count", n.count}};
    if (n.leaf) {
      rec["label"] = n.label;
    } else {
      rec["feature"] = n.feature;
      rec["threshold"] = n.threshold;
      rec["left"] = n.left;
      rec["right"] = n.right;
      if (!view_dims.empty()) {
        const auto ref = attribute_feature(view_dims, n.feature);
        rec["view"] = ref.view;
        rec["local_feature"] = ref.local;
      }
    }
    doc["nodes"].push_back(std::move(rec));
  }
  return doc.dump(2);
}

dtree::DecisionTree tree_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != kTreeSchemaVersion)
      throw LoadError("tree document: unsupported schema_version");
    std::vector<dtree::TreeNode> nodes;
    for (const auto& rec : doc.at("nodes")) {
      dtree::TreeNode n;
      n.id = rec.at("id").get<std::size_t>();
      n.depth = rec.at("depth").get<std::size_t>();
      n.count = rec.value("count", std::size_t{0});
      const auto kind = rec.at("kind").get<std::string>();
      if (kind == "leaf") {
        n.leaf = true;
        n.label = rec.at("label").get<std::size_t>();
      } else if (kind == "internal") {
        n.leaf = false;
        n.feature = rec.at("feature").get<std::size_t>();
        n.threshold = rec.at("threshold").get<double>();
        n.left = rec.at("left").get<std::size_t>();
        n.right = rec.at("right").get<std::size_t>();
      } else {
        throw LoadError("tree document: unknown node kind '" + kind + "'");
      }
      nodes.push_back(n);
    }
    return dtree::DecisionTree(std::move(nodes), doc.value("root", std::size_t{0}),
                               doc.at("K").get<std::size_t>(),
                               doc.at("feature_dim").get<std::size_t>());
  } catch (const json::exception& e) {
    throw LoadError(std::string("tree document: ") + e.what());
  }
}

std::string tree_to_dot(const dtree::DecisionTree& tree, const std::vector<std::size_t>& view_dims) {
  std::ostringstream out;
  out << "digraph tree {\n";
  out << "  node [shape=box, fontname=\"Helvetica\"];\n";
  char buf[64];
  for (const auto& n : tree.nodes()) {
    out << "  n" << n.id << " [label=\"";
    if (n.leaf) {
      out << "cluster " << n.label << "\\nn=" << n.count << "\", shape=ellipse];\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.6g", n.threshold);
    if (view_dims.empty()) {
      out << "x[" << n.feature << "]";
    } else {
      const auto ref = attribute_feature(view_dims, n.feature);
      out << "V" << ref.view + 1 << "[" << ref.local << "]";
    }
    out << " ≤ " << buf << "\\nn=" << n.count << "\"];\n";
    out << "  n" << n.id << " -> n" << n.left << " [label=\"yes\"];\n";
    out << "  n" << n.id << " -> n" << n.right << " [label=\"no\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace imvc::dataio
