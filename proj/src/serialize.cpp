#include "imvc/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace imvc::serialize {
namespace {

constexpr char kMagic[8] = {'I', 'M', 'V', 'C', 'M', 'D', 'L', '\0'};

enum Section : std::uint32_t {
  kConfig = 1,
  kScaling = 2,
  kAutoencoders = 3,
  kCenters = 4,
  kTree = 5,
  kLabels = 6,
};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void size(std::size_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void doubles(std::span<const double> v) {
    size(v.size());
    for (double d : v) f64(d);
  }
  void sizes(std::span<const std::size_t> v) {
    size(v.size());
    for (auto d : v) size(d);
  }
  void matrix(const Matrix& m) {
    size(m.rows());
    size(m.cols());
    for (double d : m.values()) f64(d);
  }
  void raw(std::string_view s) { buf_.append(s); }
  void section(std::uint32_t tag, const Writer& body) {
    u32(tag);
    size(body.buf_.size());
    raw(body.buf_);
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::size_t size() { return static_cast<std::size_t>(u64()); }
  /// Element count; each element needs at least one remaining byte.
  std::size_t count() {
    const auto v = u64();
    if (v > bytes_.size() - pos_) throw LoadError("model: implausible length field");
    return static_cast<std::size_t>(v);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> doubles() {
    std::vector<double> out(count());
    for (double& d : out) d = f64();
    return out;
  }
  std::vector<std::size_t> sizes() {
    std::vector<std::size_t> out(count());
    for (auto& d : out) d = static_cast<std::size_t>(u64());
    return out;
  }
  Matrix matrix() {
    const auto r = count(), c = count();
    if (c != 0 && r > (bytes_.size() - pos_) / c) throw LoadError("model: implausible matrix shape");
    need(r * c * 8);
    std::vector<double> data(r * c);
    for (double& d : data) d = f64();
    return Matrix(r, c, std::move(data));
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw LoadError("model: truncated data");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

Writer encode_config(const pipeline::ModelState& s) {
  const auto& c = s.config;
  Writer w;
  w.size(c.k);
  w.size(c.e1);
  w.size(c.e2);
  w.size(c.max_depth);
  w.size(c.min_num);
  w.f64(c.lambda);
  w.f64(c.lr);
  w.u64(c.seed);
  w.size(c.outer_cycles);
  w.u8(c.standardize ? 1 : 0);
  w.sizes(c.hidden);
  w.size(c.tao_max_iterations);
  w.size(c.kmeans.restarts);
  w.size(c.kmeans.max_iter);
  w.f64(c.kmeans.tol);
  w.sizes(s.view_dims);
  return w;
}

void decode_config(Reader r, pipeline::ModelState& s) {
  auto& c = s.config;
  c.k = r.size();
  c.e1 = r.size();
  c.e2 = r.size();
  c.max_depth = r.size();
  c.min_num = r.size();
  c.lambda = r.f64();
  c.lr = r.f64();
  c.seed = r.u64();
  c.outer_cycles = r.size();
  c.standardize = r.u8() != 0;
  c.hidden = r.sizes();
  c.tao_max_iterations = r.size();
  c.kmeans.restarts = r.size();
  c.kmeans.max_iter = r.size();
  c.kmeans.tol = r.f64();
  s.view_dims = r.sizes();
}

void encode_layers(Writer& w, const std::vector<nn::DenseLayer>& layers) {
  w.size(layers.size());
  for (const auto& l : layers) {
    w.u8(l.activation == nn::Activation::relu ? 1 : 0);
    w.matrix(l.weights);
    w.doubles(l.bias);
  }
}

std::vector<nn::DenseLayer> decode_layers(Reader& r) {
  std::vector<nn::DenseLayer> out(r.count());
  for (auto& l : out) {
    l.activation = r.u8() ? nn::Activation::relu : nn::Activation::linear;
    l.weights = r.matrix();
    l.bias = r.doubles();
  }
  return out;
}

}  // namespace

std::string encode_model(const pipeline::ModelState& s) {
  Writer out;
  out.raw(std::string_view(kMagic, sizeof kMagic));
  out.u32(kModelVersion);

  out.section(kConfig, encode_config(s));

  Writer scaling;
  scaling.size(s.scaling.size());
  for (const auto& fs : s.scaling) {
    scaling.doubles(fs.mean);
    scaling.doubles(fs.scale);
  }
  out.section(kScaling, scaling);

  Writer aes;
  aes.size(s.autoencoders.size());
  for (const auto& ae : s.autoencoders) {
    aes.size(ae.view_index());
    encode_layers(aes, ae.encoder());
    encode_layers(aes, ae.decoder());
  }
  out.section(kAutoencoders, aes);

  Writer centers;
  centers.size(s.centers.size());
  for (const auto& c : s.centers) centers.matrix(c);
  out.section(kCenters, centers);

  Writer tree;
  tree.size(s.tree.k());
  tree.size(s.tree.feature_dim());
  tree.size(s.tree.root());
  tree.size(s.tree.size());
  for (const auto& n : s.tree.nodes()) {
    tree.size(n.id);
    tree.u8(n.leaf ? 1 : 0);
    tree.size(n.feature);
    tree.f64(n.threshold);
    tree.size(n.label);
    tree.u64(n.left);
    tree.u64(n.right);
    tree.size(n.depth);
    tree.size(n.count);
  }
  out.section(kTree, tree);

  Writer labels;
  labels.sizes(s.labels.hard);
  labels.sizes(s.pseudo_labels);
  labels.size(s.cycles_run);
  labels.u8(s.converged ? 1 : 0);
  out.section(kLabels, labels);
  return out.str();
}

pipeline::ModelState decode_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic))
    throw LoadError("model: bad magic");
  if (const auto v = r.u32(); v != kModelVersion)
    throw LoadError("model: unsupported version " + std::to_string(v));

  pipeline::ModelState s;
  bool seen_config = false, seen_tree = false;
  while (!r.done()) {
    const auto tag = r.u32();
    const auto len = r.count();
    Reader body(r.take(len));
    switch (tag) {
      case kConfig:
        decode_config(body, s);
        seen_config = true;
        break;
      case kScaling: {
        s.scaling.resize(body.count());
        for (auto& fs : s.scaling) {
          fs.mean = body.doubles();
          fs.scale = body.doubles();
        }
        break;
      }
      case kAutoencoders: {
        const auto count = body.count();
        nn::AdamConfig adam;
        adam.lr = s.config.lr > 0.0 ? s.config.lr : adam.lr;
        for (std::size_t i = 0; i < count; ++i) {
          const auto view = body.size();
          auto enc = decode_layers(body);
          auto dec = decode_layers(body);
          s.autoencoders.emplace_back(std::move(enc), std::move(dec), view, adam);
        }
        break;
      }
      case kCenters:
        s.centers.resize(body.count());
        for (auto& c : s.centers) c = body.matrix();
        break;
      case kTree: {
        const auto k = body.size(), dim = body.size(), root = body.size();
        std::vector<dtree::TreeNode> nodes(body.count());
        for (auto& n : nodes) {
          n.id = body.size();
          n.leaf = body.u8() != 0;
          n.feature = static_cast<std::size_t>(body.u64());
          n.threshold = body.f64();
          n.label = static_cast<std::size_t>(body.u64());
          n.left = static_cast<std::size_t>(body.u64());
          n.right = static_cast<std::size_t>(body.u64());
          n.depth = static_cast<std::size_t>(body.u64());
          n.count = static_cast<std::size_t>(body.u64());
        }
        s.tree = dtree::DecisionTree(std::move(nodes), root, k, dim);
        seen_tree = true;
        break;
      }
      case kLabels: {
        auto hard = body.sizes();
        s.pseudo_labels = body.sizes();
        s.cycles_run = body.size();
        s.converged = body.u8() != 0;
        s.labels = pipeline::LabelSet::from_hard(std::move(hard), s.config.k);
        break;
      }
      default:
        break;  // unknown sections are skipped
    }
  }
  if (!seen_config || !seen_tree) throw LoadError("model: missing config or tree section");
  if (s.autoencoders.size() != s.view_dims.size())
    throw LoadError("model: autoencoder count does not match view count");
  return s;
}

void save_model(const pipeline::ModelState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  const auto bytes = encode_model(state);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("failed writing " + path.string());
}

pipeline::ModelState load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace imvc::serialize
