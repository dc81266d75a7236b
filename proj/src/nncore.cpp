#include "imvc/nncore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imvc/kernels.hpp"
#include "imvc/random.hpp"

namespace imvc::nn {
namespace {

DenseLayer glorot_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  DenseLayer layer{Matrix(in, out), std::vector<double>(out, 0.0), act};
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : layer.weights.values()) w = (2.0 * unit_uniform(rng) - 1.0) * limit;
  return layer;
}

void apply_layer(const DenseLayer& layer, const Matrix& input, Matrix& pre, Matrix& post) {
  kernels::matmul(input, layer.weights, pre);
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    auto row = pre.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
  }
  post = pre;
  if (layer.activation == Activation::relu) {
    for (double& v : post.values()) v = v > 0.0 ? v : 0.0;
  }
}

}  // namespace

AdamState::AdamState(AdamConfig config) : config_(config) {
  if (!(config_.lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
}

void AdamState::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw DimensionError("adam: parameter/gradient count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size())
      throw DimensionError("adam: gradient " + std::to_string(i) + " shape mismatch");
    for (double g : grads[i])
      if (!std::isfinite(g))
        throw NumericError("adam: non-finite gradient in block " + std::to_string(i));
  }
  if (step_ == 0) {
    m_.assign(params.size(), {});
    v_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].size(), 0.0);
      v_[i].assign(params[i].size(), 0.0);
    }
  } else {
    if (m_.size() != params.size()) throw DimensionError("adam: parameter layout changed");
    for (std::size_t i = 0; i < params.size(); ++i)
      if (m_[i].size() != params[i].size()) throw DimensionError("adam: parameter layout changed");
  }

  ++step_;
  const auto& c = config_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i];
    auto g = grads[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

std::vector<std::span<const double>> Gradients::spans() const {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.emplace_back(weights[i].values());
    out.emplace_back(bias[i]);
  }
  return out;
}

Autoencoder::Autoencoder(std::size_t input_dim, std::vector<std::size_t> hidden,
                         std::uint64_t seed, std::size_t view_index, AdamConfig adam)
    : view_index_(view_index), adam_(adam) {
  if (input_dim == 0) throw ConfigError("autoencoder: input dimension must be positive");
  if (hidden.empty()) throw ConfigError("autoencoder: need at least one hidden layer");
  Rng rng(seed);
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  const std::size_t depth = hidden.size();
  for (std::size_t i = 0; i < depth; ++i) {
    const auto act = i + 1 == depth ? Activation::linear : Activation::relu;
    encoder_.push_back(glorot_layer(dims[i], dims[i + 1], act, rng));
  }
  for (std::size_t i = depth; i > 0; --i) {
    const auto act = i == 1 ? Activation::linear : Activation::relu;
    decoder_.push_back(glorot_layer(dims[i], dims[i - 1], act, rng));
  }
  validate();
}

Autoencoder::Autoencoder(std::vector<DenseLayer> encoder, std::vector<DenseLayer> decoder,
                         std::size_t view_index, AdamConfig adam)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)), view_index_(view_index),
      adam_(adam) {
  validate();
}

void Autoencoder::validate() const {
  if (encoder_.empty() || decoder_.empty()) throw ConfigError("autoencoder: empty network");
  for (std::size_t i = 0; i < layer_count(); ++i) {
    const auto& l = layer(i);
    if (l.bias.size() != l.out()) throw DimensionError("autoencoder: bias size mismatch");
    if (i > 0 && layer(i - 1).out() != l.in())
      throw DimensionError("autoencoder: layer " + std::to_string(i) + " input mismatch");
  }
  if (decoder_.back().out() != encoder_.front().in())
    throw DimensionError("autoencoder: decoder output must equal encoder input");
}

const DenseLayer& Autoencoder::layer(std::size_t i) const {
  return i < encoder_.size() ? encoder_[i] : decoder_[i - encoder_.size()];
}

DenseLayer& Autoencoder::layer(std::size_t i) {
  return i < encoder_.size() ? encoder_[i] : decoder_[i - encoder_.size()];
}

std::size_t Autoencoder::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < layer_count(); ++i) n += layer(i).weights.size() + layer(i).bias.size();
  return n;
}

std::vector<std::span<double>> Autoencoder::parameters() {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < layer_count(); ++i) {
    auto& l = layer(i);
    out.emplace_back(l.weights.values());
    out.emplace_back(l.bias);
  }
  return out;
}

ForwardTrace Autoencoder::forward(const Matrix& x) const {
  if (x.cols() != input_dim())
    throw DimensionError("forward: input has " + std::to_string(x.cols()) +
                         " features, network expects " + std::to_string(input_dim()));
  ForwardTrace t;
  t.encoder_layers = encoder_.size();
  t.pre.resize(layer_count());
  t.post.resize(layer_count());
  for (std::size_t i = 0; i < layer_count(); ++i)
    apply_layer(layer(i), i == 0 ? x : t.post[i - 1], t.pre[i], t.post[i]);
  return t;
}

Matrix Autoencoder::encode(const Matrix& x) const {
  if (x.cols() != input_dim()) throw DimensionError("encode: input dimension mismatch");
  Matrix pre, post = x;
  for (const auto& l : encoder_) {
    Matrix in = std::move(post);
    apply_layer(l, in, pre, post);
  }
  return post;
}

double reconstruction_loss(const Matrix& xhat, const Matrix& x) {
  require_same_shape(xhat, x, "reconstruction_loss");
  double s = 0.0;
  auto a = xhat.values();
  auto b = x.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

// q_ij = 1 / (1 + ||z_i - c_j||^2); returns q and normalized s.
void student_t(const Matrix& z, const Matrix& centers, Matrix& q, Matrix& s) {
  if (centers.rows() == 0) throw ConfigError("soft_assignment: need at least one center");
  if (z.cols() != centers.cols())
    throw DimensionError("soft_assignment: embedding and center dims differ");
  kernels::squared_distances(z, centers, q);
  for (double& v : q.values()) v = 1.0 / (1.0 + v);
  s = q;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    double total = 0.0;
    for (double v : row) total += v;
    for (double& v : row) v /= total;
  }
}

}  // namespace

Matrix soft_assignment(const Matrix& z, const Matrix& centers) {
  Matrix q, s;
  student_t(z, centers, q, s);
  return s;
}

double cross_entropy_loss(const Matrix& indicator, const Matrix& soft) {
  require_same_shape(indicator, soft, "cross_entropy_loss");
  double loss = 0.0;
  auto y = indicator.values();
  auto s = soft.values();
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != 0.0) loss -= y[i] * std::log(std::max(s[i], kLogClamp));
  return loss;
}

double combined_loss(double lr, double lce, double lambda) {
  if (lambda < 0.0) throw ConfigError("combined_loss: lambda must be non-negative");
  return lr + lambda * lce;
}

LossBreakdown evaluate_loss(const Autoencoder& ae, const Matrix& x,
                            const ClusterObjective* objective) {
  const ForwardTrace t = ae.forward(x);
  LossBreakdown out;
  out.reconstruction = reconstruction_loss(t.reconstruction(), x);
  if (objective) {
    out.cross_entropy =
        cross_entropy_loss(objective->indicator, soft_assignment(t.embedding(), objective->centers));
    out.total = combined_loss(out.reconstruction, out.cross_entropy, objective->lambda);
  } else {
    out.total = out.reconstruction;
  }
  return out;
}

GradientResult backward(const Autoencoder& ae, const Matrix& x, const ForwardTrace& trace,
                        const ClusterObjective* objective) {
  const std::size_t layers = ae.layer_count();
  if (trace.post.size() != layers) throw DimensionError("backward: trace does not match network");
  const Matrix& xhat = trace.reconstruction();
  require_same_shape(xhat, x, "backward");

  GradientResult result;
  result.loss.reconstruction = reconstruction_loss(xhat, x);
  result.loss.total = result.loss.reconstruction;

  // Gradient of the clustering term with respect to the embedding and centers.
  Matrix embed_grad;
  if (objective) {
    const Matrix& z = trace.embedding();
    const Matrix& centers = objective->centers;
    require_same_shape(objective->indicator, Matrix(z.rows(), centers.rows()),
                       "backward: indicator");
    Matrix q, s;
    student_t(z, centers, q, s);
    result.loss.cross_entropy = cross_entropy_loss(objective->indicator, s);
    result.loss.total =
        combined_loss(result.loss.reconstruction, result.loss.cross_entropy, objective->lambda);

    // coef_ik = dL_ce / d(||z_i - c_k||^2)
    const std::size_t n = z.rows(), k = centers.rows();
    Matrix coef(n, k);
    for (std::size_t i = 0; i < n; ++i) {
      double wsum = 0.0;
      std::vector<double> w(k);
      for (std::size_t j = 0; j < k; ++j) {
        const double y = objective->indicator(i, j);
        w[j] = (y != 0.0 && s(i, j) > kLogClamp) ? -y : 0.0;
        wsum += w[j];
      }
      for (std::size_t j = 0; j < k; ++j) coef(i, j) = q(i, j) * (s(i, j) * wsum - w[j]);
    }
    const double scale = 2.0 * objective->lambda;

    Matrix coef_c;
    kernels::matmul(coef, centers, coef_c);
    embed_grad = Matrix(n, z.cols());
    for (std::size_t i = 0; i < n; ++i) {
      double rs = 0.0;
      for (std::size_t j = 0; j < k; ++j) rs += coef(i, j);
      for (std::size_t d = 0; d < z.cols(); ++d)
        embed_grad(i, d) = scale * (rs * z(i, d) - coef_c(i, d));
    }

    Matrix coef_t_z;
    kernels::matmul_at_b(coef, z, coef_t_z);
    const auto cs = kernels::column_sums(coef);
    result.grads.centers = Matrix(k, centers.cols());
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t d = 0; d < centers.cols(); ++d)
        result.grads.centers(j, d) = -scale * (coef_t_z(j, d) - cs[j] * centers(j, d));
  }

  result.grads.weights.resize(layers);
  result.grads.bias.resize(layers);

  Matrix upstream(xhat.rows(), xhat.cols());
  {
    auto u = upstream.values();
    auto a = xhat.values();
    auto b = x.values();
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 2.0 * (a[i] - b[i]);
  }

  for (std::size_t li = layers; li-- > 0;) {
    const DenseLayer& layer = ae.layer(li);
    Matrix delta = std::move(upstream);
    if (layer.activation == Activation::relu) {
      auto d = delta.values();
      auto p = trace.pre[li].values();
      for (std::size_t i = 0; i < d.size(); ++i)
        if (!(p[i] > 0.0)) d[i] = 0.0;
    }
    const Matrix& input = li == 0 ? x : trace.post[li - 1];
    kernels::matmul_at_b(input, delta, result.grads.weights[li]);
    result.grads.bias[li] = kernels::column_sums(delta);
    if (li == 0) break;
    kernels::matmul_a_bt(delta, layer.weights, upstream);
    if (li == trace.encoder_layers && objective) {
      auto u = upstream.values();
      auto e = embed_grad.values();
      for (std::size_t i = 0; i < u.size(); ++i) u[i] += e[i];
    }
  }
  return result;
}

}  // namespace imvc::nn
