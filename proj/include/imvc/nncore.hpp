#pragma once

// Dense autoencoders with hand-written backpropagation, Adam, and the
// clustering losses used during joint training.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "imvc/matrix.hpp"

namespace imvc::nn {

enum class Activation { relu, linear };

struct DenseLayer {
  Matrix weights;  // in x out
  std::vector<double> bias;
  Activation activation = Activation::linear;

  std::size_t in() const { return weights.rows(); }
  std::size_t out() const { return weights.cols(); }
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moments are sized on the first step and must
/// keep the same layout afterwards.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {});

  /// Applies one update in place. Throws NumericError (leaving every
  /// parameter untouched) if any gradient entry is not finite.
  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

  std::size_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::size_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Activations recorded by a forward pass; post.back() is the reconstruction.
struct ForwardTrace {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
  std::size_t encoder_layers = 0;

  const Matrix& embedding() const { return post[encoder_layers - 1]; }
  const Matrix& reconstruction() const { return post.back(); }
};

/// Gradients laid out like Autoencoder::parameters(), plus optional centers.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
  Matrix centers;

  std::vector<std::span<const double>> spans() const;
};

/// Symmetric encoder/decoder pair. With hidden = {h1, ..., hL} the encoder is
/// in->h1->...->hL and the decoder mirrors it. Hidden layers use ReLU; the
/// embedding layer and the reconstruction layer are linear.
class Autoencoder {
 public:
  static constexpr std::size_t kDefaultHidden[] = {128, 64};

  Autoencoder() = default;
  Autoencoder(std::size_t input_dim, std::vector<std::size_t> hidden, std::uint64_t seed,
              std::size_t view_index = 0, AdamConfig adam = {});
  /// Builds from explicit layers (used by deserialization and tests).
  Autoencoder(std::vector<DenseLayer> encoder, std::vector<DenseLayer> decoder,
              std::size_t view_index = 0, AdamConfig adam = {});

  std::size_t input_dim() const { return encoder_.front().in(); }
  std::size_t embed_dim() const { return encoder_.back().out(); }
  std::size_t view_index() const { return view_index_; }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& encoder() const { return encoder_; }
  const std::vector<DenseLayer>& decoder() const { return decoder_; }
  std::vector<DenseLayer>& encoder() { return encoder_; }
  std::vector<DenseLayer>& decoder() { return decoder_; }
  /// Layer i counts encoder layers first, then decoder layers.
  const DenseLayer& layer(std::size_t i) const;
  DenseLayer& layer(std::size_t i);
  std::size_t layer_count() const { return encoder_.size() + decoder_.size(); }

  ForwardTrace forward(const Matrix& x) const;
  Matrix encode(const Matrix& x) const;

  /// W0, b0, W1, b1, ... in layer order.
  std::vector<std::span<double>> parameters();

  AdamState& optimizer() { return adam_; }
  const AdamState& optimizer() const { return adam_; }

 private:
  void validate() const;

  std::vector<DenseLayer> encoder_;
  std::vector<DenseLayer> decoder_;
  std::size_t view_index_ = 0;
  AdamState adam_;
};

/// Sum over rows of ||xhat_i - x_i||^2.
double reconstruction_loss(const Matrix& xhat, const Matrix& x);

/// Student's t soft assignment, one probability row per embedding.
Matrix soft_assignment(const Matrix& z, const Matrix& centers);

inline constexpr double kLogClamp = 1e-12;

/// -sum_ij y_ij log(max(s_ij, 1e-12)).
double cross_entropy_loss(const Matrix& indicator, const Matrix& soft);

/// lr + lambda * lce. Throws ConfigError for negative lambda.
double combined_loss(double lr, double lce, double lambda);

/// Cross-entropy target for the joint objective. Centers get gradients too.
struct ClusterObjective {
  const Matrix& indicator;
  const Matrix& centers;
  double lambda;
};

struct LossBreakdown {
  double reconstruction = 0.0;
  double cross_entropy = 0.0;
  double total = 0.0;
};

struct GradientResult {
  LossBreakdown loss;
  Gradients grads;
};

/// Exact gradients of the reconstruction loss, or of the combined loss when
/// `objective` is given, evaluated at the activations in `trace`.
GradientResult backward(const Autoencoder& ae, const Matrix& x, const ForwardTrace& trace,
                        const ClusterObjective* objective = nullptr);

/// Loss value only (no gradients); used by finite-difference checks.
LossBreakdown evaluate_loss(const Autoencoder& ae, const Matrix& x,
                            const ClusterObjective* objective = nullptr);

}  // namespace imvc::nn
