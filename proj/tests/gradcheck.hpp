#pragma once

// Central finite-difference check of autoencoder gradients.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "imvc/nncore.hpp"
#include "imvc/random.hpp"

namespace oracle {

using imvc::Matrix;

/// max |a-b| / max(|a|, |b|, 1e-3)
inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-3});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

/// Zero-initialized biases can leave a ReLU input at exactly 0, where the
/// loss has no derivative; random biases keep the check off those kinks.
inline void randomize_biases(imvc::nn::Autoencoder& ae, imvc::Rng& rng, double scale = 0.1) {
  for (std::size_t l = 0; l < ae.layer_count(); ++l)
    for (double& b : ae.layer(l).bias) b = scale * (2.0 * imvc::unit_uniform(rng) - 1.0);
}

struct GradCheck {
  double weights = 0.0;
  double centers = 0.0;
};

inline GradCheck finite_difference_check(imvc::nn::Autoencoder& ae, const Matrix& x, Matrix* centers,
                                  const Matrix* indicator, double lambda) {
  std::optional<imvc::nn::ClusterObjective> obj;
  if (centers) obj.emplace(imvc::nn::ClusterObjective{*indicator, *centers, lambda});
  const auto fwd = ae.forward(x);
  const auto g = imvc::nn::backward(ae, x, fwd, obj ? &*obj : nullptr);

  const double h = 1e-5;
  auto fd = [&](double& param) {
    const double keep = param;
    param = keep + h;
    const double up = imvc::nn::evaluate_loss(ae, x, obj ? &*obj : nullptr).total;
    param = keep - h;
    const double down = imvc::nn::evaluate_loss(ae, x, obj ? &*obj : nullptr).total;
    param = keep;
    return (up - down) / (2 * h);
  };

  std::vector<double> analytic, numeric;
  auto params = ae.parameters();
  auto grads = g.grads.spans();
  for (std::size_t b = 0; b < params.size(); ++b)
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      analytic.push_back(grads[b][i]);
      numeric.push_back(fd(params[b][i]));
    }
  GradCheck out{max_rel_error(analytic, numeric), 0.0};
  if (centers) {
    analytic.clear();
    numeric.clear();
    for (std::size_t i = 0; i < centers->size(); ++i) {
      analytic.push_back(g.grads.centers.values()[i]);
      numeric.push_back(fd(centers->values()[i]));
    }
    out.centers = max_rel_error(analytic, numeric);
  }
  return out;
}


}  // namespace oracle
