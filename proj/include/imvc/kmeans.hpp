#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "imvc/matrix.hpp"

namespace imvc::kmeans {

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centers;
  double sse = 0.0;
  /// Update steps that moved some center by at least `tol`.
  std::size_t iterations = 0;
  /// SSE after every assignment step, including the final one.
  std::vector<double> sse_history;
};

struct KMeansConfig {
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-4;
};

/// k-means++ seeding: first center uniform, then D^2 sampling. Each draw
/// consumes exactly one unit_uniform() from an Rng seeded with `seed`.
Matrix kmeanspp_init(const Matrix& z, std::size_t k, std::uint64_t seed);

/// Lloyd iterations from the given centers. Empty clusters are re-seeded at
/// the point farthest from its assigned center.
KMeansResult lloyd(const Matrix& z, Matrix init_centers, std::size_t max_iter, double tol);

/// Best of `config.restarts` seeded k-means++/Lloyd runs, ranked by
/// (sse, restart index).
KMeansResult fit(const Matrix& z, std::size_t k, std::uint64_t seed, const KMeansConfig& config = {});

/// Sum of squared distances from each row to its labeled center.
double sse(const Matrix& z, const std::vector<std::size_t>& labels, const Matrix& centers);

}  // namespace imvc::kmeans
