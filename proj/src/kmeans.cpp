#include "imvc/kmeans.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "imvc/kernels.hpp"
#include "imvc/random.hpp"

namespace imvc::kmeans {
namespace {

double row_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void copy_row(const Matrix& from, std::size_t r, Matrix& to, std::size_t dst) {
  auto src = from.row(r);
  std::copy(src.begin(), src.end(), to.row(dst).begin());
}

}  // namespace

double sse(const Matrix& z, const std::vector<std::size_t>& labels, const Matrix& centers) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) s += row_distance(z.row(i), centers.row(labels[i]));
  return s;
}

Matrix kmeanspp_init(const Matrix& z, std::size_t k, std::uint64_t seed) {
  const std::size_t n = z.rows();
  if (k == 0) throw ConfigError("kmeans++: K must be positive");
  if (k > n)
    throw ConfigError("kmeans++: K=" + std::to_string(k) + " exceeds N=" + std::to_string(n));
  Rng rng(seed);
  Matrix centers(k, z.cols());
  std::vector<bool> chosen(n, false);

  auto first = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  chosen[first] = true;
  copy_row(z, first, centers, 0);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = row_distance(z.row(i), centers.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    const double u = unit_uniform(rng);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = u * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Fewer distinct points than K: fall back to a uniform pick among the unused rows.
      std::size_t remaining = 0;
      for (bool b : chosen) remaining += b ? 0 : 1;
      auto nth = std::min(static_cast<std::size_t>(u * static_cast<double>(remaining)), remaining - 1);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        if (nth-- == 0) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    copy_row(z, pick, centers, c);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], row_distance(z.row(i), centers.row(c)));
  }
  return centers;
}

KMeansResult lloyd(const Matrix& z, Matrix centers, std::size_t max_iter, double tol) {
  if (max_iter == 0) throw ConfigError("lloyd: max_iter must be at least 1");
  if (centers.rows() == 0 || centers.cols() != z.cols())
    throw DimensionError("lloyd: centers do not match data");
  for (double v : centers.values())
    if (!std::isfinite(v)) throw NumericError("lloyd: non-finite initial center");

  const std::size_t n = z.rows(), k = centers.rows(), d = z.cols();
  KMeansResult result;
  std::vector<std::size_t> counts(k);

  for (std::size_t it = 0; it < max_iter; ++it) {
    auto assign = kernels::nearest_center(z, centers);
    double total = 0.0;
    for (double v : assign.distances) total += v;
    result.sse_history.push_back(total);

    std::fill(counts.begin(), counts.end(), 0);
    for (auto l : assign.labels) ++counts[l];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (assign.distances[i] > assign.distances[far]) far = i;
      --counts[assign.labels[far]];
      assign.labels[far] = j;
      assign.distances[far] = 0.0;
      counts[j] = 1;
    }

    Matrix updated(k, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = updated.row(assign.labels[i]);
      auto src = z.row(i);
      for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      auto row = updated.row(j);
      if (counts[j] == 0) {
        // n < k leaves a cluster empty; keep its center.
        std::copy(centers.row(j).begin(), centers.row(j).end(), row.begin());
        continue;
      }
      for (double& v : row) v /= static_cast<double>(counts[j]);
      shift = std::max(shift, std::sqrt(row_distance(row, centers.row(j))));
    }
    centers = std::move(updated);
    if (shift < tol) break;
    ++result.iterations;
  }

  auto final_assign = kernels::nearest_center(z, centers);
  result.labels = std::move(final_assign.labels);
  result.sse = 0.0;
  for (double v : final_assign.distances) result.sse += v;
  result.sse_history.push_back(result.sse);
  result.centers = std::move(centers);
  return result;
}

KMeansResult fit(const Matrix& z, std::size_t k, std::uint64_t seed, const KMeansConfig& config) {
  if (config.restarts == 0) throw ConfigError("kmeans: restarts must be at least 1");
  std::vector<KMeansResult> runs(config.restarts);
  const auto restarts = static_cast<std::int64_t>(config.restarts);
  for (std::int64_t r = 0; r < restarts; ++r) {
    auto init = kmeanspp_init(z, k, derive_seed(seed, static_cast<std::uint64_t>(r)));
    runs[r] = lloyd(z, std::move(init), config.max_iter, config.tol);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].sse < runs[best].sse) best = r;
  return std::move(runs[best]);
}

}  // namespace imvc::kmeans
