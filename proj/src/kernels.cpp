#include "imvc/kernels.hpp"

#include <cstdint>
#include <limits>
#include <string>

namespace imvc {

Matrix hconcat(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t n = blocks.front().rows();
  std::size_t total = 0;
  for (std::size_t v = 0; v < blocks.size(); ++v) {
    if (blocks[v].rows() != n) {
      throw DimensionError("block " + std::to_string(v) + " has " +
                           std::to_string(blocks[v].rows()) + " rows, block 0 has " +
                           std::to_string(n));
    }
    total += blocks[v].cols();
  }
  Matrix out(n, total);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.row(i).begin();
    for (const auto& b : blocks) dst = std::copy(b.row(i).begin(), b.row(i).end(), dst);
  }
  return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

namespace kernels {
namespace {

void check_matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
}

void check_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_at_b: row counts differ");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out = Matrix(a.cols(), b.cols());
}

void check_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_a_bt: column counts differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix(a.rows(), b.rows());
}

void check_distances(const Matrix& points, const Matrix& centers, Matrix& out) {
  if (points.cols() != centers.cols()) throw DimensionError("squared_distances: dims differ");
  if (out.rows() != points.rows() || out.cols() != centers.rows())
    out = Matrix(points.rows(), centers.rows());
}

inline double row_sq_distance(const double* x, const double* c, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = x[k] - c[k];
    s += t * t;
  }
  return s;
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a, b, out);
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols(), m = b.cols();
  const double* bp = b.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double* o = out.data() + i * m;
    const double* ar = a.data() + i * inner;
    for (std::size_t j = 0; j < m; ++j) o[j] = 0.0;
    for (std::size_t p = 0; p < inner; ++p) {
      const double av = ar[p];
      const double* br = bp + p * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check_at_b(a, b, out);
  const auto in = static_cast<std::int64_t>(a.cols());
  const std::size_t n = a.rows(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < in; ++i) {
    double* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) o[j] = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double av = a(r, static_cast<std::size_t>(i));
      const double* br = b.data() + r * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_a_bt(a, b, out);
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t d = a.cols(), m = b.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ar = a.data() + i * d;
    double* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.data() + j * d;
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) s += ar[p] * br[p];
      o[j] = s;
    }
  }
}

std::vector<double> column_sums(const Matrix& a) {
  std::vector<double> out(a.cols(), 0.0);
  const auto m = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, static_cast<std::size_t>(j));
    out[j] = s;
  }
  return out;
}

void squared_distances(const Matrix& points, const Matrix& centers, Matrix& out) {
  check_distances(points, centers, out);
  const auto n = static_cast<std::int64_t>(points.rows());
  const std::size_t k = centers.rows(), d = points.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      out(i, j) = row_sq_distance(points.data() + i * d, centers.data() + j * d, d);
  }
}

Assignment nearest_center(const Matrix& points, const Matrix& centers) {
  if (points.cols() != centers.cols()) throw DimensionError("nearest_center: dims differ");
  if (centers.rows() == 0) throw ConfigError("nearest_center: no centers");
  Assignment out{std::vector<std::size_t>(points.rows()), std::vector<double>(points.rows())};
  const auto n = static_cast<std::int64_t>(points.rows());
  const std::size_t k = centers.rows(), d = points.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double dist = row_sq_distance(points.data() + i * d, centers.data() + j * d, d);
      if (dist < best) {
        best = dist;
        arg = j;
      }
    }
    out.labels[i] = arg;
    out.distances[i] = best;
  }
  return out;
}

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a, b, out);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      out(i, j) = s;
    }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check_at_b(a, b, out);
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b(r, j);
      out(i, j) = s;
    }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_a_bt(a, b, out);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
      out(i, j) = s;
    }
}

std::vector<double> column_sums(const Matrix& a) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t r = 0; r < a.rows(); ++r) out[j] += a(r, j);
  return out;
}

void squared_distances(const Matrix& points, const Matrix& centers, Matrix& out) {
  check_distances(points, centers, out);
  for (std::size_t i = 0; i < points.rows(); ++i)
    for (std::size_t j = 0; j < centers.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < points.cols(); ++p) {
        const double t = points(i, p) - centers(j, p);
        s += t * t;
      }
      out(i, j) = s;
    }
}

Assignment nearest_center(const Matrix& points, const Matrix& centers) {
  if (points.cols() != centers.cols()) throw DimensionError("nearest_center: dims differ");
  if (centers.rows() == 0) throw ConfigError("nearest_center: no centers");
  Matrix dist;
  squared_distances(points, centers, dist);
  Assignment out;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < centers.rows(); ++j)
      if (dist(i, j) < dist(i, arg)) arg = j;
    out.labels.push_back(arg);
    out.distances.push_back(dist(i, arg));
  }
  return out;
}

}  // namespace serial
}  // namespace kernels
}  // namespace imvc
