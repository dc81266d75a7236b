#pragma once

// Data-parallel dense kernels. Every OpenMP kernel parallelizes over output
// rows only and keeps the per-element accumulation order of its serial twin,
// so results are bit-identical for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "imvc/matrix.hpp"

namespace imvc::kernels {

/// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
/// Per-column sums.
std::vector<double> column_sums(const Matrix& a);
/// out(i, j) = ||points_i - centers_j||^2
void squared_distances(const Matrix& points, const Matrix& centers, Matrix& out);

struct Assignment {
  std::vector<std::size_t> labels;
  std::vector<double> distances;  // squared distance to the chosen center
};

/// Nearest center per row; exact ties go to the lowest center index.
Assignment nearest_center(const Matrix& points, const Matrix& centers);

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
std::vector<double> column_sums(const Matrix& a);
void squared_distances(const Matrix& points, const Matrix& centers, Matrix& out);
Assignment nearest_center(const Matrix& points, const Matrix& centers);

}  // namespace serial

}  // namespace imvc::kernels
