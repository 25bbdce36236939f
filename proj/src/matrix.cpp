#include "gnan/matrix.hpp"

#include <cmath>
#include <string>

#include "gnan/error.hpp"

namespace gnan {

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n_cols = rows.empty() ? 0 : rows.front().size();
  DenseMatrix out(rows.size(), n_cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n_cols) throw InputError("ragged rows in matrix literal");
    for (std::size_t c = 0; c < n_cols; ++c) out(r, c) = rows[r][c];
  }
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

void DenseMatrix::fill(double value) {
  for (double& v : data_) v = value;
}

DenseMatrix normalize_rows(DenseMatrix matrix) {
  if (matrix.cols() == 0) return matrix;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    auto row = matrix.row(r);
    double sum = 0.0;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0)
        throw InputError("row " + std::to_string(r) + " has a negative or non-finite entry");
      sum += v;
    }
    if (!(sum > 0.0)) throw InputError("row " + std::to_string(r) + " sums to zero");
    for (double& v : row) v /= sum;
  }
  return matrix;
}

bool is_row_stochastic(const DenseMatrix& matrix, double tol_per_entry) {
  if (matrix.cols() == 0) return true;
  const double tol = tol_per_entry * static_cast<double>(matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double sum = 0.0;
    for (double v : matrix.row(r)) {
      if (!std::isfinite(v) || v < 0.0) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace gnan
