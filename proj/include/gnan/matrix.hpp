#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gnan {

/// Dense row-major matrix of doubles. Rows are contiguous so kernels can take
/// them as spans.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transposed() const;
  void fill(double value);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Scale every row of `matrix` to sum to one. Throws InputError on a row with
/// a non-positive sum or a negative or non-finite entry. Rows of a matrix with
/// zero columns are left alone.
DenseMatrix normalize_rows(DenseMatrix matrix);

/// True when every row sums to one within `tol_per_entry * cols` and every
/// entry is finite and non-negative.
bool is_row_stochastic(const DenseMatrix& matrix, double tol_per_entry = 1e-12);

}  // namespace gnan
