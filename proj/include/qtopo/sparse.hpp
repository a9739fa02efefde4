#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qtopo/kernels.hpp"

namespace qtopo {

struct Triplet {
  std::int32_t row;
  std::int32_t col;
  double value;
};

class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Duplicate entries are summed; entries are ordered by (row, col).
  static CsrMatrix from_triplets(std::int32_t rows, std::int32_t cols, std::vector<Triplet> entries);

  std::int32_t rows() const { return rows_; }
  std::int32_t cols() const { return cols_; }
  std::size_t nonzeros() const { return val_.size(); }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;

  CsrMatrix transpose() const;
  std::vector<double> diagonal() const;
  double entry(std::int32_t r, std::int32_t c) const;
  kernels::CsrView view() const { return {rows_, row_ptr_, col_, val_}; }

  std::span<const std::int32_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> col_index() const { return col_; }
  std::span<const double> values() const { return val_; }

 private:
  std::int32_t rows_ = 0;
  std::int32_t cols_ = 0;
  std::vector<std::int32_t> row_ptr_{0};
  std::vector<std::int32_t> col_;
  std::vector<double> val_;
};

/// C = A B
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients for an SPD operator. x holds the initial
/// guess on entry. inverse_diagonal may be empty (no preconditioning).
SolveStats conjugate_gradient(const LinearOperator& apply, std::span<const double> b, std::span<double> x,
                              std::span<const double> inverse_diagonal, double tolerance, int max_iterations);

}  // namespace qtopo
