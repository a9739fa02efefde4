#include "qtopo/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "qtopo/core.hpp"

namespace qtopo {

CsrMatrix CsrMatrix::from_triplets(std::int32_t rows, std::int32_t cols, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (std::size_t i = 0; i < entries.size();) {
    const Triplet& t = entries[i];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) throw Error("triplet index out of range");
    double v = 0.0;
    std::size_t j = i;
    for (; j < entries.size() && entries[j].row == t.row && entries[j].col == t.col; ++j) v += entries[j].value;
    m.col_.push_back(t.col);
    m.val_.push_back(v);
    ++m.row_ptr_[t.row + 1];
    i = j;
  }
  for (std::int32_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const { kernels::spmv(view(), x, y); }

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(val_.size());
  for (std::int32_t r = 0; r < rows_; ++r)
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({col_[k], r, val_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_), 0.0);
  for (std::int32_t r = 0; r < static_cast<std::int32_t>(d.size()); ++r) d[r] = entry(r, r);
  return d;
}

double CsrMatrix::entry(std::int32_t r, std::int32_t c) const {
  const auto first = col_.begin() + row_ptr_[r];
  const auto last = col_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(first, last, c);
  return (it != last && *it == c) ? val_[it - col_.begin()] : 0.0;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw Error("sparse product shape mismatch");
  std::vector<Triplet> out;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<char> used(b.cols(), 0);
  std::vector<std::int32_t> touched;
  const auto arp = a.row_ptr(), acol = a.col_index();
  const auto brp = b.row_ptr(), bcol = b.col_index();
  const auto aval = a.values(), bval = b.values();
  for (std::int32_t r = 0; r < a.rows(); ++r) {
    touched.clear();
    for (std::int32_t k = arp[r]; k < arp[r + 1]; ++k) {
      const std::int32_t mid = acol[k];
      for (std::int32_t l = brp[mid]; l < brp[mid + 1]; ++l) {
        const std::int32_t c = bcol[l];
        if (!used[c]) {
          used[c] = 1;
          touched.push_back(c);
        }
        acc[c] += aval[k] * bval[l];
      }
    }
    for (std::int32_t c : touched) {
      out.push_back({r, c, acc[c]});
      acc[c] = 0.0;
      used[c] = 0;
    }
  }
  return CsrMatrix::from_triplets(a.rows(), b.cols(), std::move(out));
}

SolveStats conjugate_gradient(const LinearOperator& apply, std::span<const double> b, std::span<double> x,
                              std::span<const double> inverse_diagonal, double tolerance, int max_iterations) {
  const std::size_t n = b.size();
  SolveStats stats;
  const double bnorm = std::sqrt(kernels::dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  auto precondition = [&](std::span<const double> in, std::span<double> out) {
    if (inverse_diagonal.empty())
      std::copy(in.begin(), in.end(), out.begin());
    else
      kernels::hadamard(inverse_diagonal, in, out);
  };
  precondition(r, z);
  p = z;
  double rz = kernels::dot(r, z);
  double rnorm = std::sqrt(kernels::dot(r, r));
  for (int it = 0; it < max_iterations; ++it) {
    if (rnorm <= tolerance * bnorm) {
      stats.iterations = it;
      stats.relative_residual = rnorm / bnorm;
      stats.converged = true;
      return stats;
    }
    apply(p, ap);
    const double pap = kernels::dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, ap, r);
    precondition(r, z);
    const double rz_next = kernels::dot(r, z);
    kernels::xpay(z, rz_next / rz, p);
    rz = rz_next;
    rnorm = std::sqrt(kernels::dot(r, r));
    stats.iterations = it + 1;
  }
  stats.relative_residual = rnorm / bnorm;
  stats.converged = rnorm <= tolerance * bnorm;
  return stats;
}

}  // namespace qtopo
