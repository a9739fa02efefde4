#pragma once

// Data-parallel inner loops used by the sparse solvers and the quadrature
// reductions. Each kernel has a scalar reference implementation and an AVX2
// variant; the variant is chosen once at runtime from CPU support and can be
// pinned with QTOPO_ISA=scalar|avx2 or set_isa().

#include <cstdint>
#include <span>

namespace qtopo::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
/// Overrides the dispatch. Throws if the ISA is not available on this CPU.
void set_isa(Isa isa);

/// Compressed sparse row view; indices are 32-bit.
struct CsrView {
  std::int32_t rows = 0;
  std::span<const std::int32_t> row_ptr;
  std::span<const std::int32_t> col;
  std::span<const double> val;
};

double dot(std::span<const double> x, std::span<const double> y);
/// y += a·x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y = x + a·y
void xpay(std::span<const double> x, double a, std::span<double> y);
/// out = x ⊙ y
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);
/// y = A x
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double a, std::span<double> y);
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
}  // namespace scalar

namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double a, std::span<double> y);
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
}  // namespace avx2

}  // namespace qtopo::kernels
