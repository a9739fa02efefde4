#include <atomic>
#include <cstdlib>
#include <string>

#include "qtopo/core.hpp"
#include "qtopo/kernels.hpp"

namespace qtopo::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("QTOPO_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw Error(std::string("instruction set not available: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> x, std::span<const double> y) {
  return active_isa() == Isa::avx2 ? avx2::dot(x, y) : scalar::dot(x, y);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_isa() == Isa::avx2 ? avx2::axpy(a, x, y) : scalar::axpy(a, x, y);
}

void xpay(std::span<const double> x, double a, std::span<double> y) {
  active_isa() == Isa::avx2 ? avx2::xpay(x, a, y) : scalar::xpay(x, a, y);
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  active_isa() == Isa::avx2 ? avx2::hadamard(x, y, out) : scalar::hadamard(x, y, out);
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  active_isa() == Isa::avx2 ? avx2::spmv(a, x, y) : scalar::spmv(a, x, y);
}

}  // namespace qtopo::kernels
