#pragma once

// Dense double-precision vector kernels used by the classifier and the
// gradient scores. Every kernel has a scalar reference implementation; wider
// variants (AVX2+FMA on x86-64, NEON on aarch64) are compiled separately and
// picked once at startup from what the CPU reports.
//
// Element-wise kernels are bit-identical across variants. Reductions (dot,
// squared distance) differ only in summation order.
//
// Set DRIFTSEL_ISA=scalar|avx2|neon in the environment to force a variant.

#include <cstddef>
#include <string_view>

namespace driftsel::kernels {

enum class Isa { scalar, avx2, neon };

struct AdamCoefficients {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x = max(x, 0)
  void (*relu)(double* x, std::size_t n);
  // grad[i] = 0 where activation[i] <= 0
  void (*relu_backward)(const double* activation, double* grad, std::size_t n);
  // One Adam update over a flat parameter block; m and v are updated in place.
  void (*adam_update)(double* param, const double* grad, double* m, double* v, std::size_t n,
                      const AdamCoefficients& k);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa);

// The table chosen for this process.
const KernelTable& active();

std::string_view isa_name(Isa isa);

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace driftsel::kernels
