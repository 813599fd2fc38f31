#pragma once

// Dense double-precision kernels behind the ranker and the similarity code.
// Every routine has a scalar reference; AVX2+FMA (x86-64) and NEON (AArch64)
// variants are picked once at startup from what the CPU reports.
// CNTRL_KERNEL=scalar|avx2|neon in the environment forces a variant.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cntrl::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = W x, W row-major rows x cols
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
  // W += alpha * u v^T, u has rows entries, v has cols entries
  void (*ger)(double* w, std::size_t rows, std::size_t cols, double alpha, const double* u,
              const double* v);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

std::string_view isa_name(Isa isa);

// Variants compiled in and supported by this CPU. Always contains kScalar.
std::vector<Isa> available();

// Throws ConfigError if the variant is not available.
const KernelTable& table(Isa isa);

// The dispatched table, resolved on first use.
const KernelTable& active();

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y);
void ger(std::span<double> w, std::size_t rows, std::size_t cols, double alpha,
         std::span<const double> u, std::span<const double> v);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace cntrl::kernels
