#pragma once

#include <cstddef>

namespace cntrl::kernels::scalar {
double dot(const double* a, const double* b, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
void ger(double* w, std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace cntrl::kernels::scalar

#if defined(CNTRL_HAVE_AVX2)
namespace cntrl::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
void ger(double* w, std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace cntrl::kernels::avx2
#endif

#if defined(CNTRL_HAVE_NEON)
namespace cntrl::kernels::neon {
double dot(const double* a, const double* b, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
void ger(double* w, std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace cntrl::kernels::neon
#endif
