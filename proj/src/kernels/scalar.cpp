#include "kernels_impl.hpp"

namespace cntrl::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(w + r * cols, x, cols);
}

void ger(double* w, std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy(cols, alpha * u[r], v, w + r * cols);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace cntrl::kernels::scalar
