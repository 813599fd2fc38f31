#include <cstdlib>
#include <string>

#include "cntrl/error.hpp"
#include "cntrl/kernels.hpp"
#include "kernels_impl.hpp"

namespace cntrl::kernels {
namespace {

constexpr KernelTable kScalarTable{Isa::kScalar, scalar::dot, scalar::gemv, scalar::ger, scalar::axpy};
#if defined(CNTRL_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::kAvx2, avx2::dot, avx2::gemv, avx2::ger, avx2::axpy};
#endif
#if defined(CNTRL_HAVE_NEON)
constexpr KernelTable kNeonTable{Isa::kNeon, neon::dot, neon::gemv, neon::ger, neon::axpy};
#endif

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(CNTRL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(CNTRL_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& resolve() {
  if (const char* forced = std::getenv("CNTRL_KERNEL")) {
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (isa_name(isa) == forced) return table(isa);
    }
    throw ConfigError(std::string("CNTRL_KERNEL: unknown kernel variant '") + forced + "'");
  }
  if (supported(Isa::kAvx2)) return table(Isa::kAvx2);
  if (supported(Isa::kNeon)) return table(Isa::kNeon);
  return kScalarTable;
}

void require(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (supported(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw ConfigError("kernel variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  switch (isa) {
#if defined(CNTRL_HAVE_AVX2)
    case Isa::kAvx2:
      return kAvx2Table;
#endif
#if defined(CNTRL_HAVE_NEON)
    case Isa::kNeon:
      return kNeonTable;
#endif
    default:
      return kScalarTable;
  }
}

const KernelTable& active() {
  static const KernelTable& t = resolve();
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) { return active().dot(a.data(), a.data(), a.size()); }

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y) {
  require(w.size() == rows * cols && x.size() == cols && y.size() == rows, "gemv: shape mismatch");
  active().gemv(w.data(), rows, cols, x.data(), y.data());
}

void ger(std::span<double> w, std::size_t rows, std::size_t cols, double alpha,
         std::span<const double> u, std::span<const double> v) {
  require(w.size() == rows * cols && u.size() == rows && v.size() == cols, "ger: shape mismatch");
  active().ger(w.data(), rows, cols, alpha, u.data(), v.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  active().axpy(x.size(), alpha, x.data(), y.data());
}

}  // namespace cntrl::kernels
