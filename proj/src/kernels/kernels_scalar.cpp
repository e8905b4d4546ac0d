// Scalar reference kernels. The AVX2 backend is equivalence-tested against
// these, so keep them simple and obviously correct.

#include "vdsp/kernels.hpp"

namespace vdsp::kernels {
namespace {

double reduce_max_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

double reduce_sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, std::size_t n, double a) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void masked_fill_scalar(double* x, const std::uint8_t* keep, std::size_t n, double fill) {
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i] == 0) x[i] = fill;
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{reduce_max_scalar, reduce_sum_scalar, dot_scalar,
                       axpy_scalar,       scale_scalar,      masked_fill_scalar};
  return ops;
}

}  // namespace vdsp::kernels
