#pragma once
// Array kernels behind the policy and metric math. Scalar reference
// implementations always exist; on x86-64 an AVX2 variant is picked at
// startup when the CPU supports it. Override with VDSP_KERNELS=scalar|avx2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace vdsp::kernels {

// Data-parallel primitives provided per backend.
struct Ops {
  double (*reduce_max)(const double* x, std::size_t n);
  double (*reduce_sum)(const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double* x, std::size_t n, double a);
  // keep[i] == 0 -> x[i] = fill
  void (*masked_fill)(double* x, const std::uint8_t* keep, std::size_t n, double fill);
};

const Ops& scalar_ops();

#if defined(__x86_64__)
bool cpu_has_avx2();
const Ops& avx2_ops();  // only call when cpu_has_avx2()
#endif

const Ops& active();
std::string_view active_name();

// Wrappers over the active backend.
double reduce_max(std::span<const double> x);
double reduce_sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double a);
void masked_fill(std::span<double> x, std::span<const std::uint8_t> keep, double fill);

// Composites (exp/log stay scalar, reductions use the active backend).
void softmax(std::span<const double> logits, std::span<double> out);
double logsumexp(std::span<const double> logits);
double entropy(std::span<const double> p);  // -sum p ln p, 0 ln 0 := 0
void l2_normalize(std::span<double> x);     // throws std::invalid_argument on zero vector

}  // namespace vdsp::kernels
