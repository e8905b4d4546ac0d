// Backend selection and the composite helpers shared by both backends.

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "vdsp/kernels.hpp"

namespace vdsp::kernels {

#if defined(__x86_64__)
bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#endif

namespace {

struct Selected {
  const Ops* ops;
  std::string_view name;
};

Selected select_backend() {
  const char* env = std::getenv("VDSP_KERNELS");
  const std::string want = env ? env : "";
  if (want == "scalar") return {&scalar_ops(), "scalar"};
#if defined(__x86_64__)
  if (want == "avx2") {
    if (!cpu_has_avx2()) throw std::runtime_error("VDSP_KERNELS=avx2 but CPU lacks AVX2");
    return {&avx2_ops(), "avx2"};
  }
  if (want.empty() && cpu_has_avx2()) return {&avx2_ops(), "avx2"};
#endif
  if (!want.empty() && want != "scalar") {
    throw std::runtime_error("unknown VDSP_KERNELS backend: " + want);
  }
  return {&scalar_ops(), "scalar"};
}

const Selected& selected() {
  static const Selected s = select_backend();
  return s;
}

}  // namespace

const Ops& active() { return *selected().ops; }
std::string_view active_name() { return selected().name; }

double reduce_max(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("reduce_max: empty input");
  return active().reduce_max(x.data(), x.size());
}

double reduce_sum(std::span<const double> x) { return active().reduce_sum(x.data(), x.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  active().axpy(a, x.data(), y.data(), x.size());
}

void scale(std::span<double> x, double a) { active().scale(x.data(), x.size(), a); }

void masked_fill(std::span<double> x, std::span<const std::uint8_t> keep, double fill) {
  if (x.size() != keep.size()) throw std::invalid_argument("masked_fill: length mismatch");
  active().masked_fill(x.data(), keep.data(), x.size(), fill);
}

void softmax(std::span<const double> logits, std::span<double> out) {
  if (logits.size() != out.size()) throw std::invalid_argument("softmax: length mismatch");
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  const double m = reduce_max(logits);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = std::exp(logits[i] - m);
  const double s = reduce_sum(out);
  scale(out, 1.0 / s);
}

double logsumexp(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("logsumexp: empty input");
  const double m = reduce_max(logits);
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  return m + std::log(s);
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void l2_normalize(std::span<double> x) {
  const double nsq = dot(x, x);
  if (nsq <= 0.0) throw std::invalid_argument("l2_normalize: zero vector");
  scale(x, 1.0 / std::sqrt(nsq));
}

}  // namespace vdsp::kernels
