#pragma once
// Seeded RNG streams. A stream is identified by a 64-bit tag mixed from the
// master seed plus structured indices (iteration, phase, batch, ...), so every
// draw in a run is a pure function of the run configuration.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>

namespace vdsp {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mix a master seed with a path of indices into a stream tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t v : path) h = splitmix64(h ^ v);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed_tag) : tag_(seed_tag), gen_(splitmix64(seed_tag)) {}

  std::uint64_t seed_tag() const { return tag_; }

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased integer in [0, n)
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n == 0");
    const std::uint64_t nn = n;
    const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % nn + 1) % nn;
    std::uint64_t x = next_u64();
    while (x > bound) x = next_u64();
    return static_cast<std::size_t>(x % nn);
  }

  // Sample from a probability vector; never returns a zero-probability index.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_positive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    if (last_positive == probs.size()) throw std::invalid_argument("categorical: no positive mass");
    return last_positive;  // u fell into rounding slack at the top
  }

 private:
  std::uint64_t tag_;
  std::mt19937_64 gen_;
};

}  // namespace vdsp
