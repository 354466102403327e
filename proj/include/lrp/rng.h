#ifndef LRP_RNG_H_
#define LRP_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace lrp {

// SplitMix64 finalizer. Used to derive per-replica seeds so that replica r of
// an experiment can be regenerated without replaying replicas 0..r-1.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t master_seed,
                                   std::uint64_t stream) {
  return MixSeed(MixSeed(master_seed) ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

// Thin wrapper over mt19937_64. The real-valued draws are built directly from
// the engine bits (not std::*_distribution) so that samples are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextBits() { return engine_(); }

  // Uniform on the open interval (0,1): (k + 1/2) / 2^53.
  double Uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t UniformIndex(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool Bernoulli(double p) { return p >= 1.0 || (p > 0.0 && Uniform01() < p); }

  double Exponential(double rate) { return -std::log(Uniform01()) / rate; }

  // Pareto with scale 1: P(X > x) = x^{-tail_index} for x >= 1.
  double Pareto(double tail_index) {
    return std::pow(Uniform01(), -1.0 / tail_index);
  }

  // Number of failures before the first success of a Bernoulli(p) sequence.
  // Saturates at max_value.
  std::uint64_t GeometricFailures(double p, std::uint64_t max_value) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return max_value;
    const double g = std::floor(std::log(Uniform01()) / std::log1p(-p));
    if (!(g < static_cast<double>(max_value))) return max_value;
    return static_cast<std::uint64_t>(g);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lrp

#endif  // LRP_RNG_H_
