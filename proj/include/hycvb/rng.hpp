#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hycvb {

/// Seeded generator used by every engine. Uniform and bounded-integer draws
/// are implemented here rather than through <random> distributions so the
/// draw streams do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double gamma(double shape);

  /// Dirichlet(concentration * 1) sample of the given dimension.
  std::vector<double> dirichlet(std::size_t dim, double concentration);
  std::vector<double> dirichlet(std::span<const double> concentration);

  /// Index drawn from unnormalized nonnegative weights with one uniform draw.
  std::size_t categorical(std::span<const double> weights);

  /// Counts of n categorical draws from a probability vector.
  std::vector<std::uint32_t> multinomial(std::span<const double> probs, std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hycvb
