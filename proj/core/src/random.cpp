#include "absa/random.hpp"

#include <cmath>

#include "absa/error.hpp"

namespace absa {

Tensor sample_standard_normal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("sample_standard_normal: rows and cols must be >= 1");
  }
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor out({rows, cols});
  for (double& v : out.values()) v = dist(rng);
  return out;
}

Tensor sample_uniform(const Shape& shape, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor out(shape);
  for (double& v : out.values()) v = dist(rng);
  return out;
}

Tensor glorot_uniform(std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return sample_uniform({fan_out, fan_in}, -limit, limit, rng);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace absa
