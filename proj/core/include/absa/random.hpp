#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "absa/tensor.hpp"

namespace absa {

using Rng = std::mt19937_64;

// rows x cols i.i.d. N(0, 1), deterministic in `seed`.
Tensor sample_standard_normal(std::size_t rows, std::size_t cols, std::uint64_t seed);

Tensor sample_uniform(const Shape& shape, double lo, double hi, Rng& rng);

// Glorot/Xavier uniform: U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) for a
// fan_out x fan_in matrix.
Tensor glorot_uniform(std::size_t fan_out, std::size_t fan_in, Rng& rng);

// Stable 64-bit FNV-1a, used to derive per-sentence seeds from string ids.
std::uint64_t fnv1a(std::string_view s);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace absa
