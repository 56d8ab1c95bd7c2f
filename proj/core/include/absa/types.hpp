#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace absa {

// Class order matches the classifier output order.
enum class Polarity : std::uint8_t { kPositive = 0, kNegative = 1, kNeutral = 2 };
inline constexpr std::size_t kNumPolarities = 3;

std::string_view polarity_name(Polarity p);
// "positive" | "negative" | "neutral"; throws InvalidArgument otherwise.
Polarity parse_polarity(std::string_view s);

enum class Domain : std::uint8_t { kLaptop, kRestaurant };

std::string_view domain_name(Domain d);
Domain parse_domain(std::string_view s);

// Inclusive token range [start, end] of an aspect term.
struct AspectSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start + 1; }
  friend bool operator==(const AspectSpan&, const AspectSpan&) = default;
  friend auto operator<=>(const AspectSpan&, const AspectSpan&) = default;
};

}  // namespace absa
