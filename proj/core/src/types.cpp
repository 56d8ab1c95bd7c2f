#include "absa/types.hpp"

#include "absa/error.hpp"

namespace absa {

std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "positive";
    case Polarity::kNegative: return "negative";
    case Polarity::kNeutral: return "neutral";
  }
  return "?";
}

Polarity parse_polarity(std::string_view s) {
  if (s == "positive") return Polarity::kPositive;
  if (s == "negative") return Polarity::kNegative;
  if (s == "neutral") return Polarity::kNeutral;
  throw InvalidArgument("unknown polarity '" + std::string(s) + "'");
}

std::string_view domain_name(Domain d) {
  return d == Domain::kLaptop ? "laptop" : "restaurant";
}

Domain parse_domain(std::string_view s) {
  if (s == "laptop" || s == "laptops") return Domain::kLaptop;
  if (s == "restaurant" || s == "restaurants") return Domain::kRestaurant;
  throw InvalidArgument("unknown domain '" + std::string(s) + "' (expected laptop|restaurant)");
}

}  // namespace absa
