#include "absa/tokenizer.hpp"

#include <cctype>

#include "absa/error.hpp"

namespace absa {
namespace {

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_punct(c)) {
      out.push_back({std::string(1, static_cast<char>(c)), i, i + 1});
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::string word;
    while (i < n) {
      const auto d = static_cast<unsigned char>(text[i]);
      if (is_space(d) || is_punct(d)) break;
      word.push_back(d < 0x80 ? static_cast<char>(std::tolower(d)) : static_cast<char>(d));
      ++i;
    }
    out.push_back({std::move(word), start, i});
  }
  if (out.empty()) throw InvalidArgument("tokenize: empty or whitespace-only text");
  return out;
}

}  // namespace absa
