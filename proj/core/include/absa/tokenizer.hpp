#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace absa {

struct Token {
  std::string text;        // lowercased surface form
  std::size_t char_start;  // byte offset into the original sentence
  std::size_t char_end;    // exclusive
};

// Lowercases ASCII letters, splits on whitespace, and emits every ASCII
// punctuation character as its own token. Offsets refer to the original
// text. Throws InvalidArgument on empty or whitespace-only input.
std::vector<Token> tokenize(std::string_view text);

}  // namespace absa
