#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absa/tensor.hpp"
#include "absa/tokenizer.hpp"

namespace absa {

// Token -> dense id -> embedding row. Id 0 is UNK.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  // `tokens[i]` names row i of `matrix`; tokens[0] must be the UNK token.
  Vocabulary(std::vector<std::string> tokens, Tensor matrix);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t dim() const { return matrix_.cols(); }
  const Tensor& matrix() const noexcept { return matrix_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool contains(std::string_view token) const;
  std::size_t id(std::string_view token) const;
  std::vector<std::size_t> ids(const std::vector<Token>& tokens) const;
  std::vector<std::size_t> ids(const std::vector<std::string>& tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.matrix_ == b.matrix_;
  }

 private:
  std::vector<std::string> tokens_;
  Tensor matrix_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct EmbeddingOptions {
  std::size_t expected_dim = 300;
  std::uint64_t unk_seed = 20140823;
  double unk_range = 0.25;
};

// Reads whitespace-separated "token v1 ... vd" lines and keeps the rows of
// requested tokens (lowercased before lookup). Requested tokens absent from
// the file map to UNK, whose row is U(-unk_range, unk_range) from unk_seed.
Vocabulary load_embeddings(std::istream& in, const std::vector<std::string>& vocabulary_tokens,
                           const EmbeddingOptions& opts = {});
Vocabulary load_embeddings(const std::filesystem::path& path,
                           const std::vector<std::string>& vocabulary_tokens,
                           const EmbeddingOptions& opts = {});

// Vocabulary whose rows are U(-range, range), each seeded from the token text
// and `seed`, so a token gets the same vector in every vocabulary built with
// the same seed. Used for synthetic corpora and when no pretrained file is
// available.
Vocabulary random_vocabulary(const std::vector<std::string>& tokens, std::size_t dim,
                             std::uint64_t seed, double range = 0.25);

}  // namespace absa
