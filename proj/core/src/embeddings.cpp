#include "absa/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "absa/error.hpp"
#include "absa/random.hpp"

namespace absa {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(c));
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view s, std::size_t line_no) {
  // std::from_chars for double is unavailable on older libstdc++.
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) {
    throw ParseError("embeddings: line " + std::to_string(line_no) + ": bad number '" + buf + "'");
  }
  return v;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, Tensor matrix)
    : tokens_(std::move(tokens)), matrix_(std::move(matrix)) {
  if (matrix_.rank() != 2 || matrix_.rows() != tokens_.size()) {
    throw ShapeError("Vocabulary: " + std::to_string(tokens_.size()) + " tokens vs matrix " +
                     shape_string(matrix_.shape()));
  }
  if (tokens_.empty() || tokens_[0] != kUnkToken) {
    throw InvalidArgument("Vocabulary: token 0 must be " + std::string(kUnkToken));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw InvalidArgument("Vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::ids(const std::vector<Token>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t.text));
  return out;
}

std::vector<std::size_t> Vocabulary::ids(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Vocabulary load_embeddings(std::istream& in, const std::vector<std::string>& vocabulary_tokens,
                           const EmbeddingOptions& opts) {
  std::unordered_set<std::string> wanted;
  for (const auto& t : vocabulary_tokens) wanted.insert(lower(t));

  const std::size_t d = opts.expected_dim;
  std::vector<std::string> tokens{std::string(Vocabulary::kUnkToken)};
  std::vector<double> rows;
  Rng rng(opts.unk_seed);
  {
    Tensor unk = sample_uniform({d}, -opts.unk_range, opts.unk_range, rng);
    rows.assign(unk.values().begin(), unk.values().end());
  }

  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != d + 1) {
      if (line_no == 1) {
        throw ParseError("embeddings: dimension mismatch, file has " +
                         std::to_string(fields.size() - 1) + " values per row, expected " +
                         std::to_string(d));
      }
      throw ParseError("embeddings: line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(d + 1));
    }
    std::string token = lower(fields[0]);
    if (!wanted.count(token) || seen.count(token) || token == Vocabulary::kUnkToken) continue;
    for (std::size_t j = 1; j <= d; ++j) rows.push_back(parse_real(fields[j], line_no));
    seen.insert(token);
    tokens.push_back(std::move(token));
  }
  const std::size_t n = tokens.size();
  return Vocabulary(std::move(tokens), Tensor({n, d}, std::move(rows)));
}

Vocabulary load_embeddings(const std::filesystem::path& path,
                           const std::vector<std::string>& vocabulary_tokens,
                           const EmbeddingOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file '" + path.string() + "'");
  try {
    return load_embeddings(in, vocabulary_tokens, opts);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Vocabulary random_vocabulary(const std::vector<std::string>& tokens, std::size_t dim,
                             std::uint64_t seed, double range) {
  std::vector<std::string> all{std::string(Vocabulary::kUnkToken)};
  std::unordered_set<std::string> seen{all[0]};
  for (const auto& t : tokens) {
    if (seen.insert(t).second) all.push_back(t);
  }
  // Each row depends only on (token, seed), never on vocabulary order.
  Tensor m({all.size(), dim});
  for (std::size_t i = 0; i < all.size(); ++i) {
    Rng rng(mix_seed(fnv1a(all[i]), seed));
    std::uniform_real_distribution<double> dist(-range, range);
    for (double& v : m.row(i)) v = dist(rng);
  }
  return Vocabulary(std::move(all), std::move(m));
}

}  // namespace absa
