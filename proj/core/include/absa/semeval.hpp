#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "absa/crf.hpp"
#include "absa/tokenizer.hpp"
#include "absa/types.hpp"

namespace absa {

// One <aspectTerm>. Offsets are byte offsets into the sentence text; the
// parser converts the file's code-point offsets.
struct RawAspect {
  std::string term;
  std::string polarity;  // positive | negative | neutral | conflict
  std::size_t char_from = 0;
  std::size_t char_to = 0;
};

struct RawSentence {
  std::string id;
  std::string text;
  std::vector<RawAspect> aspects;
};

// Parses SemEval-2014 Task 4 XML (<sentences><sentence id><text/>
// <aspectTerms><aspectTerm term polarity from to/>...). Sentences without
// aspect terms are kept with an empty aspect list.
std::vector<RawSentence> parse_semeval(const std::string& xml_text);
std::vector<RawSentence> read_semeval(const std::filesystem::path& path);

struct PolarityCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;
  std::size_t conflict = 0;

  std::size_t labelled() const { return positive + negative + neutral; }
};

PolarityCounts count_polarities(const std::vector<RawSentence>& sentences);

// Token span of each aspect: the tokens whose byte range overlaps the
// aspect's. Throws when an aspect overlaps no token.
std::vector<AspectSpan> aspect_token_spans(const std::vector<Token>& tokens,
                                           const std::vector<RawAspect>& aspects);

// BIO labels from the overlap rule; throws when two aspects share a token.
BioSequence align_bio(const std::vector<Token>& tokens, const std::vector<RawAspect>& aspects);

// Converts a code-point offset into `text` (UTF-8) to a byte offset.
std::size_t codepoint_to_byte(std::string_view text, std::size_t codepoint_offset);

}  // namespace absa
