#include "absa/semeval.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "absa/error.hpp"

namespace absa {
namespace {

namespace pt = boost::property_tree;

std::size_t parse_offset(const std::string& s, const std::string& attr,
                         const std::string& sentence_id) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("sentence '" + sentence_id + "': attribute '" + attr +
                     "' is not a non-negative integer: '" + s + "'");
  }
  return v;
}

std::string required_attr(const pt::ptree& node, const char* name,
                          const std::string& sentence_id) {
  auto v = node.get_optional<std::string>(std::string("<xmlattr>.") + name);
  if (!v) {
    throw ParseError("sentence '" + sentence_id + "': aspectTerm missing required attribute '" +
                     name + "'");
  }
  return *v;
}

}  // namespace

std::size_t codepoint_to_byte(std::string_view text, std::size_t codepoint_offset) {
  std::size_t cp = 0;
  std::size_t i = 0;
  while (cp < codepoint_offset) {
    if (i >= text.size()) {
      throw InvalidArgument("offset " + std::to_string(codepoint_offset) +
                            " is past the end of the text");
    }
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    i += len;
    ++cp;
  }
  return std::min(i, text.size());
}

std::vector<RawSentence> parse_semeval(const std::string& xml_text) {
  pt::ptree tree;
  std::istringstream is(xml_text);
  try {
    pt::read_xml(is, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }
  auto root = tree.get_child_optional("sentences");
  if (!root) throw ParseError("malformed XML: missing <sentences> root element");

  std::vector<RawSentence> out;
  std::size_t ordinal = 0;
  for (const auto& [tag, node] : *root) {
    if (tag != "sentence") continue;
    RawSentence s;
    s.id = node.get<std::string>("<xmlattr>.id", "#" + std::to_string(ordinal));
    ++ordinal;
    auto text = node.get_optional<std::string>("text");
    if (!text) throw ParseError("sentence '" + s.id + "': missing <text> element");
    s.text = *text;
    if (auto terms = node.get_child_optional("aspectTerms")) {
      for (const auto& [ttag, term] : *terms) {
        if (ttag != "aspectTerm") continue;
        RawAspect a;
        a.term = required_attr(term, "term", s.id);
        a.polarity = required_attr(term, "polarity", s.id);
        const std::size_t from = parse_offset(required_attr(term, "from", s.id), "from", s.id);
        const std::size_t to = parse_offset(required_attr(term, "to", s.id), "to", s.id);
        if (a.polarity != "positive" && a.polarity != "negative" && a.polarity != "neutral" &&
            a.polarity != "conflict") {
          throw ParseError("sentence '" + s.id + "': unknown polarity '" + a.polarity + "'");
        }
        if (from >= to) {
          throw ParseError("sentence '" + s.id + "': aspect '" + a.term + "' has from >= to");
        }
        try {
          a.char_from = codepoint_to_byte(s.text, from);
          a.char_to = codepoint_to_byte(s.text, to);
        } catch (const InvalidArgument& e) {
          throw ParseError("sentence '" + s.id + "': aspect '" + a.term + "': " + e.what());
        }
        s.aspects.push_back(std::move(a));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RawSentence> read_semeval(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return parse_semeval(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

PolarityCounts count_polarities(const std::vector<RawSentence>& sentences) {
  PolarityCounts c;
  for (const auto& s : sentences) {
    for (const auto& a : s.aspects) {
      if (a.polarity == "positive") ++c.positive;
      else if (a.polarity == "negative") ++c.negative;
      else if (a.polarity == "neutral") ++c.neutral;
      else ++c.conflict;
    }
  }
  return c;
}

std::vector<AspectSpan> aspect_token_spans(const std::vector<Token>& tokens,
                                           const std::vector<RawAspect>& aspects) {
  std::vector<AspectSpan> spans;
  spans.reserve(aspects.size());
  for (const auto& a : aspects) {
    bool found = false;
    AspectSpan span;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const bool overlaps = tokens[i].char_start < a.char_to && a.char_from < tokens[i].char_end;
      if (!overlaps) continue;
      if (!found) span.start = i;
      span.end = i;
      found = true;
    }
    if (!found) {
      throw InvalidArgument("aspect '" + a.term + "' [" + std::to_string(a.char_from) + ", " +
                            std::to_string(a.char_to) + ") matches no token");
    }
    spans.push_back(span);
  }
  return spans;
}

BioSequence align_bio(const std::vector<Token>& tokens, const std::vector<RawAspect>& aspects) {
  const auto spans = aspect_token_spans(tokens, aspects);
  BioSequence labels(tokens.size(), BioLabel::kO);
  std::vector<int> owner(tokens.size(), -1);
  for (std::size_t k = 0; k < spans.size(); ++k) {
    for (std::size_t i = spans[k].start; i <= spans[k].end; ++i) {
      if (owner[i] >= 0) {
        throw InvalidArgument("aspects '" + aspects[static_cast<std::size_t>(owner[i])].term +
                              "' and '" + aspects[k].term + "' overlap at token " +
                              std::to_string(i));
      }
      owner[i] = static_cast<int>(k);
      labels[i] = i == spans[k].start ? BioLabel::kB : BioLabel::kI;
    }
  }
  return labels;
}

}  // namespace absa
