#include "corpora.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#ifndef ABSA_FIXTURE_DIR
#error "ABSA_FIXTURE_DIR must be defined"
#endif

namespace absa::test {

namespace fs = std::filesystem;

fs::path fixture_path(const std::string& name) { return fs::path(ABSA_FIXTURE_DIR) / name; }

namespace {

std::size_t codepoints(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

const std::vector<std::string>& terms_for(Domain d) {
  static const std::vector<std::string> laptop{
      "battery life", "screen", "keyboard", "trackpad", "windows 8", "price", "hard drive",
      "speakers", "fan", "support", "charger", "touchpad", "graphics card", "display"};
  static const std::vector<std::string> restaurant{
      "food", "service", "staff", "menu", "wine list", "café", "pizza", "dessert", "ambience",
      "prices", "sushi", "waiter", "decor", "brunch"};
  return d == Domain::kLaptop ? laptop : restaurant;
}

const std::vector<std::string>& adjectives(Polarity p) {
  static const std::vector<std::string> pos{"great", "excellent", "good", "lovely"};
  static const std::vector<std::string> neg{"bad", "awful", "slow", "terrible"};
  static const std::vector<std::string> neu{"okay", "average", "standard", "usual"};
  switch (p) {
    case Polarity::kPositive: return pos;
    case Polarity::kNegative: return neg;
    case Polarity::kNeutral: return neu;
  }
  return pos;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Clause {
  std::string term;
  std::string polarity;
  std::string adjective;
};

// Builds "The t1 is a1 and the t2 is a2." with code-point offsets.
void emit_sentence(std::ostringstream& os, const std::string& id, const std::vector<Clause>& clauses) {
  std::string text;
  struct Span {
    std::size_t from, to;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    text += i == 0 ? "The " : (i + 1 == clauses.size() ? " and the " : ", the ");
    const std::size_t from = codepoints(text);
    text += clauses[i].term;
    spans.push_back({from, codepoints(text)});
    text += " is " + clauses[i].adjective;
  }
  text += clauses.empty() ? "Nothing to report." : (clauses.size() % 2 ? "." : "!");
  os << "  <sentence id=\"" << id << "\">\n    <text>" << xml_escape(text) << "</text>\n";
  if (!clauses.empty()) {
    os << "    <aspectTerms>\n";
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      os << "      <aspectTerm term=\"" << xml_escape(clauses[i].term) << "\" polarity=\""
         << clauses[i].polarity << "\" from=\"" << spans[i].from << "\" to=\"" << spans[i].to
         << "\"/>\n";
    }
    os << "    </aspectTerms>\n";
  }
  os << "  </sentence>\n";
}

}  // namespace

std::string synthetic_semeval_xml(const SplitCounts& counts, Domain domain,
                                  const SyntheticOptions& opts) {
  if (counts.sa + counts.ma != counts.total() || counts.ma == 1) {
    throw std::invalid_argument("synthetic_semeval_xml: inconsistent SA/MA counts");
  }
  std::mt19937_64 rng(opts.seed);
  std::vector<Polarity> labels;
  labels.insert(labels.end(), counts.positive, Polarity::kPositive);
  labels.insert(labels.end(), counts.negative, Polarity::kNegative);
  labels.insert(labels.end(), counts.neutral, Polarity::kNeutral);
  std::shuffle(labels.begin(), labels.end(), rng);

  const auto& terms = terms_for(domain);
  auto pick = [&rng](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  auto clause_for = [&](Polarity p) {
    return Clause{pick(terms), std::string(polarity_name(p)), pick(adjectives(p))};
  };

  std::vector<std::vector<Clause>> sentences;
  std::size_t next = 0;
  for (std::size_t i = 0; i < counts.sa; ++i) sentences.push_back({clause_for(labels[next++])});
  std::size_t ma_left = counts.ma;
  while (ma_left > 0) {
    const std::size_t k = ma_left == 3 ? 3 : 2;
    std::vector<Clause> c;
    for (std::size_t j = 0; j < k; ++j) c.push_back(clause_for(labels[next++]));
    sentences.push_back(std::move(c));
    ma_left -= k;
  }
  // Conflict aspects ride along on single-aspect sentences and leave the
  // SA/MA split untouched once dropped.
  for (std::size_t i = 0; i < opts.conflict_aspects && i < counts.sa; ++i) {
    sentences[i].push_back({pick(terms), "conflict", "mixed"});
  }
  for (std::size_t i = 0; i < opts.aspectless_sentences; ++i) sentences.push_back({});
  std::shuffle(sentences.begin(), sentences.end(), rng);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<sentences>\n";
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    emit_sentence(os, std::string(domain_name(domain)) + "-" + std::to_string(1000 + i), sentences[i]);
  }
  os << "</sentences>\n";
  return os.str();
}

fs::path write_synthetic(const fs::path& dir, const std::string& name, const SplitCounts& counts,
                         Domain domain, const SyntheticOptions& opts) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << synthetic_semeval_xml(counts, domain, opts);
  return p;
}

namespace {

RawSentence make_sentence(const std::string& id, const std::vector<std::string>& words,
                          const std::vector<std::pair<std::size_t, std::string>>& aspects_at) {
  // aspects_at: (word index, polarity); aspect words may contain a space.
  RawSentence s;
  s.id = id;
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s.text += ' ';
    starts.push_back(s.text.size());
    s.text += words[i];
  }
  for (const auto& [idx, pol] : aspects_at) {
    s.aspects.push_back({words[idx], pol, starts[idx], starts[idx] + words[idx].size()});
  }
  return s;
}

}  // namespace

std::vector<RawSentence> overfit_ae_corpus() {
  std::vector<RawSentence> out;
  out.push_back(make_sentence("ae-0", {"the", "screen", "is", "bright"}, {{1, "positive"}}));
  out.push_back(make_sentence("ae-1", {"i", "like", "the", "battery life", "a", "lot"}, {{3, "positive"}}));
  out.push_back(make_sentence("ae-2", {"the", "keyboard", "and", "the", "screen", "are", "fine"},
                              {{1, "neutral"}, {4, "neutral"}}));
  out.push_back(make_sentence("ae-3", {"it", "arrived", "on", "time"}, {}));
  out.push_back(make_sentence("ae-4", {"battery life", "is", "short"}, {{0, "negative"}}));
  out.push_back(make_sentence("ae-5", {"nice", "keyboard"}, {{1, "positive"}}));
  out.push_back(make_sentence("ae-6", {"the", "hard drive", "failed", "today"}, {{1, "negative"}}));
  out.push_back(make_sentence("ae-7", {"my", "hard drive", "and", "battery life", "died"},
                              {{1, "negative"}, {3, "negative"}}));
  out.push_back(make_sentence("ae-8", {"what", "a", "day", "it", "was"}, {}));
  out.push_back(make_sentence("ae-9", {"screen"}, {{0, "neutral"}}));
  return out;
}

std::vector<RawSentence> overfit_alsa_corpus() {
  const std::vector<std::string> aspects{"screen", "keyboard", "battery", "price", "fan"};
  const std::vector<std::pair<std::string, std::string>> opinions{
      {"great", "positive"}, {"awful", "negative"}, {"okay", "neutral"}, {"superb", "positive"},
      {"broken", "negative"}};
  std::vector<RawSentence> out;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& [adj, pol] = opinions[(i * 3 + i / 5) % opinions.size()];
    const std::string& aspect = aspects[i % aspects.size()];
    if (i % 4 == 3) {
      out.push_back(make_sentence("alsa-" + std::to_string(i), {"honestly", adj, aspect, "overall"},
                                  {{2, pol}}));
    } else {
      out.push_back(make_sentence("alsa-" + std::to_string(i), {"the", aspect, "was", adj},
                                  {{1, pol}}));
    }
  }
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("absa-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace absa::test
