#include "absa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>
#include <unordered_map>
#include <unordered_set>

#include "absa/error.hpp"
#include "absa/random.hpp"

namespace absa {

using nlohmann::json;

namespace {

void derive_samples(Dataset& ds) {
  ds.samples.clear();
  for (std::size_t i = 0; i < ds.sentences.size(); ++i) {
    const auto& s = ds.sentences[i];
    for (const auto& a : s.aspects) {
      if (a.polarity == "conflict") continue;
      ds.samples.push_back({i, s.id, a.span, parse_polarity(a.polarity), ds.domain});
    }
  }
}

}  // namespace

Dataset build_dataset(const std::vector<RawSentence>& raw, Domain domain) {
  Dataset ds;
  ds.domain = domain;
  ds.sentences.reserve(raw.size());
  for (const auto& r : raw) {
    SentenceRecord s;
    s.id = r.id;
    s.text = r.text;
    s.domain = domain;
    try {
      s.tokens = tokenize(r.text);
      s.bio = align_bio(s.tokens, r.aspects);
      const auto spans = aspect_token_spans(s.tokens, r.aspects);
      for (std::size_t k = 0; k < r.aspects.size(); ++k) {
        const auto& a = r.aspects[k];
        s.aspects.push_back({a.term, a.polarity, a.char_from, a.char_to, spans[k]});
      }
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("sentence '" + r.id + "': " + e.what());
    }
    ds.sentences.push_back(std::move(s));
  }
  derive_samples(ds);
  return ds;
}

Dataset load_semeval_dataset(const std::filesystem::path& xml_path, Domain domain) {
  return build_dataset(read_semeval(xml_path), domain);
}

std::vector<std::string> collect_tokens(const std::vector<const Dataset*>& datasets) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const Dataset* ds : datasets) {
    for (const auto& s : ds->sentences) {
      for (const auto& t : s.tokens) {
        if (seen.insert(t.text).second) out.push_back(t.text);
      }
    }
  }
  return out;
}

void assign_ids(Dataset& dataset, const Vocabulary& vocab) {
  for (auto& s : dataset.sentences) s.token_ids = vocab.ids(s.tokens);
}

std::pair<std::vector<AlsaSample>, std::vector<AlsaSample>> split_sa_ma(
    const std::vector<AlsaSample>& samples) {
  std::unordered_map<std::string, std::size_t> per_sentence;
  for (const auto& s : samples) ++per_sentence[s.sentence_id];
  std::vector<AlsaSample> sa, ma;
  for (const auto& s : samples) (per_sentence[s.sentence_id] > 1 ? ma : sa).push_back(s);
  return {std::move(sa), std::move(ma)};
}

void write_dataset_cache(std::ostream& os, const Dataset& dataset) {
  for (const auto& s : dataset.sentences) {
    json j;
    j["id"] = s.id;
    j["domain"] = domain_name(s.domain);
    j["text"] = s.text;
    json toks = json::array();
    for (const auto& t : s.tokens) toks.push_back({{"text", t.text}, {"start", t.char_start}, {"end", t.char_end}});
    j["tokens"] = std::move(toks);
    j["bio"] = bio_string(s.bio);
    json aspects = json::array();
    for (const auto& a : s.aspects) {
      aspects.push_back({{"term", a.term},
                         {"polarity", a.polarity},
                         {"from", a.char_from},
                         {"to", a.char_to},
                         {"span", {a.span.start, a.span.end}}});
    }
    j["aspects"] = std::move(aspects);
    os << j.dump() << '\n';
  }
}

Dataset read_dataset_cache(std::istream& is) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      SentenceRecord s;
      s.id = j.at("id").get<std::string>();
      s.domain = parse_domain(j.at("domain").get<std::string>());
      s.text = j.at("text").get<std::string>();
      for (const auto& t : j.at("tokens")) {
        s.tokens.push_back({t.at("text").get<std::string>(), t.at("start").get<std::size_t>(),
                            t.at("end").get<std::size_t>()});
      }
      s.bio = bio_from_string(j.at("bio").get<std::string>());
      if (s.bio.size() != s.tokens.size()) throw ParseError("bio/token length mismatch");
      for (const auto& a : j.at("aspects")) {
        const auto& span = a.at("span");
        s.aspects.push_back({a.at("term").get<std::string>(), a.at("polarity").get<std::string>(),
                             a.at("from").get<std::size_t>(), a.at("to").get<std::size_t>(),
                             {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()}});
      }
      if (first) {
        ds.domain = s.domain;
        first = false;
      }
      ds.sentences.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError("dataset cache line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("dataset cache line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  derive_samples(ds);
  return ds;
}

void write_dataset_cache(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_dataset_cache(os, dataset);
}

Dataset read_dataset_cache(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read_dataset_cache(is);
}

std::pair<std::vector<AlsaSample>, std::vector<AlsaSample>> stratified_split(
    const std::vector<AlsaSample>& samples, double dev_fraction, std::uint64_t seed) {
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
    throw InvalidArgument("stratified_split: dev fraction must be in [0, 1)");
  }
  std::map<Polarity, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(i);
  Rng rng(seed);
  std::vector<bool> in_dev(samples.size(), false);
  for (auto& [_, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto k = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(idx.size())));
    for (std::size_t j = 0; j < k; ++j) in_dev[idx[j]] = true;
  }
  std::vector<AlsaSample> train, dev;
  for (std::size_t i = 0; i < samples.size(); ++i) (in_dev[i] ? dev : train).push_back(samples[i]);
  return {std::move(train), std::move(dev)};
}

}  // namespace absa
