#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "absa/crf.hpp"
#include "absa/embeddings.hpp"
#include "absa/semeval.hpp"
#include "absa/tokenizer.hpp"
#include "absa/types.hpp"

namespace absa {

struct SentenceAspect {
  std::string term;
  std::string polarity;  // includes "conflict"
  std::size_t char_from = 0;
  std::size_t char_to = 0;
  AspectSpan span;
};

// A tokenized sentence with AE gold. Every aspect, conflict ones included,
// is marked in `bio`.
struct SentenceRecord {
  std::string id;
  std::string text;
  Domain domain = Domain::kLaptop;
  std::vector<Token> tokens;
  BioSequence bio;
  std::vector<SentenceAspect> aspects;
  std::vector<std::size_t> token_ids;  // filled by assign_ids()
};

// One ALSA example: an aspect with a three-way label. Conflict aspects are
// not samples.
struct AlsaSample {
  std::size_t sentence_index = 0;
  std::string sentence_id;
  AspectSpan span;
  Polarity label = Polarity::kPositive;
  Domain domain = Domain::kLaptop;
};

struct Dataset {
  Domain domain = Domain::kLaptop;
  std::vector<SentenceRecord> sentences;
  std::vector<AlsaSample> samples;

  const SentenceRecord& sentence_of(const AlsaSample& s) const {
    return sentences.at(s.sentence_index);
  }
};

Dataset build_dataset(const std::vector<RawSentence>& raw, Domain domain);
Dataset load_semeval_dataset(const std::filesystem::path& xml_path, Domain domain);

// Distinct tokens across the datasets, in first-seen order.
std::vector<std::string> collect_tokens(const std::vector<const Dataset*>& datasets);
void assign_ids(Dataset& dataset, const Vocabulary& vocab);

// A sample is multi-aspect (MA) when another sample shares its sentence id.
std::pair<std::vector<AlsaSample>, std::vector<AlsaSample>> split_sa_ma(
    const std::vector<AlsaSample>& samples);

// Processed-dataset cache: one JSON object per sentence per line.
void write_dataset_cache(std::ostream& os, const Dataset& dataset);
Dataset read_dataset_cache(std::istream& is);
void write_dataset_cache(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_cache(const std::filesystem::path& path);

// Seeded stratified split of `samples` indices into (train, dev), putting
// round(fraction * class size) of each class into dev.
std::pair<std::vector<AlsaSample>, std::vector<AlsaSample>> stratified_split(
    const std::vector<AlsaSample>& samples, double dev_fraction, std::uint64_t seed);

}  // namespace absa
