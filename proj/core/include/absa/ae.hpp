#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "absa/crf.hpp"
#include "absa/embeddings.hpp"
#include "absa/graph.hpp"
#include "absa/layers.hpp"
#include "absa/param_store.hpp"
#include "absa/types.hpp"

namespace absa {

struct AeConfig {
  std::size_t embed_dim = 300;
  // Per-direction GRU width; the transferred representation is twice this.
  std::size_t hidden_dim = 32;
  bool finetune_embeddings = false;
  std::uint64_t seed = 1;

  std::size_t transfer_dim() const { return 2 * hidden_dim; }
};

// Embeddings -> BiGRU -> CRF tagger. The BiGRU output is the transferable
// representation S_T.
class AeModel {
 public:
  // `vocab` must outlive the model. When finetuning, the vocabulary matrix is
  // copied into the store as "ae.embedding".
  AeModel(const AeConfig& config, const Vocabulary& vocab);

  const AeConfig& config() const noexcept { return config_; }
  std::size_t transfer_dim() const noexcept { return config_.transfer_dim(); }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  const Vocabulary& vocabulary() const noexcept { return *vocab_; }
  const CrfParams& crf() const noexcept { return crf_; }

  struct Outputs {
    Var emissions;  // n x 3
    Var states;     // n x transfer_dim
  };

  Outputs forward(Graph& g, std::span<const std::size_t> token_ids) const;
  Var loss(Graph& g, std::span<const std::size_t> token_ids, const BioSequence& gold) const;

 private:
  AeConfig config_;
  const Vocabulary* vocab_;
  GruCellParams fwd_;
  GruCellParams bwd_;
  CrfParams crf_;
  ParamStore params_;
};

struct AeForward {
  Tensor emissions;  // n x 3
  Tensor s_t;        // n x D_T
};

// Throws ShapeError on an empty sentence.
AeForward ae_forward(const AeModel& model, std::span<const std::size_t> token_ids);
double ae_loss(const AeModel& model, std::span<const std::size_t> token_ids,
               const BioSequence& gold);
BioSequence ae_tag(const AeModel& model, std::span<const std::size_t> token_ids);

// The frozen BiGRU representation; identical to ae_forward(...).s_t.
Tensor export_transfer(const AeModel& model, std::span<const std::size_t> token_ids);

// Spans of the pattern B I*. A stray I opens a span as if it were B.
std::vector<AspectSpan> decode_spans(const BioSequence& labels);
// Inverse of decode_spans for well-formed spans (B at starts, I inside).
BioSequence encode_spans(const std::vector<AspectSpan>& spans, std::size_t length);

struct SpanScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Exact-match span scoring; zero denominators give 0.
SpanScores ae_span_f1(const std::vector<AspectSpan>& predicted,
                      const std::vector<AspectSpan>& gold);

// Micro-averaged span F1 accumulated over many sentences.
class SpanF1Accumulator {
 public:
  void add(const std::vector<AspectSpan>& predicted, const std::vector<AspectSpan>& gold);
  SpanScores scores() const;

 private:
  std::size_t matched_ = 0;
  std::size_t predicted_ = 0;
  std::size_t gold_ = 0;
};

}  // namespace absa
