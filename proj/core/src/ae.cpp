#include "absa/ae.hpp"

#include <algorithm>
#include <set>

#include "absa/error.hpp"
#include "absa/random.hpp"

namespace absa {

AeModel::AeModel(const AeConfig& config, const Vocabulary& vocab)
    : config_(config),
      vocab_(&vocab),
      fwd_{"ae.gru_fwd", config.embed_dim, config.hidden_dim},
      bwd_{"ae.gru_bwd", config.embed_dim, config.hidden_dim},
      crf_{"ae.crf", config.transfer_dim()} {
  if (vocab.dim() != config.embed_dim) {
    throw ShapeError("AeModel: vocabulary dim " + std::to_string(vocab.dim()) +
                     " != embed_dim " + std::to_string(config.embed_dim));
  }
  if (config.hidden_dim == 0) throw InvalidArgument("AeModel: hidden_dim must be positive");
  Rng rng(config.seed);
  fwd_.init(params_, rng);
  bwd_.init(params_, rng);
  crf_.init(params_, rng);
  if (config.finetune_embeddings) params_.add("ae.embedding", vocab.matrix());
}

AeModel::Outputs AeModel::forward(Graph& g, std::span<const std::size_t> token_ids) const {
  if (token_ids.empty()) throw ShapeError("ae_forward: empty sentence");
  std::vector<Var> rows;
  if (config_.finetune_embeddings) {
    rows = ops::unstack(g, ops::gather_rows(g, g.param("ae.embedding"),
                                            {token_ids.begin(), token_ids.end()}));
  } else {
    rows = constant_rows(g, embed(token_ids, vocab_->matrix()));
  }
  const Var states = run_bigru(g, rows, fwd_, bwd_);
  return {crf_.emissions(g, states), states};
}

Var AeModel::loss(Graph& g, std::span<const std::size_t> token_ids,
                  const BioSequence& gold) const {
  if (gold.size() != token_ids.size()) {
    throw ShapeError("ae_loss: " + std::to_string(gold.size()) + " labels for " +
                     std::to_string(token_ids.size()) + " tokens");
  }
  const auto out = forward(g, token_ids);
  return crf_.nll(g, out.emissions, gold);
}

AeForward ae_forward(const AeModel& model, std::span<const std::size_t> token_ids) {
  Graph g(model.params());
  const auto out = model.forward(g, token_ids);
  return {g.value(out.emissions), g.value(out.states)};
}

double ae_loss(const AeModel& model, std::span<const std::size_t> token_ids,
               const BioSequence& gold) {
  Graph g(model.params());
  return g.value(model.loss(g, token_ids, gold))[0];
}

BioSequence ae_tag(const AeModel& model, std::span<const std::size_t> token_ids) {
  const auto out = ae_forward(model, token_ids);
  return viterbi(out.emissions, model.crf().scores(model.params()));
}

Tensor export_transfer(const AeModel& model, std::span<const std::size_t> token_ids) {
  return ae_forward(model, token_ids).s_t;
}

std::vector<AspectSpan> decode_spans(const BioSequence& labels) {
  std::vector<AspectSpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (labels[i]) {
      case BioLabel::kB:
        spans.push_back({i, i});
        open = true;
        break;
      case BioLabel::kI:
        if (open) {
          spans.back().end = i;
        } else {
          spans.push_back({i, i});
          open = true;
        }
        break;
      case BioLabel::kO:
        open = false;
        break;
    }
  }
  return spans;
}

BioSequence encode_spans(const std::vector<AspectSpan>& spans, std::size_t length) {
  BioSequence out(length, BioLabel::kO);
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= length) {
      throw InvalidArgument("encode_spans: span [" + std::to_string(s.start) + ", " +
                            std::to_string(s.end) + "] out of bounds for length " +
                            std::to_string(length));
    }
    out[s.start] = BioLabel::kB;
    for (std::size_t i = s.start + 1; i <= s.end; ++i) out[i] = BioLabel::kI;
  }
  return out;
}

namespace {

std::size_t count_matches(const std::vector<AspectSpan>& predicted,
                          const std::vector<AspectSpan>& gold) {
  std::multiset<AspectSpan> g(gold.begin(), gold.end());
  std::size_t matched = 0;
  for (const auto& p : predicted) {
    if (auto it = g.find(p); it != g.end()) {
      ++matched;
      g.erase(it);
    }
  }
  return matched;
}

SpanScores scores_from(std::size_t matched, std::size_t predicted, std::size_t gold) {
  SpanScores s;
  s.precision = predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                      : 0.0;
  return s;
}

}  // namespace

SpanScores ae_span_f1(const std::vector<AspectSpan>& predicted,
                      const std::vector<AspectSpan>& gold) {
  return scores_from(count_matches(predicted, gold), predicted.size(), gold.size());
}

void SpanF1Accumulator::add(const std::vector<AspectSpan>& predicted,
                            const std::vector<AspectSpan>& gold) {
  matched_ += count_matches(predicted, gold);
  predicted_ += predicted.size();
  gold_ += gold.size();
}

SpanScores SpanF1Accumulator::scores() const { return scores_from(matched_, predicted_, gold_); }

}  // namespace absa
