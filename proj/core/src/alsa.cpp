#include "absa/alsa.hpp"

#include <algorithm>
#include <array>

#include "absa/error.hpp"
#include "absa/random.hpp"

namespace absa {

std::string_view architecture_name(Architecture a) {
  switch (a) {
    case Architecture::kTcLstm: return "tclstm";
    case Architecture::kAtae: return "atae";
    case Architecture::kIan: return "ian";
  }
  return "?";
}

Architecture parse_architecture(std::string_view s) {
  if (s == "tclstm" || s == "tc-lstm") return Architecture::kTcLstm;
  if (s == "atae") return Architecture::kAtae;
  if (s == "ian") return Architecture::kIan;
  throw InvalidArgument("unknown architecture '" + std::string(s) + "' (expected tclstm|atae|ian)");
}

std::string_view input_variant_name(InputVariant v) {
  switch (v) {
    case InputVariant::kPlain: return "plain";
    case InputVariant::kTransfer: return "transfer";
    case InputVariant::kNoise: return "noise";
  }
  return "?";
}

InputVariant parse_input_variant(std::string_view s) {
  if (s == "plain") return InputVariant::kPlain;
  if (s == "transfer" || s == "T") return InputVariant::kTransfer;
  if (s == "noise" || s == "R") return InputVariant::kNoise;
  throw InvalidArgument("unknown input mode '" + std::string(s) + "' (expected plain|transfer|noise)");
}

std::size_t InputMode::width(std::size_t embed_dim) const {
  return variant == InputVariant::kPlain ? embed_dim : embed_dim + aux_dim;
}

Tensor noise_rows(const std::string& sentence_id, std::size_t rows, std::size_t cols,
                  std::uint64_t run_seed) {
  if (cols == 0) return Tensor({rows, 0});
  return sample_standard_normal(rows, cols, mix_seed(fnv1a(sentence_id), run_seed));
}

AlsaInput build_input(const AlsaSample& sample, const SentenceRecord& sentence,
                      const InputMode& mode, const Vocabulary& vocab) {
  const std::size_t n = sentence.tokens.size();
  if (sentence.token_ids.size() != n) {
    throw InvalidArgument("build_input: sentence '" + sentence.id + "' has no token ids assigned");
  }
  if (sample.span.start > sample.span.end || sample.span.end >= n) {
    throw InvalidArgument("build_input: span out of range for sentence '" + sentence.id + "'");
  }
  Tensor words = embed(sentence.token_ids, vocab.matrix());
  switch (mode.variant) {
    case InputVariant::kPlain:
      break;
    case InputVariant::kTransfer: {
      if (!mode.transfer) throw InvalidArgument("build_input: transfer mode without an S_T cache");
      auto it = mode.transfer->find(sentence.id);
      if (it == mode.transfer->end()) {
        throw NotFound("build_input: no S_T cache entry for sentence '" + sentence.id + "'");
      }
      const Tensor& st = it->second;
      if (st.rank() != 2 || st.rows() != n) {
        throw ShapeError("build_input: S_T for sentence '" + sentence.id + "' has shape " +
                         shape_string(st.shape()) + ", sentence has " + std::to_string(n) +
                         " tokens");
      }
      if (st.cols() != mode.aux_dim) {
        throw ShapeError("build_input: S_T width " + std::to_string(st.cols()) +
                         " != configured D_T " + std::to_string(mode.aux_dim));
      }
      words = concat_cols(words, st);
      break;
    }
    case InputVariant::kNoise:
      words = concat_cols(words, noise_rows(sentence.id, n, mode.aux_dim, mode.noise_seed));
      break;
  }
  Tensor aspect = words.slice_rows(sample.span.start, sample.span.end + 1);
  return {std::move(words), std::move(aspect)};
}

Tensor aspect_mean(const Tensor& aspect_rows) {
  if (aspect_rows.rank() != 2 || aspect_rows.rows() == 0) {
    throw ShapeError("aspect_mean: need p >= 1 rows, got " + shape_string(aspect_rows.shape()));
  }
  const std::size_t p = aspect_rows.rows(), k = aspect_rows.cols();
  Tensor out({k});
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < k; ++j) out[j] += aspect_rows.at(i, j);
  for (double& v : out.values()) v /= static_cast<double>(p);
  return out;
}

namespace {

void check_span(const char* op, AspectSpan span, std::size_t n) {
  if (span.start > span.end || span.end >= n) {
    throw InvalidArgument(std::string(op) + ": span [" + std::to_string(span.start) + ", " +
                          std::to_string(span.end) + "] invalid for " + std::to_string(n) +
                          " tokens");
  }
}

std::vector<Var> slice(const std::vector<Var>& rows, std::size_t begin, std::size_t end) {
  return {rows.begin() + static_cast<std::ptrdiff_t>(begin),
          rows.begin() + static_cast<std::ptrdiff_t>(end)};
}

Var mean_of(Graph& g, const std::vector<Var>& rows) {
  return ops::mean_rows(g, ops::stack(g, rows));
}

std::vector<Var> append_each(Graph& g, const std::vector<Var>& rows, Var suffix) {
  std::vector<Var> out;
  out.reserve(rows.size());
  for (Var r : rows) out.push_back(ops::concat(g, {r, suffix}));
  return out;
}

}  // namespace

TcLstmParams TcLstmParams::make(const std::string& prefix, std::size_t input_dim,
                                std::size_t hidden) {
  return {{prefix + ".lstm_left", 2 * input_dim, hidden},
          {prefix + ".lstm_right", 2 * input_dim, hidden},
          {prefix + ".head", 2 * hidden, kNumPolarities}};
}

void TcLstmParams::init(ParamStore& store, Rng& rng) const {
  left.init(store, rng);
  right.init(store, rng);
  head.init(store, rng);
}

AtaeParams AtaeParams::make(const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                            std::size_t attn_dim) {
  return {{prefix + ".lstm", 2 * input_dim, hidden},
          {prefix + ".attention", hidden, input_dim, attn_dim},
          {prefix + ".head", hidden, kNumPolarities}};
}

void AtaeParams::init(ParamStore& store, Rng& rng) const {
  lstm.init(store, rng);
  attention.init(store, rng);
  head.init(store, rng);
}

IanParams IanParams::make(const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                          std::size_t attn_dim) {
  return {{prefix + ".lstm_aspect", input_dim, hidden},
          {prefix + ".lstm_sentence", input_dim, hidden},
          {prefix + ".attention_aspect", hidden, hidden, attn_dim},
          {prefix + ".attention_sentence", hidden, hidden, attn_dim},
          {prefix + ".head", 2 * hidden, kNumPolarities}};
}

void IanParams::init(ParamStore& store, Rng& rng) const {
  aspect_lstm.init(store, rng);
  sentence_lstm.init(store, rng);
  aspect_attention.init(store, rng);
  sentence_attention.init(store, rng);
  head.init(store, rng);
}

AlsaOutput tclstm_forward(Graph& g, const TcLstmParams& p, const std::vector<Var>& rows,
                          AspectSpan span) {
  check_span("tclstm_forward", span, rows.size());
  const Var aspect = mean_of(g, slice(rows, span.start, span.end + 1));
  const auto left = append_each(g, slice(rows, 0, span.start), aspect);
  const auto right = append_each(g, slice(rows, span.end + 1, rows.size()), aspect);
  const Var h_left = run_lstm(g, left, p.left, Direction::kForward).final_state;
  const Var h_right = run_lstm(g, right, p.right, Direction::kBackward).final_state;
  return {classify(g, p.head, ops::concat(g, {h_left, h_right})), std::nullopt, std::nullopt};
}

AlsaOutput atae_forward(Graph& g, const AtaeParams& p, const std::vector<Var>& rows,
                        AspectSpan span) {
  check_span("atae_forward", span, rows.size());
  const Var aspect = mean_of(g, slice(rows, span.start, span.end + 1));
  const auto run = run_lstm(g, append_each(g, rows, aspect), p.lstm, Direction::kForward);
  const auto att = additive_attention(g, p.attention, run.states, aspect);
  return {classify(g, p.head, att.pooled), att.alpha, std::nullopt};
}

AlsaOutput ian_forward(Graph& g, const IanParams& p, const std::vector<Var>& rows,
                       AspectSpan span) {
  check_span("ian_forward", span, rows.size());
  const auto h_aspect =
      run_lstm(g, slice(rows, span.start, span.end + 1), p.aspect_lstm, Direction::kForward).states;
  const auto h_sentence = run_lstm(g, rows, p.sentence_lstm, Direction::kForward).states;
  const Var pooled_aspect = max_pool_rows(g, h_aspect);
  const Var pooled_sentence = max_pool_rows(g, h_sentence);
  const auto att_aspect = additive_attention(g, p.aspect_attention, h_aspect, pooled_sentence);
  const auto att_sentence = additive_attention(g, p.sentence_attention, h_sentence, pooled_aspect);
  const Var features = ops::concat(g, {att_aspect.pooled, att_sentence.pooled});
  return {classify(g, p.head, features), att_sentence.alpha, att_aspect.alpha};
}

AlsaModel::AlsaModel(const AlsaConfig& config) : config_(config) {
  if (config.hidden_dim == 0) throw InvalidArgument("AlsaModel: hidden_dim must be positive");
  Rng rng(config.seed);
  const std::string prefix(architecture_name(config.architecture));
  switch (config.architecture) {
    case Architecture::kTcLstm:
      arch_ = TcLstmParams::make(prefix, config.input_dim, config.hidden_dim);
      break;
    case Architecture::kAtae:
      arch_ = AtaeParams::make(prefix, config.input_dim, config.hidden_dim, config.attn_dim);
      break;
    case Architecture::kIan:
      arch_ = IanParams::make(prefix, config.input_dim, config.hidden_dim, config.attn_dim);
      break;
  }
  std::visit([&](const auto& p) { p.init(params_, rng); }, arch_);
}

AlsaOutput AlsaModel::forward(Graph& g, const std::vector<Var>& rows, AspectSpan span) const {
  for (Var r : rows) {
    if (g.value(r).size() != config_.input_dim) {
      throw ShapeError("AlsaModel: word row " + shape_string(g.value(r).shape()) +
                       ", model input width is " + std::to_string(config_.input_dim));
    }
  }
  return std::visit(
      [&](const auto& p) -> AlsaOutput {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TcLstmParams>) return tclstm_forward(g, p, rows, span);
        else if constexpr (std::is_same_v<P, AtaeParams>) return atae_forward(g, p, rows, span);
        else return ian_forward(g, p, rows, span);
      },
      arch_);
}

AlsaOutput AlsaModel::forward(Graph& g, const Tensor& words, AspectSpan span) const {
  return forward(g, constant_rows(g, words), span);
}

Var AlsaModel::loss(Graph& g, const Tensor& words, AspectSpan span, Polarity label) const {
  return ops::softmax_cross_entropy(g, forward(g, words, span).logits,
                                    static_cast<std::size_t>(label));
}

namespace {

Prediction to_prediction(const Graph& g, const AlsaOutput& out) {
  Prediction p;
  p.logits = g.value(out.logits);
  const auto v = p.logits.values();
  p.label = static_cast<Polarity>(std::max_element(v.begin(), v.end()) - v.begin());
  if (out.alpha) p.alpha = g.value(*out.alpha);
  if (out.alpha_aspect) p.alpha_aspect = g.value(*out.alpha_aspect);
  return p;
}

}  // namespace

Prediction predict(const AlsaModel& model, const Tensor& words, AspectSpan span) {
  Graph g(model.params());
  return to_prediction(g, model.forward(g, words, span));
}

MultitaskModel::MultitaskModel(const MultitaskConfig& config)
    : config_(config),
      fwd_{"mt.gru_fwd", config.embed_dim, config.shared_hidden},
      bwd_{"mt.gru_bwd", config.embed_dim, config.shared_hidden},
      crf_{"mt.crf", 2 * config.shared_hidden},
      atae_(AtaeParams::make("mt.atae", 2 * config.shared_hidden, config.alsa_hidden,
                             config.attn_dim)) {
  Rng rng(config.seed);
  fwd_.init(params_, rng);
  bwd_.init(params_, rng);
  crf_.init(params_, rng);
  atae_.init(params_, rng);
}

Var MultitaskModel::shared_states(Graph& g, const Tensor& words) const {
  if (words.rank() != 2 || words.cols() != config_.embed_dim) {
    throw ShapeError("MultitaskModel: words " + shape_string(words.shape()) + ", expected n x " +
                     std::to_string(config_.embed_dim));
  }
  return run_bigru(g, constant_rows(g, words), fwd_, bwd_);
}

MultitaskModel::Outputs MultitaskModel::forward(Graph& g, const Tensor& words,
                                                AspectSpan span) const {
  const Var shared = shared_states(g, words);
  const Var emissions = crf_.emissions(g, shared);
  AlsaOutput alsa = atae_forward(g, atae_, ops::unstack(g, shared), span);
  return {shared, emissions, alsa};
}

Var MultitaskModel::ae_loss(Graph& g, const Tensor& words, const BioSequence& gold) const {
  const Var shared = shared_states(g, words);
  return crf_.nll(g, crf_.emissions(g, shared), gold);
}

Var MultitaskModel::alsa_loss(Graph& g, const Tensor& words, AspectSpan span,
                              Polarity label) const {
  const Var shared = shared_states(g, words);
  const auto out = atae_forward(g, atae_, ops::unstack(g, shared), span);
  return ops::softmax_cross_entropy(g, out.logits, static_cast<std::size_t>(label));
}

Var MultitaskModel::joint_loss(Graph& g, const Tensor& words, AspectSpan span,
                               const BioSequence& gold, Polarity label) const {
  const auto out = forward(g, words, span);
  const Var ae = crf_.nll(g, out.emissions, gold);
  const Var alsa =
      ops::softmax_cross_entropy(g, out.alsa.logits, static_cast<std::size_t>(label));
  return ops::add(g, ae, alsa);
}

Prediction predict(const MultitaskModel& model, const Tensor& words, AspectSpan span) {
  Graph g(model.params());
  return to_prediction(g, model.forward(g, words, span).alsa);
}

Polarity majority_label(std::span<const Polarity> train_labels) {
  if (train_labels.empty()) throw InvalidArgument("majority_predict: empty training set");
  std::array<std::size_t, kNumPolarities> counts{};
  for (Polarity p : train_labels) ++counts[static_cast<std::size_t>(p)];
  // max_element returns the first maximum, i.e. the lowest label index.
  return static_cast<Polarity>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<Polarity> majority_predict(std::span<const Polarity> train_labels,
                                       std::size_t test_size) {
  return std::vector<Polarity>(test_size, majority_label(train_labels));
}

}  // namespace absa
