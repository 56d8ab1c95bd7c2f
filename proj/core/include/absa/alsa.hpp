#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "absa/crf.hpp"
#include "absa/dataset.hpp"
#include "absa/embeddings.hpp"
#include "absa/graph.hpp"
#include "absa/layers.hpp"
#include "absa/param_store.hpp"
#include "absa/types.hpp"

namespace absa {

enum class Architecture { kTcLstm, kAtae, kIan };

std::string_view architecture_name(Architecture a);
Architecture parse_architecture(std::string_view s);

// ---------------------------------------------------------------------------
// Inputs

enum class InputVariant { kPlain, kTransfer, kNoise };

std::string_view input_variant_name(InputVariant v);
InputVariant parse_input_variant(std::string_view s);

// Per-sentence S_T matrices keyed by sentence id.
using TransferCache = std::unordered_map<std::string, Tensor>;

struct InputMode {
  InputVariant variant = InputVariant::kPlain;
  const TransferCache* transfer = nullptr;  // required for kTransfer
  std::size_t aux_dim = 64;                 // width of the noise rows (kNoise)
  std::uint64_t noise_seed = 0;

  // Width of a word row given the embedding width d. For kTransfer this is
  // d + the cache's row width, which the caller supplies as `aux_dim`.
  std::size_t width(std::size_t embed_dim) const;
};

struct AlsaInput {
  Tensor words;        // n x d_in
  Tensor aspect_rows;  // p x d_in, rows span.start..span.end of `words`
};

// Builds [S] or [S ; S_T] or [S ; R] for one sample. Throws NotFound for a
// missing cache entry and ShapeError for a row-count mismatch.
AlsaInput build_input(const AlsaSample& sample, const SentenceRecord& sentence,
                      const InputMode& mode, const Vocabulary& vocab);

// Fixed N(0,1) rows for a sentence, seeded from its id and the run seed.
Tensor noise_rows(const std::string& sentence_id, std::size_t rows, std::size_t cols,
                  std::uint64_t run_seed);

// Arithmetic mean of the rows; throws on p = 0.
Tensor aspect_mean(const Tensor& aspect_rows);

// ---------------------------------------------------------------------------
// Architectures

struct TcLstmParams {
  LstmCellParams left;
  LstmCellParams right;
  LinearParams head;

  static TcLstmParams make(const std::string& prefix, std::size_t input_dim, std::size_t hidden);
  void init(ParamStore& store, Rng& rng) const;
};

struct AtaeParams {
  LstmCellParams lstm;
  AttentionParams attention;
  LinearParams head;

  static AtaeParams make(const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                         std::size_t attn_dim = 0);
  void init(ParamStore& store, Rng& rng) const;
};

struct IanParams {
  LstmCellParams aspect_lstm;
  LstmCellParams sentence_lstm;
  AttentionParams aspect_attention;    // over H_A, query pool(H_S)
  AttentionParams sentence_attention;  // over H_S, query pool(H_A)
  LinearParams head;

  static IanParams make(const std::string& prefix, std::size_t input_dim, std::size_t hidden,
                        std::size_t attn_dim = 0);
  void init(ParamStore& store, Rng& rng) const;
};

struct AlsaOutput {
  Var logits;
  std::optional<Var> alpha;         // sentence attention (ATAE, IAN)
  std::optional<Var> alpha_aspect;  // aspect attention (IAN)
};

// Left context rows [0, span.start) and right context rows (span.end, n),
// each appended with the aspect mean, run through their own LSTMs (right to
// left for the right side). Empty contexts contribute a zero state.
AlsaOutput tclstm_forward(Graph& g, const TcLstmParams& p, const std::vector<Var>& rows,
                          AspectSpan span);
AlsaOutput atae_forward(Graph& g, const AtaeParams& p, const std::vector<Var>& rows,
                        AspectSpan span);
AlsaOutput ian_forward(Graph& g, const IanParams& p, const std::vector<Var>& rows,
                       AspectSpan span);

struct AlsaConfig {
  Architecture architecture = Architecture::kAtae;
  std::size_t input_dim = 300;
  std::size_t hidden_dim = 128;
  std::size_t attn_dim = 0;  // 0: key width
  std::uint64_t seed = 1;
};

class AlsaModel {
 public:
  explicit AlsaModel(const AlsaConfig& config);

  const AlsaConfig& config() const noexcept { return config_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  AlsaOutput forward(Graph& g, const std::vector<Var>& rows, AspectSpan span) const;
  AlsaOutput forward(Graph& g, const Tensor& words, AspectSpan span) const;
  Var loss(Graph& g, const Tensor& words, AspectSpan span, Polarity label) const;

 private:
  AlsaConfig config_;
  std::variant<TcLstmParams, AtaeParams, IanParams> arch_;
  ParamStore params_;
};

struct Prediction {
  Polarity label = Polarity::kPositive;
  Tensor logits;
  std::optional<Tensor> alpha;
  std::optional<Tensor> alpha_aspect;
};

Prediction predict(const AlsaModel& model, const Tensor& words, AspectSpan span);

// ---------------------------------------------------------------------------
// Multi-task: a shared BiGRU feeding a CRF tagging head and an ATAE head.

struct MultitaskConfig {
  std::size_t embed_dim = 300;
  std::size_t shared_hidden = 32;  // per direction
  std::size_t alsa_hidden = 128;
  std::size_t attn_dim = 0;
  std::uint64_t seed = 1;
};

class MultitaskModel {
 public:
  explicit MultitaskModel(const MultitaskConfig& config);

  const MultitaskConfig& config() const noexcept { return config_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  struct Outputs {
    Var shared;     // n x 2*shared_hidden
    Var emissions;  // n x 3
    AlsaOutput alsa;
  };

  Outputs forward(Graph& g, const Tensor& words, AspectSpan span) const;
  Var ae_loss(Graph& g, const Tensor& words, const BioSequence& gold) const;
  Var alsa_loss(Graph& g, const Tensor& words, AspectSpan span, Polarity label) const;
  // nll_AE + cross-entropy_ALSA, equal weights.
  Var joint_loss(Graph& g, const Tensor& words, AspectSpan span, const BioSequence& gold,
                 Polarity label) const;

 private:
  Var shared_states(Graph& g, const Tensor& words) const;

  MultitaskConfig config_;
  GruCellParams fwd_;
  GruCellParams bwd_;
  CrfParams crf_;
  AtaeParams atae_;
  ParamStore params_;
};

Prediction predict(const MultitaskModel& model, const Tensor& words, AspectSpan span);

// ---------------------------------------------------------------------------
// Majority baseline

// Most frequent label; ties go to positive < negative < neutral. Throws on
// empty input.
Polarity majority_label(std::span<const Polarity> train_labels);
std::vector<Polarity> majority_predict(std::span<const Polarity> train_labels,
                                       std::size_t test_size);

}  // namespace absa
