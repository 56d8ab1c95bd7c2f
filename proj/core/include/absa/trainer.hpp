#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absa/ae.hpp"
#include "absa/alsa.hpp"
#include "absa/dataset.hpp"
#include "absa/metrics.hpp"
#include "absa/optim.hpp"
#include "absa/param_store.hpp"

namespace absa {

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;  // cumulative optimizer steps
  double train_loss = 0.0;  // mean over the epoch
  std::optional<double> dev_score;

  std::string log_line() const;
};

struct TrainOptions {
  AdamConfig adam;
  std::size_t epochs = 25;
  std::uint64_t seed = 1;
  // Stop once this many optimizer steps have run (0: no limit).
  std::size_t max_steps = 0;
  // Checked after every epoch; returning true ends training.
  std::function<bool()> stop_after_epoch;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainLoopResult {
  std::vector<EpochRecord> epochs;
  std::size_t steps = 0;
  std::optional<std::size_t> best_epoch;
  double best_dev = 0.0;
  // Parameter values at the best dev epoch (final values without a dev set).
  ParamStore best_params;
};

// Sample-at-a-time training: each epoch visits items in a seeded shuffled
// order and applies one Adam step per item. `dev_score` (higher is better)
// selects the best epoch; ties keep the earlier epoch.
TrainLoopResult run_training(ParamStore& store, std::size_t num_items,
                             const std::function<LossFn(std::size_t)>& loss_for_item,
                             const std::function<std::optional<double>()>& dev_score,
                             const TrainOptions& opts);

// ALSA example with its input matrix already built.
struct PreparedSample {
  std::string sentence_id;
  std::vector<std::string> tokens;
  Tensor words;  // n x d_in
  AspectSpan span;
  Polarity label = Polarity::kPositive;
  BioSequence bio;  // sentence AE gold (multi-task)
  bool multi_aspect = false;
};

std::vector<PreparedSample> prepare_samples(const Dataset& dataset,
                                            const std::vector<AlsaSample>& samples,
                                            const InputMode& mode, const Vocabulary& vocab);

// Sentence-level AE example.
struct PreparedSentence {
  std::string sentence_id;
  std::vector<std::size_t> token_ids;
  Tensor words;  // n x d, for models that take vectors
  BioSequence bio;
};

std::vector<PreparedSentence> prepare_sentences(const Dataset& dataset, const Vocabulary& vocab);

std::vector<Prediction> predict_all(const AlsaModel& model,
                                    const std::vector<PreparedSample>& samples);
std::vector<Prediction> predict_all(const MultitaskModel& model,
                                    const std::vector<PreparedSample>& samples);

double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<PreparedSample>& samples);
MetricsReport evaluate_predictions(const std::vector<Prediction>& predictions,
                                   const std::vector<PreparedSample>& samples);

SpanScores evaluate_ae(const AeModel& model, const std::vector<PreparedSentence>& sentences);

TrainLoopResult train_ae(AeModel& model, const std::vector<PreparedSentence>& train,
                         const std::vector<PreparedSentence>& dev, const TrainOptions& opts);
TrainLoopResult train_alsa(AlsaModel& model, const std::vector<PreparedSample>& train,
                           const std::vector<PreparedSample>& dev, const TrainOptions& opts);
// `ae_only` sentences (no labelled aspect) contribute the tagging loss only.
TrainLoopResult train_multitask(MultitaskModel& model, const std::vector<PreparedSample>& train,
                                const std::vector<PreparedSentence>& ae_only,
                                const std::vector<PreparedSample>& dev, const TrainOptions& opts);

}  // namespace absa
