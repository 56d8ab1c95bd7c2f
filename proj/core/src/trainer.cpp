#include "absa/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "absa/error.hpp"
#include "absa/random.hpp"

namespace absa {

std::string EpochRecord::log_line() const {
  char buf[160];
  if (dev_score) {
    std::snprintf(buf, sizeof buf, "epoch=%zu steps=%zu train_loss=%.6f dev=%.4f", epoch, steps,
                  train_loss, 100.0 * *dev_score);
  } else {
    std::snprintf(buf, sizeof buf, "epoch=%zu steps=%zu train_loss=%.6f", epoch, steps,
                  train_loss);
  }
  return buf;
}

TrainLoopResult run_training(ParamStore& store, std::size_t num_items,
                             const std::function<LossFn(std::size_t)>& loss_for_item,
                             const std::function<std::optional<double>()>& dev_score,
                             const TrainOptions& opts) {
  opts.adam.validate();
  if (num_items == 0) throw InvalidArgument("run_training: no training items");
  TrainLoopResult result;
  result.best_params = store;
  Rng rng(opts.seed);
  std::vector<std::size_t> order(num_items);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t idx : order) {
      if (opts.max_steps && result.steps >= opts.max_steps) break;
      loss_sum += forward_backward(loss_for_item(idx), store);
      adam_step(store, opts.adam);
      ++result.steps;
      ++seen;
    }
    if (seen == 0) break;
    EpochRecord rec{epoch, result.steps, loss_sum / static_cast<double>(seen), std::nullopt};
    if (dev_score) rec.dev_score = dev_score();
    if (rec.dev_score) {
      if (!result.best_epoch || *rec.dev_score > result.best_dev) {
        result.best_epoch = epoch;
        result.best_dev = *rec.dev_score;
        result.best_params = store;
      }
    }
    result.epochs.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec);
    if (opts.stop_after_epoch && opts.stop_after_epoch()) break;
    if (opts.max_steps && result.steps >= opts.max_steps) break;
  }
  if (!result.best_epoch) result.best_params = store;
  return result;
}

std::vector<PreparedSample> prepare_samples(const Dataset& dataset,
                                            const std::vector<AlsaSample>& samples,
                                            const InputMode& mode, const Vocabulary& vocab) {
  std::unordered_map<std::string, std::size_t> per_sentence;
  for (const auto& s : dataset.samples) ++per_sentence[s.sentence_id];
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto& sentence = dataset.sentence_of(s);
    AlsaInput in = build_input(s, sentence, mode, vocab);
    PreparedSample p;
    p.sentence_id = s.sentence_id;
    for (const auto& t : sentence.tokens) p.tokens.push_back(t.text);
    p.words = std::move(in.words);
    p.span = s.span;
    p.label = s.label;
    p.bio = sentence.bio;
    p.multi_aspect = per_sentence[s.sentence_id] > 1;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PreparedSentence> prepare_sentences(const Dataset& dataset, const Vocabulary& vocab) {
  std::vector<PreparedSentence> out;
  out.reserve(dataset.sentences.size());
  for (const auto& s : dataset.sentences) {
    PreparedSentence p;
    p.sentence_id = s.id;
    p.token_ids = vocab.ids(s.tokens);
    p.words = embed(p.token_ids, vocab.matrix());
    p.bio = s.bio;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> predict_all(const AlsaModel& model,
                                    const std::vector<PreparedSample>& samples) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(model, s.words, s.span));
  return out;
}

std::vector<Prediction> predict_all(const MultitaskModel& model,
                                    const std::vector<PreparedSample>& samples) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(model, s.words, s.span));
  return out;
}

double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<PreparedSample>& samples) {
  if (samples.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) hit += predictions[i].label == samples[i].label;
  return static_cast<double>(hit) / static_cast<double>(samples.size());
}

MetricsReport evaluate_predictions(const std::vector<Prediction>& predictions,
                                   const std::vector<PreparedSample>& samples) {
  std::vector<Polarity> pred, gold;
  std::vector<bool> is_ma;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    pred.push_back(predictions[i].label);
    gold.push_back(samples[i].label);
    is_ma.push_back(samples[i].multi_aspect);
  }
  MetricsReport r = macro_f1(pred, gold);
  add_sa_ma_slices(r, pred, gold, is_ma);
  return r;
}

SpanScores evaluate_ae(const AeModel& model, const std::vector<PreparedSentence>& sentences) {
  SpanF1Accumulator acc;
  for (const auto& s : sentences) {
    acc.add(decode_spans(ae_tag(model, s.token_ids)), decode_spans(s.bio));
  }
  return acc.scores();
}

TrainLoopResult train_ae(AeModel& model, const std::vector<PreparedSentence>& train,
                         const std::vector<PreparedSentence>& dev, const TrainOptions& opts) {
  auto loss_for = [&](std::size_t i) -> LossFn {
    return [&, i](Graph& g) { return model.loss(g, train[i].token_ids, train[i].bio); };
  };
  std::function<std::optional<double>()> dev_fn;
  if (!dev.empty()) dev_fn = [&]() -> std::optional<double> { return evaluate_ae(model, dev).f1; };
  return run_training(model.params(), train.size(), loss_for, dev_fn, opts);
}

TrainLoopResult train_alsa(AlsaModel& model, const std::vector<PreparedSample>& train,
                           const std::vector<PreparedSample>& dev, const TrainOptions& opts) {
  auto loss_for = [&](std::size_t i) -> LossFn {
    return [&, i](Graph& g) { return model.loss(g, train[i].words, train[i].span, train[i].label); };
  };
  std::function<std::optional<double>()> dev_fn;
  if (!dev.empty()) {
    dev_fn = [&]() -> std::optional<double> {
      return evaluate_predictions(predict_all(model, dev), dev).macro_f1;
    };
  }
  return run_training(model.params(), train.size(), loss_for, dev_fn, opts);
}

TrainLoopResult train_multitask(MultitaskModel& model, const std::vector<PreparedSample>& train,
                                const std::vector<PreparedSentence>& ae_only,
                                const std::vector<PreparedSample>& dev, const TrainOptions& opts) {
  auto loss_for = [&](std::size_t i) -> LossFn {
    if (i < train.size()) {
      return [&, i](Graph& g) {
        const auto& s = train[i];
        return model.joint_loss(g, s.words, s.span, s.bio, s.label);
      };
    }
    return [&, j = i - train.size()](Graph& g) {
      return model.ae_loss(g, ae_only[j].words, ae_only[j].bio);
    };
  };
  std::function<std::optional<double>()> dev_fn;
  if (!dev.empty()) {
    dev_fn = [&]() -> std::optional<double> {
      return evaluate_predictions(predict_all(model, dev), dev).macro_f1;
    };
  }
  return run_training(model.params(), train.size() + ae_only.size(), loss_for, dev_fn, opts);
}

}  // namespace absa
