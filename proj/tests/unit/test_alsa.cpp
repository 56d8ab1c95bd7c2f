#include <gtest/gtest.h>

#include <cmath>

#include "absa/alsa.hpp"
#include "absa/dataset.hpp"
#include "absa/error.hpp"
#include "absa/grad_check.hpp"
#include "absa/metrics.hpp"
#include "absa/optim.hpp"
#include "absa/random.hpp"
#include "corpora.hpp"

using namespace absa;

namespace {

constexpr Architecture kAll[] = {Architecture::kTcLstm, Architecture::kAtae, Architecture::kIan};

// One sentence "the battery life is great ." with an aspect on tokens 1..2.
struct SentenceFixture {
  Dataset ds;
  Vocabulary vocab;
  explicit SentenceFixture(std::size_t dim = 300)
      : ds(build_dataset({{"s1", "the battery life is great .", {{"battery life", "positive", 4, 16}}},
                          {"s2", "screen ok", {{"screen", "neutral", 0, 6}}}},
                         Domain::kLaptop)),
        vocab(random_vocabulary(collect_tokens({&ds}), dim, 1)) {
    assign_ids(ds, vocab);
  }
  const AlsaSample& sample() const { return ds.samples.at(0); }
  const SentenceRecord& sentence() const { return ds.sentences.at(0); }
};

void randomize(ParamStore& s, std::uint64_t seed, double range = 1.0) {
  Rng rng(seed);
  for (auto& [n, e] : s.entries()) e.value = sample_uniform(e.value.shape(), -range, range, rng);
}

AlsaModel make_model(Architecture a, std::size_t d_in, std::size_t hidden = 6, std::uint64_t seed = 1) {
  AlsaConfig cfg;
  cfg.architecture = a;
  cfg.input_dim = d_in;
  cfg.hidden_dim = hidden;
  cfg.seed = seed;
  return AlsaModel(cfg);
}

double sum(const Tensor& t) { return t.sum(); }

}  // namespace

// ---------------------------------------------------------------- inputs

TEST(BuildInput, PlainWidthIsEmbeddingWidth) {
  SentenceFixture f;
  const AlsaInput in = build_input(f.sample(), f.sentence(), InputMode{}, f.vocab);
  EXPECT_EQ(in.words.shape(), (Shape{6, 300}));
  EXPECT_EQ(in.aspect_rows.shape(), (Shape{2, 300}));
  EXPECT_EQ(in.aspect_rows.row_tensor(0), in.words.row_tensor(1));
}

TEST(BuildInput, TransferAppendsCachedRows) {
  SentenceFixture f;
  TransferCache cache{{"s1", sample_standard_normal(6, 64, 3)}};
  InputMode mode;
  mode.variant = InputVariant::kTransfer;
  mode.transfer = &cache;
  mode.aux_dim = 64;
  const AlsaInput in = build_input(f.sample(), f.sentence(), mode, f.vocab);
  EXPECT_EQ(in.words.cols(), 364u);
  EXPECT_EQ(mode.width(300), 364u);
  EXPECT_EQ(in.words.at(2, 300 + 5), cache["s1"].at(2, 5));
  EXPECT_EQ(in.words.at(2, 7), f.vocab.matrix().at(f.sentence().token_ids[2], 7));
}

TEST(BuildInput, TransferErrors) {
  SentenceFixture f;
  InputMode mode;
  mode.variant = InputVariant::kTransfer;
  mode.aux_dim = 64;
  TransferCache empty;
  mode.transfer = &empty;
  try {
    build_input(f.sample(), f.sentence(), mode, f.vocab);
    FAIL();
  } catch (const NotFound& e) {
    EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos);
  }
  TransferCache short_rows{{"s1", Tensor({5, 64})}};
  mode.transfer = &short_rows;
  EXPECT_THROW(build_input(f.sample(), f.sentence(), mode, f.vocab), ShapeError);
}

TEST(BuildInput, NoiseIsSeededPerSentence) {
  SentenceFixture f;
  InputMode mode;
  mode.variant = InputVariant::kNoise;
  mode.aux_dim = 64;
  mode.noise_seed = 9;
  const AlsaInput a = build_input(f.sample(), f.sentence(), mode, f.vocab);
  const AlsaInput b = build_input(f.sample(), f.sentence(), mode, f.vocab);
  EXPECT_EQ(a.words, b.words);
  EXPECT_EQ(a.words.cols(), 364u);
  mode.noise_seed = 10;
  EXPECT_NE(build_input(f.sample(), f.sentence(), mode, f.vocab).words, a.words);
  EXPECT_NE(noise_rows("s1", 6, 64, 9), noise_rows("s2", 6, 64, 9));
}

TEST(NoiseRows, StandardNormalStatistics) {
  std::vector<double> all;
  for (int i = 0; all.size() < 10000; ++i) {
    const Tensor t = noise_rows("sentence-" + std::to_string(i), 8, 64, 123);
    all.insert(all.end(), t.values().begin(), t.values().end());
  }
  all.resize(10000);
  double mean = 0.0;
  for (double v : all) mean += v;
  mean /= 10000.0;
  double var = 0.0;
  for (double v : all) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / 9999.0);
  EXPECT_GT(mean, -0.05);
  EXPECT_LT(mean, 0.05);
  EXPECT_GT(sd, 0.97);
  EXPECT_LT(sd, 1.03);
}

TEST(AspectMean, Examples) {
  EXPECT_EQ(aspect_mean(Tensor::matrix({{1, 0}, {0, 1}})), Tensor::vector({0.5, 0.5}));
  EXPECT_EQ(aspect_mean(Tensor::matrix({{3, -1}})), Tensor::vector({3, -1}));
  EXPECT_EQ(aspect_mean(Tensor::matrix({{1, 2}, {5, 7}, {0, 3}})),
            aspect_mean(Tensor::matrix({{0, 3}, {1, 2}, {5, 7}})));
  EXPECT_THROW(aspect_mean(Tensor({0, 2})), ShapeError);
}

// ---------------------------------------------------------------- architectures

TEST(TcLstm, ContextsExcludeTheTarget) {
  // n = 5, span (2, 3): left context rows 0..1, right context row 4.
  AlsaModel model = make_model(Architecture::kTcLstm, 4);
  const Tensor words = sample_standard_normal(5, 4, 1);
  Graph g(model.params());
  const Tensor logits = g.value(model.forward(g, words, {2, 3}).logits);

  const auto rows = constant_rows(g, words);
  const Var mean = ops::mean_rows(g, ops::stack(g, {rows[2], rows[3]}));
  const LstmCellParams left{"tclstm.lstm_left", 8, 6}, right{"tclstm.lstm_right", 8, 6};
  const auto hl = run_lstm(g, {ops::concat(g, {rows[0], mean}), ops::concat(g, {rows[1], mean})},
                           left, Direction::kForward);
  const auto hr = run_lstm(g, {ops::concat(g, {rows[4], mean})}, right, Direction::kBackward);
  const Var ref = classify(g, LinearParams{"tclstm.head", 12, 3},
                           ops::concat(g, {hl.final_state, hr.final_state}));
  EXPECT_EQ(logits, g.value(ref));
}

TEST(TcLstm, WholeSentenceAspectUsesBiasOnly) {
  AlsaModel model = make_model(Architecture::kTcLstm, 4);
  randomize(model.params(), 2);
  const Prediction p = predict(model, sample_standard_normal(3, 4, 2), {0, 2});
  EXPECT_EQ(p.logits, model.params().value("tclstm.head.b"));
  EXPECT_FALSE(p.alpha.has_value());
}

TEST(TcLstm, Deterministic) {
  AlsaModel model = make_model(Architecture::kTcLstm, 4);
  const Tensor w = sample_standard_normal(6, 4, 3);
  EXPECT_EQ(predict(model, w, {1, 1}).logits, predict(model, w, {1, 1}).logits);
  EXPECT_EQ(predict(model, w, {1, 1}).logits.size(), 3u);
}

TEST(Atae, AlphaIsAProbabilityVector) {
  AlsaModel model = make_model(Architecture::kAtae, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 1 + seed % 7;
    const Prediction p = predict(model, sample_standard_normal(n, 5, seed), {0, 0});
    ASSERT_TRUE(p.alpha.has_value());
    EXPECT_EQ(p.alpha->size(), n);
    EXPECT_NEAR(sum(*p.alpha), 1.0, 1e-6);
    for (double a : p.alpha->values()) EXPECT_GE(a, 0.0);
  }
  EXPECT_EQ(*predict(model, sample_standard_normal(1, 5, 1), {0, 0}).alpha, Tensor::vector({1.0}));
}

TEST(Atae, ZeroScoringVectorGivesUniformAlpha) {
  AlsaModel model = make_model(Architecture::kAtae, 5);
  model.params().value("atae.attention.v").fill(0.0);
  const Prediction p = predict(model, sample_standard_normal(4, 5, 4), {1, 2});
  for (double a : p.alpha->values()) EXPECT_NEAR(a, 0.25, 1e-15);
}

TEST(Ian, AlphasValidAndSingleWordCase) {
  AlsaModel model = make_model(Architecture::kIan, 5);
  const Prediction p = predict(model, sample_standard_normal(6, 5, 5), {2, 4});
  ASSERT_TRUE(p.alpha && p.alpha_aspect);
  EXPECT_EQ(p.alpha->size(), 6u);
  EXPECT_EQ(p.alpha_aspect->size(), 3u);
  EXPECT_NEAR(sum(*p.alpha), 1.0, 1e-6);
  EXPECT_NEAR(sum(*p.alpha_aspect), 1.0, 1e-6);
  EXPECT_EQ(p.logits.size(), 3u);
  const Prediction one = predict(model, sample_standard_normal(1, 5, 6), {0, 0});
  EXPECT_EQ(*one.alpha, Tensor::vector({1.0}));
  EXPECT_EQ(*one.alpha_aspect, Tensor::vector({1.0}));
}

TEST(Architectures, InvalidSpanRejected) {
  for (Architecture a : kAll) {
    AlsaModel model = make_model(a, 3);
    EXPECT_THROW(predict(model, sample_standard_normal(3, 3, 1), {2, 3}), InvalidArgument);
    EXPECT_THROW(predict(model, sample_standard_normal(3, 3, 1), {2, 1}), InvalidArgument);
    EXPECT_THROW(predict(model, sample_standard_normal(3, 4, 1), {0, 0}), ShapeError);
  }
}

TEST(Architectures, LossesPassGradCheck) {
  for (Architecture a : kAll) {
    for (std::size_t n : {3u, 6u}) {
      AlsaModel model = make_model(a, 4, 5, 7);
      randomize(model.params(), 8 + n);
      const Tensor words = sample_standard_normal(n, 4, n);
      const AspectSpan span{1, 2};
      const auto r = grad_check([&](Graph& g) { return model.loss(g, words, span, Polarity::kNeutral); },
                                model.params());
      EXPECT_LT(r.max_relative_error, 1e-4)
          << architecture_name(a) << " n=" << n << " " << r.worst_param << "[" << r.worst_index << "] a=" << r.worst_analytic << " num=" << r.worst_numeric;
    }
  }
}

TEST(Transfer, ZeroWidthReducesToPlainBitForBit) {
  SentenceFixture f(16);
  TransferCache cache{{"s1", Tensor({6, 0})}};
  InputMode plain, transfer;
  transfer.variant = InputVariant::kTransfer;
  transfer.transfer = &cache;
  transfer.aux_dim = 0;
  const AlsaInput a = build_input(f.sample(), f.sentence(), plain, f.vocab);
  const AlsaInput b = build_input(f.sample(), f.sentence(), transfer, f.vocab);
  for (Architecture arch : kAll) {
    const AlsaModel pm = make_model(arch, plain.width(16));
    const AlsaModel tm = make_model(arch, transfer.width(16));
    const Prediction pp = predict(pm, a.words, f.sample().span);
    const Prediction tp = predict(tm, b.words, f.sample().span);
    EXPECT_EQ(pp.logits, tp.logits) << architecture_name(arch);
  }
}

TEST(Transfer, ModelAcceptsWidth364) {
  SentenceFixture f;
  TransferCache cache{{"s1", sample_standard_normal(6, 64, 1)}};
  InputMode mode;
  mode.variant = InputVariant::kTransfer;
  mode.transfer = &cache;
  const AlsaInput in = build_input(f.sample(), f.sentence(), mode, f.vocab);
  for (Architecture a : kAll) {
    const AlsaModel m = make_model(a, 364, 4);
    EXPECT_EQ(predict(m, in.words, f.sample().span).logits.size(), 3u);
  }
}

// ---------------------------------------------------------------- multi-task

namespace {

MultitaskModel small_multitask() {
  MultitaskConfig cfg;
  cfg.embed_dim = 4;
  cfg.shared_hidden = 3;
  cfg.alsa_hidden = 5;
  return MultitaskModel(cfg);
}

double grad_norm(const ParamStore& s, const std::string& prefix) {
  double n = 0.0;
  for (const auto& [name, e] : s.entries())
    if (name.rfind(prefix, 0) == 0)
      for (double v : e.grad.values()) n += v * v;
  return n;
}

}  // namespace

TEST(Multitask, SharedEncoderReceivesGradientFromEitherLoss) {
  MultitaskModel model = small_multitask();
  const Tensor words = sample_standard_normal(4, 4, 1);
  const BioSequence gold = bio_from_string("OBIO");
  forward_backward([&](Graph& g) { return model.ae_loss(g, words, gold); }, model.params());
  EXPECT_GT(grad_norm(model.params(), "mt.gru_"), 0.0);
  EXPECT_EQ(grad_norm(model.params(), "mt.atae"), 0.0);
  forward_backward([&](Graph& g) { return model.alsa_loss(g, words, {1, 2}, Polarity::kNegative); },
                   model.params());
  EXPECT_GT(grad_norm(model.params(), "mt.gru_"), 0.0);
  EXPECT_EQ(grad_norm(model.params(), "mt.crf"), 0.0);
}

TEST(Multitask, JointLossIsTheSum) {
  MultitaskModel model = small_multitask();
  const Tensor words = sample_standard_normal(5, 4, 2);
  const BioSequence gold = bio_from_string("BIOOB");
  const double joint = evaluate_loss(
      [&](Graph& g) { return model.joint_loss(g, words, {0, 1}, gold, Polarity::kPositive); },
      model.params());
  const double ae = evaluate_loss([&](Graph& g) { return model.ae_loss(g, words, gold); }, model.params());
  const double alsa = evaluate_loss(
      [&](Graph& g) { return model.alsa_loss(g, words, {0, 1}, Polarity::kPositive); }, model.params());
  EXPECT_NEAR(joint, ae + alsa, 1e-9);
}

TEST(Multitask, AlphaAndGradients) {
  MultitaskModel model = small_multitask();
  randomize(model.params(), 3);
  const Tensor words = sample_standard_normal(4, 4, 3);
  const Prediction p = predict(model, words, {2, 2});
  ASSERT_TRUE(p.alpha.has_value());
  EXPECT_NEAR(sum(*p.alpha), 1.0, 1e-6);
  const auto r = grad_check(
      [&](Graph& g) { return model.joint_loss(g, words, {2, 2}, bio_from_string("OOBO"), Polarity::kNeutral); },
      model.params());
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param << "[" << r.worst_index << "] a=" << r.worst_analytic << " n=" << r.worst_numeric;
}

// ---------------------------------------------------------------- majority

TEST(Majority, LaptopTrainPredictsPositive) {
  std::vector<Polarity> train;
  train.insert(train.end(), test::kLaptopTrain.positive, Polarity::kPositive);
  train.insert(train.end(), test::kLaptopTrain.negative, Polarity::kNegative);
  train.insert(train.end(), test::kLaptopTrain.neutral, Polarity::kNeutral);
  const auto pred = majority_predict(train, test::kLaptopTest.total());
  ASSERT_EQ(pred.size(), 638u);
  for (Polarity p : pred) EXPECT_EQ(p, Polarity::kPositive);

  std::vector<Polarity> gold;
  gold.insert(gold.end(), test::kLaptopTest.positive, Polarity::kPositive);
  gold.insert(gold.end(), test::kLaptopTest.negative, Polarity::kNegative);
  gold.insert(gold.end(), test::kLaptopTest.neutral, Polarity::kNeutral);
  const MetricsReport r = macro_f1(pred, gold);
  EXPECT_EQ(format_percent(r.macro_f1), "23.22");
  EXPECT_NEAR(r.macro_f1, majority_macro_f1(341, 638), 1e-15);
}

TEST(Majority, TiesAndEmptyInput) {
  const std::vector<Polarity> tie{Polarity::kNeutral, Polarity::kNegative};
  EXPECT_EQ(majority_label(tie), Polarity::kNegative);
  const std::vector<Polarity> tie3{Polarity::kNeutral, Polarity::kNegative, Polarity::kPositive};
  EXPECT_EQ(majority_label(tie3), Polarity::kPositive);
  EXPECT_THROW(majority_label(std::vector<Polarity>{}), InvalidArgument);
}
