#include <benchmark/benchmark.h>

#include "absa/ae.hpp"
#include "absa/alsa.hpp"
#include "absa/crf.hpp"
#include "absa/optim.hpp"
#include "absa/random.hpp"

using namespace absa;

namespace {

CrfScores random_scores() {
  Rng rng(1);
  CrfScores c;
  c.transitions = sample_uniform({3, 3}, -1, 1, rng);
  c.start = sample_uniform({3}, -1, 1, rng);
  c.end = sample_uniform({3}, -1, 1, rng);
  return c;
}

void BM_CrfViterbi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CrfScores c = random_scores();
  const Tensor em = sample_standard_normal(n, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(em, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CrfViterbi)->Arg(8)->Arg(32)->Arg(128);

void BM_CrfLogPartition(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CrfScores c = random_scores();
  const Tensor em = sample_standard_normal(n, 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(log_partition(em, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CrfLogPartition)->Arg(8)->Arg(32)->Arg(128);

std::vector<std::string> tokens(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

// Forward and backward of the BiGRU-CRF tagger on one sentence.
void BM_AeTrainStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vocabulary vocab = random_vocabulary(tokens(n), 300, 1);
  AeConfig cfg;
  AeModel model(cfg, vocab);
  const auto ids = vocab.ids(tokens(n));
  BioSequence gold(n, BioLabel::kO);
  gold[1] = BioLabel::kB;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        forward_backward([&](Graph& g) { return model.loss(g, ids, gold); }, model.params()));
  }
}
BENCHMARK(BM_AeTrainStep)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_AlsaTrainStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  AlsaConfig cfg;
  cfg.architecture = static_cast<Architecture>(state.range(0));
  cfg.input_dim = 364;
  AlsaModel model(cfg);
  const Tensor words = sample_standard_normal(n, 364, 4);
  state.SetLabel(std::string(architecture_name(cfg.architecture)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_backward(
        [&](Graph& g) { return model.loss(g, words, {2, 3}, Polarity::kNegative); }, model.params()));
  }
}
BENCHMARK(BM_AlsaTrainStep)
    ->Args({static_cast<int>(Architecture::kTcLstm), 20})
    ->Args({static_cast<int>(Architecture::kAtae), 20})
    ->Args({static_cast<int>(Architecture::kIan), 20})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
