#include <gtest/gtest.h>

#include <cmath>

#include "absa/crf.hpp"
#include "absa/error.hpp"
#include "absa/grad_check.hpp"
#include "absa/optim.hpp"
#include "absa/random.hpp"
#include "oracles.hpp"

using namespace absa;

namespace {

CrfScores random_scores(Rng& rng, double scale = 1.0) {
  CrfScores c;
  c.transitions = sample_uniform({3, 3}, -scale, scale, rng);
  c.start = sample_uniform({3}, -scale, scale, rng);
  c.end = sample_uniform({3}, -scale, scale, rng);
  return c;
}

using test::Enumerated;
using test::enumerate;

}  // namespace

TEST(Bio, StringRoundTrip) {
  EXPECT_EQ(bio_string(bio_from_string("BIOOB")), "BIOOB");
  EXPECT_THROW(bio_from_string("BX"), InvalidArgument);
}

TEST(PathScore, Examples) {
  CrfScores zero;
  EXPECT_EQ(path_score(Tensor({3, 3}), bio_from_string("BIO"), zero), 0.0);
  EXPECT_EQ(path_score(Tensor::matrix({{1, 2, 3}}), bio_from_string("O"), zero), 3.0);
  CrfScores t;
  t.transitions.at(0, 1) = 0.7;
  EXPECT_DOUBLE_EQ(path_score(Tensor({2, 3}), bio_from_string("BI"), t), 0.7);
  EXPECT_THROW(path_score(Tensor({2, 3}), bio_from_string("B"), t), ShapeError);
}

TEST(LogPartition, UniformCases) {
  CrfScores zero;
  EXPECT_NEAR(log_partition(Tensor({1, 3}), zero), std::log(3.0), 1e-15);
  EXPECT_NEAR(log_partition(Tensor({2, 3}), zero), std::log(9.0), 1e-15);
  EXPECT_NEAR(crf_nll(Tensor({1, 3}), bio_from_string("I"), zero), std::log(3.0), 1e-15);
}

TEST(Viterbi, Examples) {
  CrfScores zero;
  EXPECT_EQ(bio_string(viterbi(Tensor({4, 3}), zero)), "BBBB");
  EXPECT_EQ(bio_string(viterbi(Tensor::matrix({{0, 0, 5}}), zero)), "O");
}

TEST(Crf, AgreesWithEnumerationOnRandomInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 250; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
    const CrfScores c = random_scores(rng, 2.0);
    const Tensor em = sample_uniform({n, 3}, -3, 3, rng);
    const Enumerated e = enumerate(em, c);
    EXPECT_NEAR(log_partition(em, c), e.log_z, 1e-8);
    EXPECT_NEAR(e.prob_mass, 1.0, 1e-8);
    const BioSequence v = viterbi(em, c);
    EXPECT_EQ(v, e.best) << "trial " << trial;
    EXPECT_EQ(path_score(em, v, c), e.best_score);
    const BruteForceResult b = brute_force_oracle(em, c);
    EXPECT_NEAR(b.log_partition, e.log_z, 1e-8);
    EXPECT_EQ(b.best_path, e.best);
  }
}

TEST(Crf, FivePathsOf243) {
  Rng rng(5);
  const CrfScores c = random_scores(rng);
  const Tensor em = sample_uniform({5, 3}, -1, 1, rng);
  const Enumerated e = enumerate(em, c);
  EXPECT_NEAR(log_partition(em, c), e.log_z, 1e-8);
  EXPECT_EQ(viterbi(em, c), e.best);
}

TEST(Crf, NllNonNegativeAndDominance) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 7);
    const CrfScores c = random_scores(rng, 3.0);
    const Tensor em = sample_uniform({n, 3}, -5, 5, rng);
    BioSequence gold(n);
    for (auto& l : gold) l = static_cast<BioLabel>(rng() % 3);
    EXPECT_GE(crf_nll(em, gold, c), 0.0);
  }
  const BioSequence gold = bio_from_string("OBIO");
  Tensor em({4, 3});
  for (std::size_t i = 0; i < 4; ++i) em.at(i, static_cast<std::size_t>(gold[i])) = 100.0;
  EXPECT_LT(crf_nll(em, gold, CrfScores{}), 1e-3);
}

TEST(Crf, EmissionShiftInvariance) {
  Rng rng(7);
  const CrfScores c = random_scores(rng);
  const Tensor em = sample_uniform({5, 3}, -2, 2, rng);
  Tensor shifted = em;
  for (double& v : shifted.values()) v += 1.75;
  EXPECT_NEAR(log_partition(shifted, c), log_partition(em, c) + 5 * 1.75, 1e-10);
  EXPECT_EQ(viterbi(shifted, c), viterbi(em, c));
}

TEST(BruteForce, LengthGuard) {
  CrfScores zero;
  const auto one = brute_force_oracle(Tensor({1, 3}), zero);
  EXPECT_NEAR(one.log_partition, std::log(3.0), 1e-15);
  EXPECT_EQ(bio_string(one.best_path), "B");
  EXPECT_NO_THROW(brute_force_oracle(Tensor({8, 3}), zero));
  EXPECT_THROW(brute_force_oracle(Tensor({9, 3}), zero), InvalidArgument);
}

TEST(Crf, GraphNllMatchesTensorNllAndGradients) {
  ParamStore s;
  Rng rng(8);
  s.add("em", sample_uniform({5, 3}, -2, 2, rng));
  s.add("trans", sample_uniform({3, 3}, -1, 1, rng));
  s.add("start", sample_uniform({3}, -1, 1, rng));
  s.add("end", sample_uniform({3}, -1, 1, rng));
  const BioSequence gold = bio_from_string("OBIIO");
  LossFn fn = [&](Graph& g) {
    return crf_nll(g, g.param("em"), g.param("trans"), g.param("start"), g.param("end"), gold);
  };
  const CrfScores c{s.value("trans"), s.value("start"), s.value("end")};
  EXPECT_NEAR(evaluate_loss(fn, s), crf_nll(s.value("em"), gold, c), 1e-12);
  const auto r = grad_check(fn, s);
  EXPECT_LT(r.max_relative_error, 1e-6) << r.worst_param;
}

TEST(Crf, EmissionLayerGradients) {
  ParamStore s;
  Rng rng(9);
  const CrfParams crf{"crf", 4};
  crf.init(s, rng);
  for (auto& [n, e] : s.entries()) e.value = sample_uniform(e.value.shape(), -1, 1, rng);
  const Tensor feats = sample_uniform({3, 4}, -1, 1, rng);
  LossFn fn = [&](Graph& g) {
    return crf.nll(g, crf.emissions(g, g.constant(feats)), bio_from_string("BIO"));
  };
  EXPECT_LT(grad_check(fn, s).max_relative_error, 1e-6);
  Graph g(s);
  EXPECT_THROW(crf.nll(g, crf.emissions(g, g.constant(feats)), bio_from_string("BI")), ShapeError);
}
