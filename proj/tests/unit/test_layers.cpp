#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "absa/error.hpp"
#include "absa/grad_check.hpp"
#include "absa/layers.hpp"
#include "absa/optim.hpp"
#include "absa/random.hpp"

using namespace absa;

namespace {

using Vec = std::vector<double>;

// Plain-loop references.
Vec matvec(const Tensor& w, const Vec& x) {
  Vec out(w.rows(), 0.0);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) out[i] += w.at(i, j) * x[j];
  return out;
}
double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec ref_gru_step(const ParamStore& s, const std::string& p, const Vec& x, const Vec& h) {
  auto gate = [&](const char* g, const Vec& hin) {
    Vec a = matvec(s.value(p + ".W" + g), x);
    const Vec b = matvec(s.value(p + ".U" + g), hin);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i] + s.value(p + ".b" + g)[i];
    return a;
  };
  Vec z = gate("z", h), r = gate("r", h);
  for (auto& v : z) v = sigm(v);
  for (auto& v : r) v = sigm(v);
  Vec rh(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) rh[i] = r[i] * h[i];
  Vec c = gate("c", rh);
  Vec out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = z[i] * h[i] + (1 - z[i]) * std::tanh(c[i]);
  return out;
}

std::pair<Vec, Vec> ref_lstm_step(const ParamStore& s, const std::string& p, const Vec& x,
                                  const Vec& h, const Vec& c) {
  auto pre = [&](const char* g) {
    Vec a = matvec(s.value(p + ".W" + g), x);
    const Vec b = matvec(s.value(p + ".U" + g), h);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i] + s.value(p + ".b" + g)[i];
    return a;
  };
  const Vec i = pre("i"), f = pre("f"), o = pre("o"), g = pre("g");
  Vec c2(h.size()), h2(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    c2[k] = sigm(f[k]) * c[k] + sigm(i[k]) * std::tanh(g[k]);
    h2[k] = sigm(o[k]) * std::tanh(c2[k]);
  }
  return {h2, c2};
}

Vec vals(const Tensor& t) { return Vec(t.values().begin(), t.values().end()); }

Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return sample_uniform({r, c}, -1.0, 1.0, rng);
}

void zero_all(ParamStore& s) {
  for (auto& [name, e] : s.entries()) e.value.fill(0.0);
}

}  // namespace

TEST(Embed, LooksUpRows) {
  const Tensor table = Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const std::vector<std::size_t> zero{0};
  EXPECT_EQ(embed(zero, table), Tensor::matrix({{1, 0, 0}}));
  const std::vector<std::size_t> none;
  EXPECT_EQ(embed(none, table).shape(), (Shape{0, 3}));
  const std::vector<std::size_t> twice{2, 2};
  const Tensor e = embed(twice, table);
  EXPECT_EQ(e.row_tensor(0), e.row_tensor(1));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(embed(bad, table), InvalidArgument);
}

TEST(Gru, MatchesReferenceRecurrence) {
  ParamStore s;
  Rng rng(1);
  const GruCellParams cell{"g", 4, 5};
  cell.init(s, rng);
  for (auto& [n, e] : s.entries()) e.value = sample_uniform(e.value.shape(), -0.8, 0.8, rng);
  const Tensor x = random_matrix(3, 4, 9);
  Graph g(s);
  const auto states = run_gru(g, cell, constant_rows(g, x), Direction::kForward);
  Vec h(5, 0.0);
  for (std::size_t t = 0; t < 3; ++t) {
    h = ref_gru_step(s, "g", vals(x.row_tensor(t)), h);
    const Vec got = vals(g.value(states[t]));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(got[i], h[i], 1e-12);
  }
}

TEST(BiGru, SingleStepRowIsConcatOfStates) {
  ParamStore s;
  Rng rng(2);
  const GruCellParams f{"f", 3, 2}, b{"b", 3, 2};
  f.init(s, rng);
  b.init(s, rng);
  const Tensor x = random_matrix(1, 3, 4);
  Graph g(s);
  const Tensor out = g.value(run_bigru(g, constant_rows(g, x), f, b));
  ASSERT_EQ(out.shape(), (Shape{1, 4}));
  const Vec hf = ref_gru_step(s, "f", vals(x.row_tensor(0)), Vec(2, 0.0));
  const Vec hb = ref_gru_step(s, "b", vals(x.row_tensor(0)), Vec(2, 0.0));
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(out.at(0, i), hf[i], 1e-12);
    EXPECT_NEAR(out.at(0, 2 + i), hb[i], 1e-12);
  }
}

TEST(BiGru, ZeroParametersAndInputsGiveZeros) {
  // z = sigmoid(0) = 0.5, c = tanh(0) = 0, so h stays 0.
  ParamStore s;
  Rng rng(3);
  const GruCellParams f{"f", 4, 3}, b{"b", 4, 3};
  f.init(s, rng);
  b.init(s, rng);
  zero_all(s);
  Graph g(s);
  EXPECT_EQ(g.value(run_bigru(g, constant_rows(g, Tensor({5, 4})), f, b)), Tensor({5, 6}, 0.0));
}

TEST(BiGru, ReversalSymmetry) {
  ParamStore s;
  Rng rng(4);
  const GruCellParams f{"f", 3, 4}, b{"b", 3, 4};
  f.init(s, rng);
  b.init(s, rng);
  const Tensor x = random_matrix(5, 3, 11);
  Tensor xr({5, 3});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) xr.at(i, j) = x.at(4 - i, j);
  Graph g(s);
  const Tensor out = g.value(run_bigru(g, constant_rows(g, x), f, b));
  const Tensor swapped = g.value(run_bigru(g, constant_rows(g, xr), b, f));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_DOUBLE_EQ(out.at(i, j), swapped.at(4 - i, 4 + j));
      EXPECT_DOUBLE_EQ(out.at(i, 4 + j), swapped.at(4 - i, j));
    }
}

TEST(BiGru, WidthIsTwiceHidden) {
  ParamStore s;
  Rng rng(5);
  const GruCellParams f{"f", 6, 32}, b{"b", 6, 32};
  f.init(s, rng);
  b.init(s, rng);
  Graph g(s);
  EXPECT_EQ(g.value(run_bigru(g, constant_rows(g, random_matrix(4, 6, 1)), f, b)).cols(), 64u);
  EXPECT_THROW(run_bigru(g, {}, f, b), ShapeError);
}

TEST(Lstm, ForgetBiasStartsAtOne) {
  ParamStore s;
  Rng rng(6);
  LstmCellParams{"l", 3, 4}.init(s, rng);
  EXPECT_EQ(s.value("l.bf"), Tensor({4}, 1.0));
  EXPECT_EQ(s.value("l.bi"), Tensor({4}, 0.0));
}

TEST(Lstm, EmptyInputGivesZeroFinalState) {
  ParamStore s;
  Rng rng(7);
  const LstmCellParams cell{"l", 3, 4};
  cell.init(s, rng);
  Graph g(s);
  const auto run = run_lstm(g, {}, cell, Direction::kForward);
  EXPECT_TRUE(run.states.empty());
  EXPECT_EQ(g.value(run.final_state), Tensor({4}, 0.0));
}

TEST(Lstm, ZeroWeightsOneStep) {
  // i = f = o = 0.5, g = 0, so c = 0 and h = 0.
  ParamStore s;
  Rng rng(8);
  const LstmCellParams cell{"l", 2, 3};
  cell.init(s, rng);
  zero_all(s);
  Graph g(s);
  const auto run = run_lstm(g, constant_rows(g, Tensor({1, 2})), cell, Direction::kForward);
  EXPECT_EQ(g.value(run.final_state), Tensor({3}, 0.0));
}

TEST(Lstm, MatchesReferenceAndDirectionSymmetry) {
  ParamStore s;
  Rng rng(9);
  const LstmCellParams cell{"l", 3, 4};
  cell.init(s, rng);
  const Tensor x = random_matrix(3, 3, 12);
  Graph g(s);
  const auto fwd = run_lstm(g, constant_rows(g, x), cell, Direction::kForward);
  Vec h(4, 0.0), c(4, 0.0);
  for (std::size_t t = 0; t < 3; ++t) {
    std::tie(h, c) = ref_lstm_step(s, "l", vals(x.row_tensor(t)), h, c);
    const Vec got = vals(g.value(fwd.states[t]));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(got[i], h[i], 1e-12);
  }
  Tensor xr({3, 3});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) xr.at(i, j) = x.at(2 - i, j);
  const auto bwd = run_lstm(g, constant_rows(g, xr), cell, Direction::kBackward);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(g.value(bwd.states[t]), g.value(fwd.states[2 - t]));
  EXPECT_EQ(g.value(bwd.final_state), g.value(fwd.final_state));
}

namespace {

struct AttentionFixture {
  ParamStore s;
  AttentionParams p{"att", 3, 2, 4};
  AttentionFixture() {
    Rng rng(10);
    p.init(s, rng);
  }
};

}  // namespace

TEST(Attention, MatchesReferenceScores) {
  AttentionFixture f;
  const Tensor keys = random_matrix(4, 3, 13);
  const Vec q{0.3, -0.6};
  Graph g(f.s);
  const auto r = additive_attention(g, f.p, constant_rows(g, keys), g.constant(Tensor::vector(q)));
  Vec scores;
  for (std::size_t i = 0; i < 4; ++i) {
    Vec a = matvec(f.s.value("att.Wk"), vals(keys.row_tensor(i)));
    const Vec b = matvec(f.s.value("att.Wq"), q);
    double sc = 0.0;
    for (std::size_t k = 0; k < 4; ++k) sc += f.s.value("att.v")[k] * std::tanh(a[k] + b[k] + f.s.value("att.b")[k]);
    scores.push_back(sc);
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double v : scores) z += std::exp(v - mx);
  Vec pooled(3, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    const double a = std::exp(scores[i] - mx) / z;
    EXPECT_NEAR(g.value(r.alpha)[i], a, 1e-12);
    for (std::size_t j = 0; j < 3; ++j) pooled[j] += a * keys.at(i, j);
  }
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(g.value(r.pooled)[j], pooled[j], 1e-12);
}

TEST(Attention, IdenticalKeysSplitEvenly) {
  AttentionFixture f;
  Graph g(f.s);
  const Var k = g.constant(Tensor::vector({0.2, 0.4, -1.0}));
  const auto r = additive_attention(g, f.p, {k, k}, g.constant(Tensor::vector({1, 2})));
  EXPECT_NEAR(g.value(r.alpha)[0], 0.5, 1e-15);
  EXPECT_NEAR(g.value(r.alpha)[1], 0.5, 1e-15);
}

TEST(Attention, SingleKey) {
  AttentionFixture f;
  Graph g(f.s);
  const Tensor key = Tensor::vector({0.2, 0.4, -1.0});
  const auto r = additive_attention(g, f.p, {g.constant(key)}, g.constant(Tensor::vector({1, 2})));
  EXPECT_EQ(g.value(r.alpha), Tensor::vector({1.0}));
  EXPECT_EQ(g.value(r.pooled), key);
}

TEST(Attention, ZeroScoringVectorGivesUniform) {
  AttentionFixture f;
  f.s.value("att.v").fill(0.0);
  Graph g(f.s);
  const auto r = additive_attention(g, f.p, constant_rows(g, random_matrix(5, 3, 2)),
                                    g.constant(Tensor::vector({1, 2})));
  for (double a : g.value(r.alpha).values()) EXPECT_NEAR(a, 0.2, 1e-15);
}

TEST(Attention, PermutationEquivariantAndValid) {
  AttentionFixture f;
  const Tensor keys = random_matrix(4, 3, 14);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  Tensor permuted({4, 3});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) permuted.at(i, j) = keys.at(perm[i], j);
  Graph g(f.s);
  const Var q = g.constant(Tensor::vector({-0.5, 0.9}));
  const Tensor a = g.value(additive_attention(g, f.p, constant_rows(g, keys), q).alpha);
  const Tensor b = g.value(additive_attention(g, f.p, constant_rows(g, permuted), q).alpha);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(b[i], a[perm[i]], 1e-15);
    EXPECT_GE(a[i], 0.0);
    sum += a[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(Attention, EmptyKeysRejected) {
  AttentionFixture f;
  Graph g(f.s);
  EXPECT_THROW(additive_attention(g, f.p, {}, g.constant(Tensor::vector({1, 2}))), ShapeError);
}

TEST(Classify, ZeroWeightsAndBias) {
  ParamStore s;
  Rng rng(15);
  const LinearParams head{"head", 4, 3};
  head.init(s, rng);
  zero_all(s);
  Graph g(s);
  const Var x = g.constant(Tensor::vector({1, 2, 3, 4}));
  const Tensor logits = g.value(classify(g, head, x));
  EXPECT_EQ(logits, Tensor({3}, 0.0));
  for (double p : softmax(logits.values())) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  s.value("head.b")[0] = 1.0;
  Graph g2(s);
  const Tensor l2 = g2.value(classify(g2, head, g2.constant(Tensor::vector({1, 2, 3, 4}))));
  EXPECT_EQ(std::max_element(l2.values().begin(), l2.values().end()) - l2.values().begin(), 0);
  EXPECT_THROW(classify(g2, head, g2.constant(Tensor::vector({1, 2}))), ShapeError);
}

TEST(Classify, ProbabilitiesNormalized) {
  ParamStore s;
  Rng rng(16);
  const LinearParams head{"head", 5, 3};
  head.init(s, rng);
  for (int t = 0; t < 20; ++t) {
    Graph g(s);
    const Tensor l = g.value(classify(g, head, g.constant(sample_uniform({5}, -10, 10, rng))));
    const auto p = softmax(l.values());
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-9);
  }
}

TEST(MaxPool, Examples) {
  Graph g;
  const Var a = g.constant(Tensor::vector({1, 0}));
  const Var b = g.constant(Tensor::vector({0, 1}));
  EXPECT_EQ(g.value(max_pool_rows(g, {a, b})), Tensor::vector({1, 1}));
  EXPECT_EQ(g.value(max_pool_rows(g, {a})), Tensor::vector({1, 0}));
  const Tensor m = random_matrix(5, 4, 17);
  auto rows = constant_rows(g, m);
  const Tensor p1 = g.value(max_pool_rows(g, rows));
  std::reverse(rows.begin(), rows.end());
  std::rotate(rows.begin(), rows.begin() + 2, rows.end());
  EXPECT_EQ(g.value(max_pool_rows(g, rows)), p1);
  EXPECT_THROW(max_pool_rows(g, {}), ShapeError);
}

TEST(Layers, ComposedGradientsPassGradCheck) {
  ParamStore s;
  Rng rng(18);
  const GruCellParams f{"f", 3, 4}, b{"b", 3, 4};
  const LstmCellParams l{"l", 8, 5};
  const AttentionParams att{"att", 5, 8, 0};
  const LinearParams head{"head", 5, 3};
  f.init(s, rng);
  b.init(s, rng);
  l.init(s, rng);
  att.init(s, rng);
  head.init(s, rng);
  const Tensor x = random_matrix(4, 3, 19);
  LossFn fn = [&](Graph& g) {
    const Var h = run_bigru(g, constant_rows(g, x), f, b);
    const auto rows = ops::unstack(g, h);
    const auto run = run_lstm(g, rows, l, Direction::kBackward);
    const auto r = additive_attention(g, att, run.states, max_pool_rows(g, rows));
    return ops::softmax_cross_entropy(g, classify(g, head, r.pooled), 1);
  };
  const auto res = grad_check(fn, s);
  EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_param << "[" << res.worst_index << "]";
}
