#include "absa/layers.hpp"

#include <tuple>

#include "absa/error.hpp"

namespace absa {
namespace {

std::string key(const std::string& prefix, const char* leaf) { return prefix + "." + leaf; }

Var zeros(Graph& g, std::size_t n) { return g.constant(Tensor({n})); }

void check_input(const char* what, const Graph& g, Var x, std::size_t expected) {
  const Tensor& v = g.value(x);
  if (v.rank() != 1 || v.size() != expected) {
    throw ShapeError(std::string(what) + ": input " + shape_string(v.shape()) +
                     ", cell expects [" + std::to_string(expected) + "]");
  }
}

}  // namespace

void GruCellParams::init(ParamStore& store, Rng& rng) const {
  for (const char* gate : {"z", "r", "c"}) {
    store.add(key(prefix, (std::string("W") + gate).c_str()),
              glorot_uniform(hidden_dim, input_dim, rng));
    store.add(key(prefix, (std::string("U") + gate).c_str()),
              glorot_uniform(hidden_dim, hidden_dim, rng));
    store.add(key(prefix, (std::string("b") + gate).c_str()), Tensor({hidden_dim}));
  }
}

Var GruCellParams::step(Graph& g, Var x, Var h) const {
  check_input("gru step", g, x, input_dim);
  auto p = [&](const char* leaf) { return g.param(key(prefix, leaf)); };
  auto gate = [&](const char* w, const char* u, const char* b, Var hin) {
    return ops::add(g, ops::affine(g, p(w), x, p(b)), ops::matvec(g, p(u), hin));
  };
  const Var z = ops::sigmoid(g, gate("Wz", "Uz", "bz", h));
  const Var r = ops::sigmoid(g, gate("Wr", "Ur", "br", h));
  const Var c = ops::tanh(g, gate("Wc", "Uc", "bc", ops::mul(g, r, h)));
  return ops::add(g, ops::mul(g, z, h), ops::mul(g, ops::one_minus(g, z), c));
}

void LstmCellParams::init(ParamStore& store, Rng& rng) const {
  for (const char* gate : {"i", "f", "o", "g"}) {
    store.add(key(prefix, (std::string("W") + gate).c_str()),
              glorot_uniform(hidden_dim, input_dim, rng));
    store.add(key(prefix, (std::string("U") + gate).c_str()),
              glorot_uniform(hidden_dim, hidden_dim, rng));
    store.add(key(prefix, (std::string("b") + gate).c_str()),
              Tensor({hidden_dim}, gate[0] == 'f' ? 1.0 : 0.0));
  }
}

std::pair<Var, Var> LstmCellParams::step(Graph& g, Var x, Var h, Var c) const {
  check_input("lstm step", g, x, input_dim);
  auto p = [&](const char* leaf) { return g.param(key(prefix, leaf)); };
  auto pre = [&](const char* w, const char* u, const char* b) {
    return ops::add(g, ops::affine(g, p(w), x, p(b)), ops::matvec(g, p(u), h));
  };
  const Var i = ops::sigmoid(g, pre("Wi", "Ui", "bi"));
  const Var f = ops::sigmoid(g, pre("Wf", "Uf", "bf"));
  const Var o = ops::sigmoid(g, pre("Wo", "Uo", "bo"));
  const Var cand = ops::tanh(g, pre("Wg", "Ug", "bg"));
  const Var c_next = ops::add(g, ops::mul(g, f, c), ops::mul(g, i, cand));
  const Var h_next = ops::mul(g, o, ops::tanh(g, c_next));
  return {h_next, c_next};
}

void AttentionParams::init(ParamStore& store, Rng& rng) const {
  const std::size_t a = effective_attn_dim();
  // Glorot limits use the full [key ; query] fan-in.
  Tensor w = glorot_uniform(a, key_dim + query_dim, rng);
  Tensor wk({a, key_dim}), wq({a, query_dim});
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < key_dim; ++j) wk.at(i, j) = w.at(i, j);
    for (std::size_t j = 0; j < query_dim; ++j) wq.at(i, j) = w.at(i, key_dim + j);
  }
  store.add(key(prefix, "Wk"), std::move(wk));
  store.add(key(prefix, "Wq"), std::move(wq));
  store.add(key(prefix, "b"), Tensor({a}));
  Tensor v = glorot_uniform(1, a, rng);
  store.add(key(prefix, "v"), Tensor({a}, std::vector<double>(v.values().begin(), v.values().end())));
}

void LinearParams::init(ParamStore& store, Rng& rng) const {
  store.add(key(prefix, "W"), glorot_uniform(output_dim, input_dim, rng));
  store.add(key(prefix, "b"), Tensor({output_dim}));
}

Tensor embed(std::span<const std::size_t> ids, const Tensor& table) {
  if (table.rank() != 2) {
    throw ShapeError("embed: table must be a matrix, got " + shape_string(table.shape()));
  }
  const std::size_t d = table.cols();
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.rows()) {
      throw InvalidArgument("embed: token id " + std::to_string(ids[i]) +
                            " out of range for vocabulary of size " +
                            std::to_string(table.rows()));
    }
    std::copy_n(table.data() + ids[i] * d, d, out.data() + i * d);
  }
  return out;
}

std::vector<Var> run_gru(Graph& g, const GruCellParams& cell,
                         const std::vector<Var>& inputs, Direction dir) {
  const std::size_t n = inputs.size();
  std::vector<Var> states(n);
  Var h = zeros(g, cell.hidden_dim);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = dir == Direction::kForward ? t : n - 1 - t;
    h = cell.step(g, inputs[i], h);
    states[i] = h;
  }
  return states;
}

Var run_bigru(Graph& g, const std::vector<Var>& inputs, const GruCellParams& fwd,
              const GruCellParams& bwd) {
  if (inputs.empty()) throw ShapeError("run_bigru: empty input sequence");
  if (fwd.input_dim != bwd.input_dim) {
    throw ShapeError("run_bigru: forward/backward cells disagree on input_dim");
  }
  const auto f = run_gru(g, fwd, inputs, Direction::kForward);
  const auto b = run_gru(g, bwd, inputs, Direction::kBackward);
  std::vector<Var> rows;
  rows.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) rows.push_back(ops::concat(g, {f[i], b[i]}));
  return ops::stack(g, rows);
}

LstmRun run_lstm(Graph& g, const std::vector<Var>& inputs, const LstmCellParams& cell,
                 Direction dir) {
  const std::size_t n = inputs.size();
  LstmRun out;
  out.states.resize(n);
  Var h = zeros(g, cell.hidden_dim);
  Var c = zeros(g, cell.hidden_dim);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = dir == Direction::kForward ? t : n - 1 - t;
    std::tie(h, c) = cell.step(g, inputs[i], h, c);
    out.states[i] = h;
  }
  out.final_state = h;
  return out;
}

AttentionResult additive_attention(Graph& g, const AttentionParams& params,
                                   const std::vector<Var>& keys, Var query) {
  if (keys.empty()) throw ShapeError("additive_attention: no keys");
  const Tensor& qv = g.value(query);
  if (qv.rank() != 1 || qv.size() != params.query_dim) {
    throw ShapeError("additive_attention: query " + shape_string(qv.shape()) +
                     ", expected [" + std::to_string(params.query_dim) + "]");
  }
  const Var wk = g.param(key(params.prefix, "Wk"));
  const Var v = g.param(key(params.prefix, "v"));
  const Var query_part =
      ops::affine(g, g.param(key(params.prefix, "Wq")), query, g.param(key(params.prefix, "b")));
  std::vector<Var> scores;
  scores.reserve(keys.size());
  for (Var k : keys) {
    const Var hidden = ops::tanh(g, ops::add(g, ops::matvec(g, wk, k), query_part));
    scores.push_back(ops::dot(g, v, hidden));
  }
  const Var alpha = ops::softmax(g, ops::concat(g, scores));
  const Var pooled = ops::weighted_rows(g, alpha, ops::stack(g, keys));
  return {alpha, pooled};
}

Var classify(Graph& g, const LinearParams& head, Var features) {
  const Tensor& f = g.value(features);
  if (f.rank() != 1 || f.size() != head.input_dim) {
    throw ShapeError("classify: features " + shape_string(f.shape()) + ", head expects [" +
                     std::to_string(head.input_dim) + "]");
  }
  return ops::affine(g, g.param(key(head.prefix, "W")), features,
                     g.param(key(head.prefix, "b")));
}

Var max_pool_rows(Graph& g, const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeError("max_pool_rows: no rows");
  return ops::max_rows(g, ops::stack(g, rows));
}

std::vector<Var> constant_rows(Graph& g, const Tensor& matrix) {
  if (matrix.rank() != 2) {
    throw ShapeError("constant_rows: expected a matrix, got " + shape_string(matrix.shape()));
  }
  std::vector<Var> out;
  out.reserve(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) out.push_back(g.constant(matrix.row_tensor(i)));
  return out;
}

}  // namespace absa
