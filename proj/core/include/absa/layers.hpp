#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absa/graph.hpp"
#include "absa/param_store.hpp"
#include "absa/random.hpp"
#include "absa/tensor.hpp"

namespace absa {

enum class Direction { kForward, kBackward };

// Each *Params struct names a block of entries in a ParamStore under
// `prefix`; init() registers them with their initial values.

// z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
// c = tanh(Wc x + Uc (r * h) + bc), h' = z * h + (1 - z) * c.
struct GruCellParams {
  std::string prefix;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  void init(ParamStore& store, Rng& rng) const;
  Var step(Graph& g, Var x, Var h) const;
};

// Standard LSTM with input/forget/output gates and tanh cell candidate.
// The forget-gate bias starts at 1.
struct LstmCellParams {
  std::string prefix;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  void init(ParamStore& store, Rng& rng) const;
  // Returns (h', c').
  std::pair<Var, Var> step(Graph& g, Var x, Var h, Var c) const;
};

// score_i = v . tanh(W [key_i ; query] + b). W is stored as its key and
// query column blocks.
struct AttentionParams {
  std::string prefix;
  std::size_t key_dim = 0;
  std::size_t query_dim = 0;
  std::size_t attn_dim = 0;  // 0 means key_dim

  std::size_t effective_attn_dim() const { return attn_dim ? attn_dim : key_dim; }
  void init(ParamStore& store, Rng& rng) const;
};

// Affine map to `output_dim` logits.
struct LinearParams {
  std::string prefix;
  std::size_t input_dim = 0;
  std::size_t output_dim = 3;

  void init(ParamStore& store, Rng& rng) const;
};

// Row i of the result is row ids[i] of `table`; empty ids give 0 x d.
Tensor embed(std::span<const std::size_t> ids, const Tensor& table);

// States aligned with input positions. Forward: state i has consumed
// inputs[0..i]; backward: inputs[n-1..i]. Initial state is zero.
std::vector<Var> run_gru(Graph& g, const GruCellParams& cell,
                         const std::vector<Var>& inputs, Direction dir);

// n x (2 * hidden) matrix; row i = [forward_i ; backward_i]. Throws on n = 0.
Var run_bigru(Graph& g, const std::vector<Var>& inputs, const GruCellParams& fwd,
              const GruCellParams& bwd);

struct LstmRun {
  std::vector<Var> states;  // aligned with input positions
  Var final_state;          // zero vector for empty input
};

LstmRun run_lstm(Graph& g, const std::vector<Var>& inputs, const LstmCellParams& cell,
                 Direction dir);

struct AttentionResult {
  Var alpha;   // [n], softmax over scores
  Var pooled;  // [key_dim], sum_i alpha_i key_i
};

// Throws ShapeError on an empty key list.
AttentionResult additive_attention(Graph& g, const AttentionParams& params,
                                   const std::vector<Var>& keys, Var query);

Var classify(Graph& g, const LinearParams& head, Var features);

// Coordinate-wise max over the rows; throws on an empty list.
Var max_pool_rows(Graph& g, const std::vector<Var>& rows);

// Converts each row of a constant matrix into a graph leaf.
std::vector<Var> constant_rows(Graph& g, const Tensor& matrix);

}  // namespace absa
