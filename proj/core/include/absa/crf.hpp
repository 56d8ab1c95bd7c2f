#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "absa/graph.hpp"
#include "absa/param_store.hpp"
#include "absa/random.hpp"
#include "absa/tensor.hpp"

namespace absa {

enum class BioLabel : std::uint8_t { kB = 0, kI = 1, kO = 2 };
inline constexpr std::size_t kNumBioLabels = 3;

using BioSequence = std::vector<BioLabel>;

char bio_char(BioLabel l);
BioLabel bio_from_char(char c);
std::string bio_string(const BioSequence& seq);
BioSequence bio_from_string(const std::string& s);

// Score tables of a linear-chain CRF over [B, I, O].
// transitions(a, b) scores label a followed by label b.
struct CrfScores {
  Tensor transitions = Tensor({kNumBioLabels, kNumBioLabels});
  Tensor start = Tensor({kNumBioLabels});
  Tensor end = Tensor({kNumBioLabels});
};

// Store-backed CRF layer: an emission projection from `input_dim` features to
// three label scores, plus the score tables above.
struct CrfParams {
  std::string prefix;
  std::size_t input_dim = 0;

  void init(ParamStore& store, Rng& rng) const;
  CrfScores scores(const ParamStore& store) const;
  // n x 3 emission matrix from an n x input_dim feature matrix.
  Var emissions(Graph& g, Var features) const;
  // Negative log-likelihood of `gold` given emissions.
  Var nll(Graph& g, Var emissions, const BioSequence& gold) const;
};

double path_score(const Tensor& emissions, const BioSequence& labels, const CrfScores& crf);
// log of the sum over all 3^n paths of exp(path_score), by the forward recursion.
double log_partition(const Tensor& emissions, const CrfScores& crf);
double crf_nll(const Tensor& emissions, const BioSequence& gold, const CrfScores& crf);
// MAP path. Ties go to the lower label index at every backtracking step.
BioSequence viterbi(const Tensor& emissions, const CrfScores& crf);

struct BruteForceResult {
  double log_partition = 0.0;
  BioSequence best_path;
  double best_score = 0.0;
};

inline constexpr std::size_t kBruteForceMaxLength = 8;

// Exhaustive enumeration of all label paths; n must be in [1, 8].
BruteForceResult brute_force_oracle(const Tensor& emissions, const CrfScores& crf);

// Differentiable NLL through emissions and all three score tables.
Var crf_nll(Graph& g, Var emissions, Var transitions, Var start, Var end,
            const BioSequence& gold);

}  // namespace absa
