#pragma once

#include "absa/crf.hpp"
#include "absa/tensor.hpp"

namespace absa::test {

// Enumeration written independently of the library's oracle: every path is
// the base-3 expansion of an integer, most significant label first.
struct Enumerated {
  double log_z;
  BioSequence best;
  double best_score;
  double prob_mass;  // sum of exp(score - log_z) over all paths
};

double score_of(const Tensor& em, const BioSequence& p, const CrfScores& c);
Enumerated enumerate(const Tensor& em, const CrfScores& c);

}  // namespace absa::test
