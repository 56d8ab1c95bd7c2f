#include "absa/crf.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "absa/error.hpp"

namespace absa {
namespace {

constexpr std::size_t L = kNumBioLabels;

void check_emissions(const char* op, const Tensor& e, std::size_t min_rows = 1) {
  if (e.rank() != 2 || e.cols() != L) {
    throw ShapeError(std::string(op) + ": emissions must be n x 3, got " +
                     shape_string(e.shape()));
  }
  if (e.rows() < min_rows) {
    throw ShapeError(std::string(op) + ": empty sequence");
  }
}

void check_tables(const char* op, const Tensor& t, const Tensor& s, const Tensor& e) {
  if (t.shape() != Shape{L, L} || s.shape() != Shape{L} || e.shape() != Shape{L}) {
    throw ShapeError(std::string(op) + ": transitions " + shape_string(t.shape()) +
                     ", start " + shape_string(s.shape()) + ", end " +
                     shape_string(e.shape()) + "; expected [3x3], [3], [3]");
  }
}

double lse3(double a, double b, double c) {
  const double m = std::max({a, b, c});
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

using Lattice = std::vector<std::array<double, L>>;

// alpha[i][y]: log-sum of scores of prefixes ending in y at position i,
// including emissions up to i.
Lattice forward_lattice(const Tensor& em, const Tensor& trans, const Tensor& start) {
  const std::size_t n = em.rows();
  Lattice alpha(n);
  for (std::size_t y = 0; y < L; ++y) alpha[0][y] = start[y] + em.at(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < L; ++y) {
      alpha[i][y] = em.at(i, y) + lse3(alpha[i - 1][0] + trans.at(0, y),
                                       alpha[i - 1][1] + trans.at(1, y),
                                       alpha[i - 1][2] + trans.at(2, y));
    }
  }
  return alpha;
}

// beta[i][y]: log-sum of scores of suffixes after position i given y at i,
// including the end score.
Lattice backward_lattice(const Tensor& em, const Tensor& trans, const Tensor& end) {
  const std::size_t n = em.rows();
  Lattice beta(n);
  for (std::size_t y = 0; y < L; ++y) beta[n - 1][y] = end[y];
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t y = 0; y < L; ++y) {
      std::array<double, L> t{};
      for (std::size_t b = 0; b < L; ++b) t[b] = trans.at(y, b) + em.at(i + 1, b) + beta[i + 1][b];
      beta[i][y] = lse3(t[0], t[1], t[2]);
    }
  }
  return beta;
}

double partition_from(const Lattice& alpha, const Tensor& end) {
  const auto& last = alpha.back();
  return lse3(last[0] + end[0], last[1] + end[1], last[2] + end[2]);
}

double gold_score(const Tensor& em, const BioSequence& labels, const Tensor& trans,
                  const Tensor& start, const Tensor& end) {
  const std::size_t n = labels.size();
  auto idx = [&](std::size_t i) { return static_cast<std::size_t>(labels[i]); };
  double s = start[idx(0)] + end[idx(n - 1)];
  for (std::size_t i = 0; i < n; ++i) s += em.at(i, idx(i));
  for (std::size_t i = 0; i + 1 < n; ++i) s += trans.at(idx(i), idx(i + 1));
  return s;
}

void check_labels(const char* op, const Tensor& em, const BioSequence& labels) {
  if (labels.size() != em.rows()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(em.rows()) + " emission rows");
  }
  for (BioLabel l : labels) {
    if (static_cast<std::size_t>(l) >= L) throw InvalidArgument(std::string(op) + ": bad label");
  }
}

}  // namespace

char bio_char(BioLabel l) {
  switch (l) {
    case BioLabel::kB: return 'B';
    case BioLabel::kI: return 'I';
    case BioLabel::kO: return 'O';
  }
  return '?';
}

BioLabel bio_from_char(char c) {
  switch (c) {
    case 'B': return BioLabel::kB;
    case 'I': return BioLabel::kI;
    case 'O': return BioLabel::kO;
    default: throw InvalidArgument(std::string("unknown BIO label '") + c + "'");
  }
}

std::string bio_string(const BioSequence& seq) {
  std::string s;
  for (BioLabel l : seq) s.push_back(bio_char(l));
  return s;
}

BioSequence bio_from_string(const std::string& s) {
  BioSequence out;
  for (char c : s) out.push_back(bio_from_char(c));
  return out;
}

void CrfParams::init(ParamStore& store, Rng& rng) const {
  store.add(prefix + ".emit.W", glorot_uniform(L, input_dim, rng));
  store.add(prefix + ".emit.b", Tensor({L}));
  store.add(prefix + ".trans", Tensor({L, L}));
  store.add(prefix + ".start", Tensor({L}));
  store.add(prefix + ".end", Tensor({L}));
}

CrfScores CrfParams::scores(const ParamStore& store) const {
  return {store.value(prefix + ".trans"), store.value(prefix + ".start"),
          store.value(prefix + ".end")};
}

Var CrfParams::emissions(Graph& g, Var features) const {
  const Var w = g.param(prefix + ".emit.W");
  const Var b = g.param(prefix + ".emit.b");
  std::vector<Var> rows;
  for (Var r : ops::unstack(g, features)) rows.push_back(ops::affine(g, w, r, b));
  return ops::stack(g, rows);
}

Var CrfParams::nll(Graph& g, Var emissions, const BioSequence& gold) const {
  return crf_nll(g, emissions, g.param(prefix + ".trans"), g.param(prefix + ".start"),
                 g.param(prefix + ".end"), gold);
}

double path_score(const Tensor& emissions, const BioSequence& labels, const CrfScores& crf) {
  check_emissions("path_score", emissions);
  check_tables("path_score", crf.transitions, crf.start, crf.end);
  check_labels("path_score", emissions, labels);
  return gold_score(emissions, labels, crf.transitions, crf.start, crf.end);
}

double log_partition(const Tensor& emissions, const CrfScores& crf) {
  check_emissions("log_partition", emissions);
  check_tables("log_partition", crf.transitions, crf.start, crf.end);
  return partition_from(forward_lattice(emissions, crf.transitions, crf.start), crf.end);
}

double crf_nll(const Tensor& emissions, const BioSequence& gold, const CrfScores& crf) {
  return log_partition(emissions, crf) - path_score(emissions, gold, crf);
}

BioSequence viterbi(const Tensor& emissions, const CrfScores& crf) {
  check_emissions("viterbi", emissions);
  check_tables("viterbi", crf.transitions, crf.start, crf.end);
  const std::size_t n = emissions.rows();
  const Tensor& trans = crf.transitions;
  std::vector<std::array<double, L>> best(n);
  std::vector<std::array<std::uint8_t, L>> back(n);
  for (std::size_t y = 0; y < L; ++y) best[0][y] = crf.start[y] + emissions.at(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t arg = 0;
      double top = best[i - 1][0] + trans.at(0, y);
      for (std::size_t a = 1; a < L; ++a) {
        const double s = best[i - 1][a] + trans.at(a, y);
        if (s > top) {
          top = s;
          arg = a;
        }
      }
      best[i][y] = top + emissions.at(i, y);
      back[i][y] = static_cast<std::uint8_t>(arg);
    }
  }
  std::size_t last = 0;
  double top = best[n - 1][0] + crf.end[0];
  for (std::size_t y = 1; y < L; ++y) {
    const double s = best[n - 1][y] + crf.end[y];
    if (s > top) {
      top = s;
      last = y;
    }
  }
  BioSequence path(n);
  path[n - 1] = static_cast<BioLabel>(last);
  for (std::size_t i = n - 1; i > 0; --i) {
    last = back[i][last];
    path[i - 1] = static_cast<BioLabel>(last);
  }
  return path;
}

BruteForceResult brute_force_oracle(const Tensor& emissions, const CrfScores& crf) {
  check_emissions("brute_force_oracle", emissions);
  check_tables("brute_force_oracle", crf.transitions, crf.start, crf.end);
  const std::size_t n = emissions.rows();
  if (n > kBruteForceMaxLength) {
    throw InvalidArgument("brute_force_oracle: n = " + std::to_string(n) +
                          " exceeds the enumeration limit of " +
                          std::to_string(kBruteForceMaxLength));
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= L;

  // Paths are enumerated in lexicographic order (first position most
  // significant); the first strict maximum wins.
  std::vector<double> scores(total);
  BioSequence path(n);
  BruteForceResult out;
  out.best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      path[i] = static_cast<BioLabel>(c % L);
      c /= L;
    }
    scores[code] = gold_score(emissions, path, crf.transitions, crf.start, crf.end);
    if (scores[code] > out.best_score) {
      out.best_score = scores[code];
      out.best_path = path;
    }
  }
  out.log_partition = log_sum_exp(scores);
  return out;
}

Var crf_nll(Graph& g, Var emissions, Var transitions, Var start, Var end,
            const BioSequence& gold) {
  const Tensor& em = g.value(emissions);
  check_emissions("crf_nll", em);
  check_tables("crf_nll", g.value(transitions), g.value(start), g.value(end));
  check_labels("crf_nll", em, gold);
  const auto alpha = forward_lattice(em, g.value(transitions), g.value(start));
  const double log_z = partition_from(alpha, g.value(end));
  const double loss =
      log_z - gold_score(em, gold, g.value(transitions), g.value(start), g.value(end));

  return g.record(
      Tensor::scalar(loss), {emissions, transitions, start, end},
      [=](Graph& gr, const Tensor& og) {
        const Tensor& em = gr.value(emissions);
        const Tensor& trans = gr.value(transitions);
        const Tensor& st = gr.value(start);
        const Tensor& en = gr.value(end);
        const std::size_t n = em.rows();
        const auto a = forward_lattice(em, trans, st);
        const auto b = backward_lattice(em, trans, en);
        const double lz = partition_from(a, en);
        const double o = og[0];
        auto lab = [&](std::size_t i) { return static_cast<std::size_t>(gold[i]); };

        if (gr.requires_grad(emissions)) {
          Tensor& ge = gr.grad_slot(emissions);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t y = 0; y < L; ++y) {
              const double marginal = std::exp(a[i][y] + b[i][y] - lz);
              ge.at(i, y) += o * (marginal - (lab(i) == y ? 1.0 : 0.0));
            }
          }
        }
        if (gr.requires_grad(transitions)) {
          Tensor& gt = gr.grad_slot(transitions);
          for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t p = 0; p < L; ++p) {
              for (std::size_t q = 0; q < L; ++q) {
                const double pair =
                    std::exp(a[i][p] + trans.at(p, q) + em.at(i + 1, q) + b[i + 1][q] - lz);
                gt.at(p, q) += o * pair;
              }
            }
            gt.at(lab(i), lab(i + 1)) -= o;
          }
        }
        if (gr.requires_grad(start)) {
          Tensor& gs = gr.grad_slot(start);
          for (std::size_t y = 0; y < L; ++y) gs[y] += o * std::exp(a[0][y] + b[0][y] - lz);
          gs[lab(0)] -= o;
        }
        if (gr.requires_grad(end)) {
          Tensor& gn = gr.grad_slot(end);
          for (std::size_t y = 0; y < L; ++y) {
            gn[y] += o * std::exp(a[n - 1][y] + b[n - 1][y] - lz);
          }
          gn[lab(n - 1)] -= o;
        }
      });
}

}  // namespace absa
