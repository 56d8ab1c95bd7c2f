#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absa/ae.hpp"
#include "absa/alsa.hpp"
#include "absa/config.hpp"
#include "absa/dataset.hpp"
#include "absa/metrics.hpp"
#include "absa/trainer.hpp"

namespace absa {

// Fixed seed for "random" embeddings, independent of the run seed so every
// run sees the same word vectors.
inline constexpr std::uint64_t kRandomEmbeddingSeed = 20140823;

// *.jsonl is read as a processed-dataset cache, anything else as SemEval XML.
Dataset load_dataset(const std::filesystem::path& path, Domain domain);

// Vocabulary over the datasets' tokens from cfg.embeddings.
Vocabulary build_vocabulary(const ExperimentConfig& cfg, const std::vector<const Dataset*>& datasets);

// Written next to every checkpoint as "<checkpoint>.meta".
struct ModelMeta {
  Task task = Task::kAlsa;
  Architecture architecture = Architecture::kAtae;
  InputVariant mode = InputVariant::kPlain;
  Domain domain = Domain::kLaptop;
  std::size_t embed_dim = 300;
  std::size_t aux_dim = 0;  // S_T / noise width (0 for plain)
  std::size_t hidden = 128;
  std::size_t ae_hidden = 32;
  std::size_t attn_dim = 0;
  bool finetune_embeddings = false;
  std::uint64_t seed = 1;
  std::string embeddings = "random";
};

std::string meta_text(const ModelMeta& meta);
ModelMeta parse_meta(const std::string& text);
std::filesystem::path meta_path(const std::filesystem::path& checkpoint);
ModelMeta read_meta(const std::filesystem::path& checkpoint);

struct LoadedModel {
  ModelMeta meta;
  std::unique_ptr<Vocabulary> ae_vocab;  // AE only; owned here, referenced by `ae`
  std::unique_ptr<AeModel> ae;
  std::unique_ptr<AlsaModel> alsa;
  std::unique_ptr<MultitaskModel> multitask;
};

// AE models need a vocabulary: finetuned ones restore their own from
// "<checkpoint>.vocab"; frozen ones use `vocab` (any vocabulary built from
// the same embeddings source gives the same word vectors).
LoadedModel load_model(const std::filesystem::path& checkpoint,
                       const Vocabulary* vocab = nullptr);

struct RunResult {
  ModelMeta meta;
  TrainLoopResult loop;
  std::filesystem::path best_checkpoint;
  std::filesystem::path final_checkpoint;
  std::optional<MetricsReport> test_report;  // ALSA / multi-task
  std::optional<SpanScores> test_spans;      // AE
};

// Trains per cfg.task and writes best.ckpt, final.ckpt (+ .meta) and
// train.log under cfg.out_dir. Every input is checked before the first step.
// `log`, if given, receives the same lines as train.log.
RunResult train_from_config(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Runs a trained AE model over a dataset and returns S_T per sentence id.
TransferCache compute_transfer(const LoadedModel& ae, const Dataset& dataset);
void write_transfer(const std::filesystem::path& path, const TransferCache& cache);
TransferCache read_transfer(const std::filesystem::path& path);

// Loads cfg.ae_checkpoint, exports S_T for `data` (domain cfg.alsa_domain)
// and writes it to `out`.
TransferCache export_st(const ExperimentConfig& cfg, const std::filesystem::path& data,
                        const std::filesystem::path& out);

// Evaluates cfg.checkpoint on cfg.test_data. If `expected` is set, the
// checkpoint's architecture must match it.
MetricsReport evaluate_checkpoint(const ExperimentConfig& cfg,
                                  std::optional<Architecture> expected = std::nullopt);

// Span scores of an AE checkpoint (cfg.checkpoint) on cfg.test_data.
SpanScores evaluate_ae_checkpoint(const ExperimentConfig& cfg);

struct GridRow {
  std::map<std::string, std::string> settings;
  ExperimentConfig config;
  std::optional<double> dev_score;
  std::optional<MetricsReport> test_report;
  std::string error;  // empty on success
  std::size_t rank = 0;  // 1-based
};

// One run per Cartesian grid point, `threads` at a time (0: hardware
// concurrency). Point i trains into <base.out_dir>/point-<i>. Failed runs are
// kept with their error. Rows come back ranked: successes by dev score
// descending, ties by lower l2 then lower lr.
std::vector<GridRow> grid_search(const ExperimentConfig& base,
                                 const std::map<std::string, std::vector<std::string>>& grid,
                                 std::size_t threads = 0);
std::string format_grid(const std::vector<GridRow>& rows);

// Exports S_T with cfg.ae_checkpoint (trained on cfg.ae_domain) over the
// ALSA data, then trains and evaluates the transfer variant of
// cfg.architecture on cfg.alsa_domain.
MetricsReport cross_domain_run(const ExperimentConfig& cfg);

struct DomainInputs {
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path ae_checkpoint;
};

struct CrossDomainCell {
  Domain ae_domain;
  Domain alsa_domain;
  Architecture architecture;
  std::optional<MetricsReport> report;
  std::string error;
};

// All AE-domain x ALSA-domain x architecture cells, run in parallel.
std::vector<CrossDomainCell> cross_domain_grid(const ExperimentConfig& base,
                                               const std::map<Domain, DomainInputs>& inputs,
                                               std::size_t threads = 0);

struct AttentionRecord {
  std::string sentence_id;
  AspectSpan span;
  std::string head;  // "sentence" or "aspect"
  std::vector<std::string> tokens;
  std::vector<double> alpha;
  Polarity predicted = Polarity::kPositive;
  Polarity gold = Polarity::kPositive;
};

std::string attention_json(const AttentionRecord& r);

// Attention of cfg.checkpoint over every sample of cfg.test_data, one record
// per (sample, head). Written as JSONL to `out` when non-empty.
std::vector<AttentionRecord> dump_attention(const ExperimentConfig& cfg,
                                            const std::filesystem::path& out);

// Majority label of the training samples predicted for every test sample.
MetricsReport majority_run(const Dataset& train, const Dataset& test);

// Runs `fn(i)` for i in [0, n) on up to `threads` worker threads.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace absa
