#include "absa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "absa/checkpoint.hpp"
#include "absa/error.hpp"
#include "absa/random.hpp"

namespace absa {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw InvalidArgument(what + " path is not set");
  if (!fs::exists(p)) throw IoError(what + " '" + p.string() + "' does not exist");
}

std::string printf_string(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

std::string model_kind(const ModelMeta& m) {
  switch (m.task) {
    case Task::kAe: return "ae";
    case Task::kMultitask: return "multitask";
    case Task::kAlsa: return std::string(architecture_name(m.architecture));
  }
  return "?";
}

Vocabulary vocabulary_from(const std::string& source, std::size_t dim,
                           const std::vector<const Dataset*>& datasets) {
  const auto tokens = collect_tokens(datasets);
  if (source == "random") return random_vocabulary(tokens, dim, kRandomEmbeddingSeed);
  EmbeddingOptions opts;
  opts.expected_dim = dim;
  return load_embeddings(fs::path(source), tokens, opts);
}

void write_vocab_file(const fs::path& path, const Vocabulary& vocab) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& t : vocab.tokens()) os << t << '\n';
}

std::vector<std::string> read_vocab_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

void save_checkpoint(const fs::path& path, const ParamStore& params, const ModelMeta& meta,
                     const Vocabulary* finetuned_vocab) {
  save_params(path, params);
  std::ofstream os(meta_path(path), std::ios::binary);
  if (!os) throw IoError("cannot write '" + meta_path(path).string() + "'");
  os << meta_text(meta);
  if (finetuned_vocab) write_vocab_file(fs::path(path.string() + ".vocab"), *finetuned_vocab);
}

// Logs to the train.log stream and an optional echo stream.
class RunLog {
 public:
  RunLog(const fs::path& path, std::ostream* echo) : file_(path, std::ios::binary), echo_(echo) {
    if (!file_) throw IoError("cannot write '" + path.string() + "'");
  }
  void line(const std::string& s) {
    file_ << s << '\n';
    if (echo_) *echo_ << s << '\n';
  }

 private:
  std::ofstream file_;
  std::ostream* echo_;
};

TrainOptions train_options(const ExperimentConfig& cfg, RunLog& log) {
  TrainOptions opts;
  opts.adam.lr = cfg.lr;
  opts.adam.l2_lambda = cfg.l2_lambda;
  opts.epochs = cfg.epochs;
  opts.seed = cfg.seed;
  opts.on_epoch = [&log](const EpochRecord& r) { log.line(r.log_line()); };
  return opts;
}

void log_best(RunLog& log, const TrainLoopResult& loop) {
  if (loop.best_epoch) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "best_epoch=%zu dev=%.4f", *loop.best_epoch,
                  100.0 * loop.best_dev);
    log.line(buf);
  }
}

// Sentence indices split into (train, dev) by a seeded shuffle.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_sentences(
    std::size_t n, double dev_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(seed, 0x5e17));
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto dev_n = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  std::vector<std::size_t> dev(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(dev_n));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(dev_n), idx.end());
  std::sort(dev.begin(), dev.end());
  std::sort(train.begin(), train.end());
  return {train, dev};
}

void prepare_out_dir(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) throw InvalidArgument("out_dir is not set");
  fs::create_directories(cfg.out_dir);
}

RunResult train_ae_run(const ExperimentConfig& cfg, std::ostream* echo) {
  require_file(cfg.train_data, "training data");
  if (!cfg.test_data.empty()) require_file(cfg.test_data, "test data");
  if (cfg.embeddings != "random") require_file(cfg.embeddings, "embeddings");
  Dataset train = load_dataset(cfg.train_data, cfg.ae_domain);
  std::optional<Dataset> test;
  if (!cfg.test_data.empty()) test = load_dataset(cfg.test_data, cfg.ae_domain);
  std::vector<const Dataset*> all{&train};
  if (test) all.push_back(&*test);
  const Vocabulary vocab = vocabulary_from(cfg.embeddings, cfg.embed_dim, all);

  AeConfig ac;
  ac.embed_dim = vocab.dim();
  ac.hidden_dim = cfg.ae_hidden;
  ac.finetune_embeddings = cfg.finetune_embeddings;
  ac.seed = cfg.seed;
  AeModel model(ac, vocab);

  const auto sentences = prepare_sentences(train, vocab);
  const auto [train_idx, dev_idx] = split_sentences(sentences.size(), cfg.dev_fraction, cfg.seed);
  std::vector<PreparedSentence> train_set, dev_set;
  for (auto i : train_idx) train_set.push_back(sentences[i]);
  for (auto i : dev_idx) dev_set.push_back(sentences[i]);

  prepare_out_dir(cfg);
  RunLog log(cfg.out_dir / "train.log", echo);
  RunResult result;
  result.meta.task = Task::kAe;
  result.meta.domain = cfg.ae_domain;
  result.meta.embed_dim = vocab.dim();
  result.meta.hidden = cfg.ae_hidden;
  result.meta.ae_hidden = cfg.ae_hidden;
  result.meta.aux_dim = 0;
  result.meta.finetune_embeddings = cfg.finetune_embeddings;
  result.meta.seed = cfg.seed;
  result.meta.embeddings = cfg.embeddings;

  result.loop = train_ae(model, train_set, dev_set, train_options(cfg, log));
  log_best(log, result.loop);
  result.final_checkpoint = cfg.out_dir / "final.ckpt";
  result.best_checkpoint = cfg.out_dir / "best.ckpt";
  const Vocabulary* ft = cfg.finetune_embeddings ? &vocab : nullptr;
  save_checkpoint(result.final_checkpoint, model.params(), result.meta, ft);
  save_checkpoint(result.best_checkpoint, result.loop.best_params, result.meta, ft);

  if (test) {
    model.params().copy_values_from(result.loop.best_params);
    result.test_spans = evaluate_ae(model, prepare_sentences(*test, vocab));
    char buf[128];
    std::snprintf(buf, sizeof buf, "test span_p=%.2f span_r=%.2f span_f1=%.2f",
                  100.0 * result.test_spans->precision, 100.0 * result.test_spans->recall,
                  100.0 * result.test_spans->f1);
    log.line(buf);
  }
  return result;
}

std::size_t cache_width(const TransferCache& cache) {
  if (cache.empty()) throw InvalidArgument("S_T cache is empty");
  // Every entry has the same width; pick the smallest key for determinism.
  auto it = std::min_element(cache.begin(), cache.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  return it->second.cols();
}

// ALSA and multi-task training. `st_train` / `st_test` are used in transfer mode.
RunResult train_alsa_run(const ExperimentConfig& cfg, const TransferCache* st_train,
                         const TransferCache* st_test, std::ostream* echo) {
  const bool multitask = cfg.task == Task::kMultitask;
  require_file(cfg.train_data, "training data");
  if (!cfg.test_data.empty()) require_file(cfg.test_data, "test data");
  if (cfg.embeddings != "random") require_file(cfg.embeddings, "embeddings");
  if (multitask && cfg.mode != InputVariant::kPlain) {
    throw InvalidArgument("multitask model takes plain inputs only");
  }
  const bool transfer = cfg.mode == InputVariant::kTransfer;
  if (transfer && !st_train) throw InvalidArgument("transfer mode needs an S_T cache");
  if (transfer && !cfg.test_data.empty() && !st_test) {
    throw InvalidArgument("transfer mode needs an S_T cache for the test data (st_test)");
  }

  Dataset train = load_dataset(cfg.train_data, cfg.alsa_domain);
  std::optional<Dataset> test;
  if (!cfg.test_data.empty()) test = load_dataset(cfg.test_data, cfg.alsa_domain);
  std::vector<const Dataset*> all{&train};
  if (test) all.push_back(&*test);
  const Vocabulary vocab = vocabulary_from(cfg.embeddings, cfg.embed_dim, all);
  assign_ids(train, vocab);
  if (test) assign_ids(*test, vocab);

  InputMode mode;
  mode.variant = cfg.mode;
  mode.aux_dim = cfg.d_t;
  mode.noise_seed = cfg.seed;
  if (transfer) {
    mode.transfer = st_train;
    if (cache_width(*st_train) != cfg.d_t) {
      throw ShapeError("S_T width " + std::to_string(cache_width(*st_train)) +
                       " != configured d_t " + std::to_string(cfg.d_t));
    }
  }
  const auto [train_samples, dev_samples] =
      stratified_split(train.samples, cfg.dev_fraction, cfg.seed);
  const auto train_set = prepare_samples(train, train_samples, mode, vocab);
  const auto dev_set = prepare_samples(train, dev_samples, mode, vocab);
  std::vector<PreparedSample> test_set;
  if (test) {
    InputMode test_mode = mode;
    if (transfer) test_mode.transfer = st_test;
    test_set = prepare_samples(*test, test->samples, test_mode, vocab);
  }

  RunResult result;
  result.meta.task = cfg.task;
  result.meta.architecture = multitask ? Architecture::kAtae : cfg.architecture;
  result.meta.mode = cfg.mode;
  result.meta.domain = cfg.alsa_domain;
  result.meta.embed_dim = vocab.dim();
  result.meta.aux_dim = cfg.mode == InputVariant::kPlain ? 0 : cfg.d_t;
  result.meta.hidden = cfg.alsa_hidden;
  result.meta.ae_hidden = cfg.ae_hidden;
  result.meta.attn_dim = cfg.attn_dim;
  result.meta.seed = cfg.seed;
  result.meta.embeddings = cfg.embeddings;

  prepare_out_dir(cfg);
  RunLog log(cfg.out_dir / "train.log", echo);
  const TrainOptions opts = train_options(cfg, log);
  result.final_checkpoint = cfg.out_dir / "final.ckpt";
  result.best_checkpoint = cfg.out_dir / "best.ckpt";

  if (multitask) {
    MultitaskConfig mc;
    mc.embed_dim = vocab.dim();
    mc.shared_hidden = cfg.ae_hidden;
    mc.alsa_hidden = cfg.alsa_hidden;
    mc.attn_dim = cfg.attn_dim;
    mc.seed = cfg.seed;
    MultitaskModel model(mc);
    std::vector<bool> has_sample(train.sentences.size(), false);
    for (const auto& s : train.samples) has_sample[s.sentence_index] = true;
    std::vector<PreparedSentence> ae_only;
    const auto sentences = prepare_sentences(train, vocab);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (!has_sample[i]) ae_only.push_back(sentences[i]);
    }
    result.loop = train_multitask(model, train_set, ae_only, dev_set, opts);
    log_best(log, result.loop);
    save_checkpoint(result.final_checkpoint, model.params(), result.meta, nullptr);
    save_checkpoint(result.best_checkpoint, result.loop.best_params, result.meta, nullptr);
    if (test) {
      model.params().copy_values_from(result.loop.best_params);
      result.test_report = evaluate_predictions(predict_all(model, test_set), test_set);
    }
  } else {
    AlsaConfig ac;
    ac.architecture = cfg.architecture;
    ac.input_dim = mode.width(vocab.dim());
    ac.hidden_dim = cfg.alsa_hidden;
    ac.attn_dim = cfg.attn_dim;
    ac.seed = cfg.seed;
    AlsaModel model(ac);
    result.loop = train_alsa(model, train_set, dev_set, opts);
    log_best(log, result.loop);
    save_checkpoint(result.final_checkpoint, model.params(), result.meta, nullptr);
    save_checkpoint(result.best_checkpoint, result.loop.best_params, result.meta, nullptr);
    if (test) {
      model.params().copy_values_from(result.loop.best_params);
      result.test_report = evaluate_predictions(predict_all(model, test_set), test_set);
    }
  }
  if (result.test_report) {
    log.line("test macro_f1=" + format_percent(result.test_report->macro_f1));
  }
  return result;
}

std::vector<std::size_t> ids_for(const LoadedModel& ae, const SentenceRecord& s) {
  return ae.ae->vocabulary().ids(s.tokens);
}

}  // namespace

// ---------------------------------------------------------------------------

Dataset load_dataset(const fs::path& path, Domain domain) {
  require_file(path, "dataset");
  if (path.extension() == ".jsonl") return read_dataset_cache(path);
  return load_semeval_dataset(path, domain);
}

Vocabulary build_vocabulary(const ExperimentConfig& cfg,
                            const std::vector<const Dataset*>& datasets) {
  return vocabulary_from(cfg.embeddings, cfg.embed_dim, datasets);
}

std::string meta_text(const ModelMeta& m) {
  std::ostringstream os;
  os << "task = " << task_name(m.task) << '\n'
     << "arch = " << architecture_name(m.architecture) << '\n'
     << "mode = " << input_variant_name(m.mode) << '\n'
     << "domain = " << domain_name(m.domain) << '\n'
     << "embed_dim = " << m.embed_dim << '\n'
     << "aux_dim = " << m.aux_dim << '\n'
     << "hidden = " << m.hidden << '\n'
     << "ae_hidden = " << m.ae_hidden << '\n'
     << "attn_dim = " << m.attn_dim << '\n'
     << "finetune_embeddings = " << (m.finetune_embeddings ? "true" : "false") << '\n'
     << "seed = " << m.seed << '\n'
     << "embeddings = " << m.embeddings << '\n';
  return os.str();
}

ModelMeta parse_meta(const std::string& text) {
  const auto kv = parse_key_values(text);
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw ParseError("checkpoint meta: missing key '" + k + "'");
    return it->second;
  };
  auto num = [&](const std::string& k) -> std::uint64_t {
    const std::string& v = get(k);
    try {
      std::size_t used = 0;
      const auto x = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ParseError("checkpoint meta: '" + k + "' is not an unsigned integer: " + v);
    }
  };
  ModelMeta m;
  m.task = parse_task(get("task"));
  m.architecture = parse_architecture(get("arch"));
  m.mode = parse_input_variant(get("mode"));
  m.domain = parse_domain(get("domain"));
  m.embed_dim = num("embed_dim");
  m.aux_dim = num("aux_dim");
  m.hidden = num("hidden");
  m.ae_hidden = num("ae_hidden");
  m.attn_dim = num("attn_dim");
  const std::string& ft = get("finetune_embeddings");
  if (ft != "true" && ft != "false") {
    throw ParseError("checkpoint meta: finetune_embeddings must be true or false");
  }
  m.finetune_embeddings = ft == "true";
  m.seed = num("seed");
  m.embeddings = get("embeddings");
  return m;
}

fs::path meta_path(const fs::path& checkpoint) { return fs::path(checkpoint.string() + ".meta"); }

ModelMeta read_meta(const fs::path& checkpoint) {
  require_file(checkpoint, "checkpoint");
  const fs::path p = meta_path(checkpoint);
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint metadata '" + p.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_meta(ss.str());
}

LoadedModel load_model(const fs::path& checkpoint, const Vocabulary* vocab) {
  LoadedModel out;
  out.meta = read_meta(checkpoint);
  const auto entries = read_archive(checkpoint);
  const ModelMeta& m = out.meta;
  switch (m.task) {
    case Task::kAe: {
      if (m.finetune_embeddings) {
        auto tokens = read_vocab_file(fs::path(checkpoint.string() + ".vocab"));
        auto it = std::find_if(entries.begin(), entries.end(),
                               [](const NamedTensor& e) { return e.name == "ae.embedding"; });
        if (it == entries.end()) throw NotFound("checkpoint has no ae.embedding entry");
        out.ae_vocab = std::make_unique<Vocabulary>(std::move(tokens), it->value);
      } else {
        if (!vocab) throw InvalidArgument("loading a frozen-embedding AE model needs a vocabulary");
        if (vocab->dim() != m.embed_dim) {
          throw ShapeError("vocabulary width " + std::to_string(vocab->dim()) +
                           " != checkpoint embed_dim " + std::to_string(m.embed_dim));
        }
        out.ae_vocab = std::make_unique<Vocabulary>(*vocab);
      }
      AeConfig ac;
      ac.embed_dim = m.embed_dim;
      ac.hidden_dim = m.ae_hidden;
      ac.finetune_embeddings = m.finetune_embeddings;
      ac.seed = m.seed;
      out.ae = std::make_unique<AeModel>(ac, *out.ae_vocab);
      load_params(entries, out.ae->params());
      break;
    }
    case Task::kAlsa: {
      AlsaConfig ac;
      ac.architecture = m.architecture;
      ac.input_dim = m.embed_dim + m.aux_dim;
      ac.hidden_dim = m.hidden;
      ac.attn_dim = m.attn_dim;
      ac.seed = m.seed;
      out.alsa = std::make_unique<AlsaModel>(ac);
      load_params(entries, out.alsa->params());
      break;
    }
    case Task::kMultitask: {
      MultitaskConfig mc;
      mc.embed_dim = m.embed_dim;
      mc.shared_hidden = m.ae_hidden;
      mc.alsa_hidden = m.hidden;
      mc.attn_dim = m.attn_dim;
      mc.seed = m.seed;
      out.multitask = std::make_unique<MultitaskModel>(mc);
      load_params(entries, out.multitask->params());
      break;
    }
  }
  return out;
}

RunResult train_from_config(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  if (cfg.task == Task::kAe) return train_ae_run(cfg, log);
  std::optional<TransferCache> st_train, st_test;
  if (cfg.task == Task::kAlsa && cfg.mode == InputVariant::kTransfer) {
    require_file(cfg.st_train, "S_T cache (st_train)");
    if (!cfg.test_data.empty()) require_file(cfg.st_test, "S_T cache (st_test)");
    st_train = read_transfer(cfg.st_train);
    if (!cfg.test_data.empty()) st_test = read_transfer(cfg.st_test);
  }
  return train_alsa_run(cfg, st_train ? &*st_train : nullptr, st_test ? &*st_test : nullptr, log);
}

TransferCache compute_transfer(const LoadedModel& ae, const Dataset& dataset) {
  if (!ae.ae) throw InvalidArgument("compute_transfer: not an AE model");
  TransferCache cache;
  for (const auto& s : dataset.sentences) {
    cache[s.id] = export_transfer(*ae.ae, ids_for(ae, s));
  }
  return cache;
}

void write_transfer(const fs::path& path, const TransferCache& cache) {
  std::vector<NamedTensor> entries;
  entries.reserve(cache.size());
  for (const auto& [id, t] : cache) entries.push_back({id, t});
  std::sort(entries.begin(), entries.end(),
            [](const NamedTensor& a, const NamedTensor& b) { return a.name < b.name; });
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_archive(path, entries);
}

TransferCache read_transfer(const fs::path& path) {
  TransferCache cache;
  for (auto& e : read_archive(path)) cache.emplace(std::move(e.name), std::move(e.value));
  return cache;
}

namespace {

LoadedModel load_ae_for(const ExperimentConfig& cfg, const std::vector<const Dataset*>& data) {
  if (cfg.ae_checkpoint.empty()) throw InvalidArgument("missing AE checkpoint (ae_checkpoint)");
  if (!fs::exists(cfg.ae_checkpoint)) {
    throw NotFound("missing AE checkpoint '" + cfg.ae_checkpoint.string() + "'");
  }
  const ModelMeta meta = read_meta(cfg.ae_checkpoint);
  if (meta.task != Task::kAe) {
    throw InvalidArgument("'" + cfg.ae_checkpoint.string() + "' is not an AE checkpoint");
  }
  if (meta.finetune_embeddings) return load_model(cfg.ae_checkpoint);
  const Vocabulary vocab = vocabulary_from(meta.embeddings, meta.embed_dim, data);
  return load_model(cfg.ae_checkpoint, &vocab);
}

}  // namespace

TransferCache export_st(const ExperimentConfig& cfg, const fs::path& data, const fs::path& out) {
  const Dataset ds = load_dataset(data, cfg.alsa_domain);
  const LoadedModel ae = load_ae_for(cfg, {&ds});
  TransferCache cache = compute_transfer(ae, ds);
  if (!out.empty()) write_transfer(out, cache);
  return cache;
}

MetricsReport evaluate_checkpoint(const ExperimentConfig& cfg,
                                  std::optional<Architecture> expected) {
  const ModelMeta meta = read_meta(cfg.checkpoint);
  if (meta.task == Task::kAe) {
    throw InvalidArgument("evaluate: '" + cfg.checkpoint.string() +
                          "' is an AE checkpoint; polarity metrics need an ALSA model");
  }
  if (expected && (meta.task != Task::kAlsa || meta.architecture != *expected)) {
    throw InvalidArgument("architecture mismatch: checkpoint is " + model_kind(meta) +
                          ", expected " + std::string(architecture_name(*expected)));
  }
  require_file(cfg.test_data, "test data");
  Dataset test = load_dataset(cfg.test_data, meta.domain);
  const Vocabulary vocab = vocabulary_from(meta.embeddings, meta.embed_dim, {&test});
  assign_ids(test, vocab);
  std::optional<TransferCache> st;
  InputMode mode;
  mode.variant = meta.mode;
  mode.aux_dim = meta.aux_dim;
  mode.noise_seed = meta.seed;
  if (meta.mode == InputVariant::kTransfer) {
    require_file(cfg.st_test, "S_T cache (st_test)");
    st = read_transfer(cfg.st_test);
    mode.transfer = &*st;
  }
  const auto samples = prepare_samples(test, test.samples, mode, vocab);
  const LoadedModel model = load_model(cfg.checkpoint);
  const auto preds =
      model.alsa ? predict_all(*model.alsa, samples) : predict_all(*model.multitask, samples);
  return evaluate_predictions(preds, samples);
}

SpanScores evaluate_ae_checkpoint(const ExperimentConfig& cfg) {
  const ModelMeta meta = read_meta(cfg.checkpoint);
  if (meta.task != Task::kAe) {
    throw InvalidArgument("'" + cfg.checkpoint.string() + "' is not an AE checkpoint");
  }
  require_file(cfg.test_data, "test data");
  const Dataset test = load_dataset(cfg.test_data, meta.domain);
  ExperimentConfig c = cfg;
  c.ae_checkpoint = cfg.checkpoint;
  const LoadedModel ae = load_ae_for(c, {&test});
  return evaluate_ae(*ae.ae, prepare_sentences(test, ae.ae->vocabulary()));
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  if (threads > 0) worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<GridRow> grid_search(const ExperimentConfig& base,
                                 const std::map<std::string, std::vector<std::string>>& grid,
                                 std::size_t threads) {
  if (grid.empty()) throw InvalidArgument("grid_search: empty grid");
  std::size_t points = 1;
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw InvalidArgument("grid_search: no values for '" + key + "'");
    ExperimentConfig probe = base;
    apply_setting(probe, key, values.front());  // rejects unknown keys up front
    points *= values.size();
  }
  std::vector<GridRow> rows(points);
  for (std::size_t i = 0; i < points; ++i) {
    std::size_t rest = i;
    GridRow& row = rows[i];
    row.config = base;
    // Last key varies fastest.
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
      row.settings[it->first] = it->second[rest % it->second.size()];
      rest /= it->second.size();
    }
    try {
      for (const auto& [k, v] : row.settings) apply_setting(row.config, k, v);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.config.out_dir = base.out_dir / ("point-" + std::to_string(i));
  }
  parallel_for(points, threads, [&](std::size_t i) {
    GridRow& row = rows[i];
    if (!row.error.empty()) return;
    try {
      RunResult r = train_from_config(row.config);
      if (r.loop.best_epoch) row.dev_score = r.loop.best_dev;
      row.test_report = r.test_report;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::vector<std::size_t> order(points);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const GridRow& x = rows[a];
    const GridRow& y = rows[b];
    const bool ox = x.error.empty(), oy = y.error.empty();
    if (ox != oy) return ox;
    const double dx = x.dev_score.value_or(-1.0), dy = y.dev_score.value_or(-1.0);
    if (dx != dy) return dx > dy;
    if (x.config.l2_lambda != y.config.l2_lambda) return x.config.l2_lambda < y.config.l2_lambda;
    return x.config.lr < y.config.lr;
  });
  std::vector<GridRow> ranked;
  ranked.reserve(points);
  for (std::size_t r = 0; r < points; ++r) {
    ranked.push_back(std::move(rows[order[r]]));
    ranked.back().rank = r + 1;
  }
  return ranked;
}

std::string format_grid(const std::vector<GridRow>& rows) {
  std::ostringstream os;
  os << "rank  dev_f1  test_f1  settings\n";
  for (const auto& r : rows) {
    char head[48];
    std::snprintf(head, sizeof head, "%4zu  ", r.rank);
    os << head;
    os << (r.dev_score ? printf_string("%6.2f", 100.0 * *r.dev_score) : std::string("     -"))
       << "  "
       << (r.test_report ? printf_string("%7.2f", 100.0 * r.test_report->macro_f1)
                         : std::string("      -"))
       << "  ";
    bool first = true;
    for (const auto& [k, v] : r.settings) {
      os << (first ? "" : " ") << k << '=' << v;
      first = false;
    }
    if (!r.error.empty()) os << "  FAILED: " << r.error;
    os << '\n';
  }
  return os.str();
}

MetricsReport cross_domain_run(const ExperimentConfig& cfg) {
  require_file(cfg.train_data, "training data");
  require_file(cfg.test_data, "test data");
  const Dataset train = load_dataset(cfg.train_data, cfg.alsa_domain);
  const Dataset test = load_dataset(cfg.test_data, cfg.alsa_domain);
  const LoadedModel ae = load_ae_for(cfg, {&train, &test});
  if (ae.meta.domain != cfg.ae_domain) {
    throw InvalidArgument("AE checkpoint was trained on " + std::string(domain_name(ae.meta.domain)) +
                          ", expected " + std::string(domain_name(cfg.ae_domain)));
  }
  const TransferCache st_train = compute_transfer(ae, train);
  const TransferCache st_test = compute_transfer(ae, test);
  ExperimentConfig run = cfg;
  run.task = Task::kAlsa;
  run.mode = InputVariant::kTransfer;
  run.d_t = ae.ae->transfer_dim();
  RunResult r = train_alsa_run(run, &st_train, &st_test, nullptr);
  return *r.test_report;
}

std::vector<CrossDomainCell> cross_domain_grid(const ExperimentConfig& base,
                                               const std::map<Domain, DomainInputs>& inputs,
                                               std::size_t threads) {
  std::vector<CrossDomainCell> cells;
  for (Domain ae : {Domain::kLaptop, Domain::kRestaurant})
    for (Domain alsa : {Domain::kLaptop, Domain::kRestaurant})
      for (Architecture a : {Architecture::kTcLstm, Architecture::kAtae, Architecture::kIan})
        cells.push_back({ae, alsa, a, std::nullopt, {}});
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    CrossDomainCell& c = cells[i];
    try {
      auto ae_in = inputs.find(c.ae_domain);
      auto alsa_in = inputs.find(c.alsa_domain);
      if (ae_in == inputs.end() || alsa_in == inputs.end()) {
        throw InvalidArgument("no inputs configured for this domain pairing");
      }
      ExperimentConfig cfg = base;
      cfg.ae_domain = c.ae_domain;
      cfg.alsa_domain = c.alsa_domain;
      cfg.architecture = c.architecture;
      cfg.train_data = alsa_in->second.train;
      cfg.test_data = alsa_in->second.test;
      cfg.ae_checkpoint = ae_in->second.ae_checkpoint;
      cfg.out_dir = base.out_dir / (std::string(domain_name(c.ae_domain)) + "-" +
                                    std::string(domain_name(c.alsa_domain)) + "-" +
                                    std::string(architecture_name(c.architecture)));
      c.report = cross_domain_run(cfg);
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });
  return cells;
}

// ---------------------------------------------------------------------------

std::string attention_json(const AttentionRecord& r) {
  nlohmann::json j;
  j["sentence_id"] = r.sentence_id;
  j["span"] = {r.span.start, r.span.end};
  j["head"] = r.head;
  j["tokens"] = r.tokens;
  j["alpha"] = r.alpha;
  j["predicted"] = std::string(polarity_name(r.predicted));
  j["gold"] = std::string(polarity_name(r.gold));
  return j.dump();
}

std::vector<AttentionRecord> dump_attention(const ExperimentConfig& cfg, const fs::path& out) {
  const ModelMeta meta = read_meta(cfg.checkpoint);
  if (meta.task == Task::kAe ||
      (meta.task == Task::kAlsa && meta.architecture == Architecture::kTcLstm)) {
    throw InvalidArgument("no attention to dump: '" + cfg.checkpoint.string() + "' is a " +
                          model_kind(meta) + " checkpoint");
  }
  require_file(cfg.test_data, "data");
  Dataset data = load_dataset(cfg.test_data, meta.domain);
  const Vocabulary vocab = vocabulary_from(meta.embeddings, meta.embed_dim, {&data});
  assign_ids(data, vocab);
  std::optional<TransferCache> st;
  InputMode mode;
  mode.variant = meta.mode;
  mode.aux_dim = meta.aux_dim;
  mode.noise_seed = meta.seed;
  if (meta.mode == InputVariant::kTransfer) {
    require_file(cfg.st_test, "S_T cache (st_test)");
    st = read_transfer(cfg.st_test);
    mode.transfer = &*st;
  }
  const auto samples = prepare_samples(data, data.samples, mode, vocab);
  const LoadedModel model = load_model(cfg.checkpoint);

  std::vector<AttentionRecord> records;
  for (const auto& s : samples) {
    const Prediction p =
        model.alsa ? predict(*model.alsa, s.words, s.span) : predict(*model.multitask, s.words, s.span);
    AttentionRecord r;
    r.sentence_id = s.sentence_id;
    r.span = s.span;
    r.predicted = p.label;
    r.gold = s.label;
    if (p.alpha) {
      r.head = "sentence";
      r.tokens = s.tokens;
      r.alpha.assign(p.alpha->values().begin(), p.alpha->values().end());
      records.push_back(r);
    }
    if (p.alpha_aspect) {
      r.head = "aspect";
      r.tokens.assign(s.tokens.begin() + static_cast<std::ptrdiff_t>(s.span.start),
                      s.tokens.begin() + static_cast<std::ptrdiff_t>(s.span.end + 1));
      r.alpha.assign(p.alpha_aspect->values().begin(), p.alpha_aspect->values().end());
      records.push_back(r);
    }
  }
  if (!out.empty()) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot write '" + out.string() + "'");
    for (const auto& r : records) os << attention_json(r) << '\n';
  }
  return records;
}

MetricsReport majority_run(const Dataset& train, const Dataset& test) {
  std::vector<Polarity> train_labels, gold;
  for (const auto& s : train.samples) train_labels.push_back(s.label);
  for (const auto& s : test.samples) gold.push_back(s.label);
  const auto pred = majority_predict(train_labels, gold.size());
  std::unordered_map<std::string, std::size_t> per_sentence;
  for (const auto& s : test.samples) ++per_sentence[s.sentence_id];
  std::vector<bool> is_ma;
  for (const auto& s : test.samples) is_ma.push_back(per_sentence[s.sentence_id] > 1);
  MetricsReport r = macro_f1(pred, gold);
  add_sa_ma_slices(r, pred, gold, is_ma);
  return r;
}

}  // namespace absa
