// absa: command-line front end for training, evaluation and analysis runs.
//
// Every subcommand accepts --config FILE plus one flag per config key; flags
// override the file. Failures print a single JSON line
//   {"error":{"kind":"...","message":"..."}}
// on stderr and exit with status 1 (2 for command-line usage errors).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "absa/config.hpp"
#include "absa/error.hpp"
#include "absa/experiments.hpp"
#include "absa/metrics.hpp"

namespace {

using absa::ExperimentConfig;

struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool finetune = false;
};

std::string dashed(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

// Adds --config and one option per config key. `skip` keys are not exposed.
void add_config_flags(CLI::App* app, ConfigFlags& flags, const std::vector<std::string>& skip = {}) {
  app->add_option("--config", flags.config_file, "key = value config file")
      ->check(CLI::ExistingFile);
  for (const auto& key : absa::config_keys()) {
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    if (key == "finetune_embeddings") {
      app->add_flag("--finetune-embeddings", flags.finetune, "Update word embeddings (AE)");
      continue;
    }
    std::string names = "--" + dashed(key);
    if (dashed(key) != key) names += ",--" + key;
    app->add_option(names, flags.values[key]);
  }
}

ExperimentConfig resolve(CLI::App* app, const ConfigFlags& flags, ExperimentConfig base = {}) {
  if (!flags.config_file.empty()) base = absa::load_config_file(flags.config_file, base);
  for (const auto& [key, value] : flags.values) {
    if (app->count("--" + dashed(key)) > 0) absa::apply_setting(base, key, value);
  }
  if (flags.finetune) base.finetune_embeddings = true;
  return base;
}

void print_report(const absa::MetricsReport& r, const std::string& name) {
  std::cout << absa::format_report(r, name) << absa::report_json(r, name) << '\n';
}

std::string span_json(const absa::SpanScores& s, const std::string& name) {
  nlohmann::json j;
  j["name"] = name;
  j["span_precision"] = std::round(10000.0 * s.precision) / 100.0;
  j["span_recall"] = std::round(10000.0 * s.recall) / 100.0;
  j["span_f1"] = std::round(10000.0 * s.f1) / 100.0;
  return j.dump();
}

void print_error(const std::string& kind, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

std::string run_name(const ExperimentConfig& c) {
  if (c.task == absa::Task::kMultitask) return "multitask/" + std::string(absa::domain_name(c.alsa_domain));
  std::string n(absa::architecture_name(c.architecture));
  if (c.mode == absa::InputVariant::kTransfer) n += "-T";
  if (c.mode == absa::InputVariant::kNoise) n += "-R";
  return n + "/" + std::string(absa::domain_name(c.alsa_domain));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aspect extraction and aspect-level sentiment analysis experiments"};
  app.require_subcommand(1);

  ConfigFlags f_ae, f_st, f_alsa, f_eval, f_grid, f_cross, f_dump, f_major;

  auto* train_ae = app.add_subcommand("train-ae", "Train the BiGRU-CRF aspect extractor");
  add_config_flags(train_ae, f_ae);

  auto* export_st = app.add_subcommand("export-st", "Export S_T for a dataset from an AE checkpoint");
  add_config_flags(export_st, f_st);
  std::string st_data, st_out;
  export_st->add_option("--data", st_data, "Dataset to run the AE model over")->required();
  export_st->add_option("--output", st_out, "S_T archive to write")->required();

  auto* train_alsa = app.add_subcommand("train-alsa", "Train an ALSA or multi-task model");
  add_config_flags(train_alsa, f_alsa);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on test data");
  add_config_flags(eval, f_eval);

  auto* grid = app.add_subcommand("grid-search", "Train one model per grid point and rank them");
  add_config_flags(grid, f_grid);
  std::vector<std::string> grid_specs;
  std::size_t grid_threads = 0;
  grid->add_option("--grid", grid_specs, "key=v1,v2,... (repeatable)")->required();
  grid->add_option("--threads", grid_threads, "Parallel runs (0: all cores)");

  auto* cross = app.add_subcommand("cross-domain", "Transfer S_T across domains");
  add_config_flags(cross, f_cross);
  bool cross_all = false;
  std::size_t cross_threads = 0;
  std::map<std::string, std::string> cross_paths;
  cross->add_flag("--all", cross_all, "Run every AE-domain x ALSA-domain x architecture cell");
  cross->add_option("--threads", cross_threads, "Parallel cells (0: all cores)");
  for (const char* d : {"laptop", "restaurant"}) {
    for (const char* what : {"train", "test", "ae"}) {
      const std::string key = std::string(d) + "-" + what;
      cross->add_option("--" + key, cross_paths[key]);
    }
  }

  auto* dump = app.add_subcommand("dump-attention", "Write attention weights as JSON lines");
  add_config_flags(dump, f_dump);
  std::string dump_out;
  dump->add_option("--output", dump_out, "Attention records file")->required();

  auto* majority = app.add_subcommand("majority", "Majority-class baseline");
  add_config_flags(majority, f_major);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*train_ae) {
      ExperimentConfig base;
      base.task = absa::Task::kAe;
      ExperimentConfig cfg = resolve(train_ae, f_ae, base);
      cfg.task = absa::Task::kAe;
      auto r = absa::train_from_config(cfg, &std::cout);
      if (r.test_spans) std::cout << span_json(*r.test_spans, "ae/" + std::string(absa::domain_name(cfg.ae_domain))) << '\n';
    } else if (*export_st) {
      ExperimentConfig cfg = resolve(export_st, f_st);
      auto cache = absa::export_st(cfg, st_data, st_out);
      std::cout << "exported " << cache.size() << " sentences to " << st_out << '\n';
    } else if (*train_alsa) {
      ExperimentConfig cfg = resolve(train_alsa, f_alsa);
      if (cfg.task == absa::Task::kAe) throw absa::InvalidArgument("train-alsa: task must be alsa or multitask");
      auto r = absa::train_from_config(cfg, &std::cout);
      if (r.test_report) print_report(*r.test_report, run_name(cfg));
    } else if (*eval) {
      ExperimentConfig cfg = resolve(eval, f_eval);
      const auto meta = absa::read_meta(cfg.checkpoint);
      if (meta.task == absa::Task::kAe) {
        std::cout << span_json(absa::evaluate_ae_checkpoint(cfg), "ae") << '\n';
      } else {
        std::optional<absa::Architecture> expected;
        if (eval->count("--arch")) expected = cfg.architecture;
        print_report(absa::evaluate_checkpoint(cfg, expected), cfg.checkpoint.string());
      }
    } else if (*grid) {
      ExperimentConfig cfg = resolve(grid, f_grid);
      std::map<std::string, std::vector<std::string>> points;
      for (const auto& item : grid_specs) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw absa::InvalidArgument("--grid expects key=v1,v2: " + item);
        std::string key = item.substr(0, eq);
        for (char& c : key)
          if (c == '-') c = '_';
        std::vector<std::string> vals;
        std::string rest = item.substr(eq + 1);
        for (std::size_t pos = 0;;) {
          const auto comma = rest.find(',', pos);
          vals.push_back(rest.substr(pos, comma - pos));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        points[key] = vals;
      }
      const auto rows = absa::grid_search(cfg, points, grid_threads);
      std::cout << absa::format_grid(rows);
      for (const auto& r : rows) {
        nlohmann::json j;
        j["rank"] = r.rank;
        j["settings"] = r.settings;
        if (r.dev_score) j["dev_f1"] = std::round(10000.0 * *r.dev_score) / 100.0;
        if (r.test_report) j["test_macro_f1"] = std::round(10000.0 * r.test_report->macro_f1) / 100.0;
        if (!r.error.empty()) j["error"] = r.error;
        std::cout << j.dump() << '\n';
      }
    } else if (*cross) {
      ExperimentConfig cfg = resolve(cross, f_cross);
      if (cross_all) {
        std::map<absa::Domain, absa::DomainInputs> inputs;
        for (auto d : {absa::Domain::kLaptop, absa::Domain::kRestaurant}) {
          const std::string n(absa::domain_name(d));
          absa::DomainInputs in{cross_paths[n + "-train"], cross_paths[n + "-test"],
                                cross_paths[n + "-ae"]};
          if (!in.train.empty() || !in.test.empty() || !in.ae_checkpoint.empty()) inputs[d] = in;
        }
        const auto cells = absa::cross_domain_grid(cfg, inputs, cross_threads);
        bool failed = false;
        for (const auto& c : cells) {
          const std::string name = std::string(absa::architecture_name(c.architecture)) + "-T/ae=" +
                                   std::string(absa::domain_name(c.ae_domain)) + "/alsa=" +
                                   std::string(absa::domain_name(c.alsa_domain));
          if (c.report) {
            std::cout << absa::report_json(*c.report, name) << '\n';
          } else {
            failed = true;
            nlohmann::json j;
            j["name"] = name;
            j["error"] = c.error;
            std::cout << j.dump() << '\n';
          }
        }
        return failed ? 1 : 0;
      }
      print_report(absa::cross_domain_run(cfg),
                   std::string(absa::architecture_name(cfg.architecture)) + "-T/ae=" +
                       std::string(absa::domain_name(cfg.ae_domain)) + "/alsa=" +
                       std::string(absa::domain_name(cfg.alsa_domain)));
    } else if (*dump) {
      ExperimentConfig cfg = resolve(dump, f_dump);
      const auto records = absa::dump_attention(cfg, dump_out);
      std::cout << "wrote " << records.size() << " attention records to " << dump_out << '\n';
    } else if (*majority) {
      ExperimentConfig cfg = resolve(majority, f_major);
      const auto train = absa::load_dataset(cfg.train_data, cfg.alsa_domain);
      const auto test = absa::load_dataset(cfg.test_data, cfg.alsa_domain);
      print_report(absa::majority_run(train, test), "majority/" + std::string(absa::domain_name(cfg.alsa_domain)));
    }
  } catch (const absa::Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
