#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absa/alsa.hpp"
#include "absa/types.hpp"

namespace absa {

enum class Task { kAe, kAlsa, kMultitask };

std::string_view task_name(Task t);
Task parse_task(std::string_view s);

struct ExperimentConfig {
  Task task = Task::kAlsa;
  Architecture architecture = Architecture::kAtae;
  InputVariant mode = InputVariant::kPlain;
  Domain alsa_domain = Domain::kLaptop;
  Domain ae_domain = Domain::kLaptop;

  double lr = 0.001;
  double l2_lambda = 0.0;
  std::size_t d_t = 64;          // S_T / noise width
  std::size_t ae_hidden = 32;    // per direction; d_t = 2 * ae_hidden for AE runs
  std::size_t alsa_hidden = 128;
  std::size_t attn_dim = 0;
  std::size_t embed_dim = 300;
  std::size_t epochs = 25;
  std::uint64_t seed = 1;
  double dev_fraction = 0.1;
  bool finetune_embeddings = false;

  // SemEval XML (*.xml) or processed cache (*.jsonl).
  std::filesystem::path train_data;
  std::filesystem::path test_data;
  // GloVe-format text file, or "random" for seeded per-token vectors.
  std::string embeddings = "random";
  std::filesystem::path st_train;  // S_T archive for train_data (transfer mode)
  std::filesystem::path st_test;   // S_T archive for test_data (transfer mode)
  std::filesystem::path ae_checkpoint;
  std::filesystem::path checkpoint;  // model to evaluate / dump
  std::filesystem::path out_dir = "runs/default";

  // Throws InvalidArgument for inconsistent settings.
  void validate() const;
};

// Sets one field by its key (the same names the config file and CLI use,
// with '-' and '_' interchangeable). Throws InvalidArgument on unknown keys
// or malformed values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

// "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});
std::string to_config_text(const ExperimentConfig& cfg);

std::vector<std::string> config_keys();

// Plain key=value parsing shared with checkpoint metadata files.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace absa
