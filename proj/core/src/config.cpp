#include "absa/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "absa/error.hpp"

namespace absa {

std::string_view task_name(Task t) {
  switch (t) {
    case Task::kAe: return "ae";
    case Task::kAlsa: return "alsa";
    case Task::kMultitask: return "multitask";
  }
  return "?";
}

Task parse_task(std::string_view s) {
  if (s == "ae") return Task::kAe;
  if (s == "alsa") return Task::kAlsa;
  if (s == "multitask" || s == "multi-task") return Task::kMultitask;
  throw InvalidArgument("unknown task '" + std::string(s) + "' (expected ae|alsa|multitask)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_key(std::string_view key) {
  std::string k(key);
  for (char& c : k) {
    if (c == '-') c = '_';
  }
  static const std::map<std::string, std::string, std::less<>> aliases{
      {"architecture", "arch"}, {"l2_lambda", "l2"},  {"train_data", "train"},
      {"test_data", "test"},    {"out_dir", "out"},   {"input_mode", "mode"}};
  if (auto it = aliases.find(k); it != aliases.end()) return it->second;
  return k;
}

double to_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InvalidArgument("config: '" + std::string(key) + "' expects a number, got '" + s + "'");
  }
  return d;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument("config: '" + std::string(key) + "' expects a boolean, got '" +
                        std::string(v) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"task", [](auto& c, auto, auto v) { c.task = parse_task(v); },
       [](const auto& c) { return std::string(task_name(c.task)); }},
      {"arch", [](auto& c, auto, auto v) { c.architecture = parse_architecture(v); },
       [](const auto& c) { return std::string(architecture_name(c.architecture)); }},
      {"mode", [](auto& c, auto, auto v) { c.mode = parse_input_variant(v); },
       [](const auto& c) { return std::string(input_variant_name(c.mode)); }},
      {"alsa_domain", [](auto& c, auto, auto v) { c.alsa_domain = parse_domain(v); },
       [](const auto& c) { return std::string(domain_name(c.alsa_domain)); }},
      {"ae_domain", [](auto& c, auto, auto v) { c.ae_domain = parse_domain(v); },
       [](const auto& c) { return std::string(domain_name(c.ae_domain)); }},
      {"lr", [](auto& c, auto k, auto v) { c.lr = to_double(k, v); },
       [](const auto& c) { return num(c.lr); }},
      {"l2", [](auto& c, auto k, auto v) { c.l2_lambda = to_double(k, v); },
       [](const auto& c) { return num(c.l2_lambda); }},
      {"d_t", [](auto& c, auto k, auto v) { c.d_t = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.d_t); }},
      {"ae_hidden", [](auto& c, auto k, auto v) { c.ae_hidden = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.ae_hidden); }},
      {"alsa_hidden", [](auto& c, auto k, auto v) { c.alsa_hidden = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.alsa_hidden); }},
      {"attn_dim", [](auto& c, auto k, auto v) { c.attn_dim = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.attn_dim); }},
      {"embed_dim", [](auto& c, auto k, auto v) { c.embed_dim = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.embed_dim); }},
      {"epochs", [](auto& c, auto k, auto v) { c.epochs = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.epochs); }},
      {"seed", [](auto& c, auto k, auto v) { c.seed = to_uint(k, v); },
       [](const auto& c) { return std::to_string(c.seed); }},
      {"dev_fraction", [](auto& c, auto k, auto v) { c.dev_fraction = to_double(k, v); },
       [](const auto& c) { return num(c.dev_fraction); }},
      {"finetune_embeddings",
       [](auto& c, auto k, auto v) { c.finetune_embeddings = to_bool(k, v); },
       [](const auto& c) { return std::string(c.finetune_embeddings ? "true" : "false"); }},
      {"train", [](auto& c, auto, auto v) { c.train_data = std::string(v); },
       [](const auto& c) { return c.train_data.string(); }},
      {"test", [](auto& c, auto, auto v) { c.test_data = std::string(v); },
       [](const auto& c) { return c.test_data.string(); }},
      {"embeddings", [](auto& c, auto, auto v) { c.embeddings = std::string(v); },
       [](const auto& c) { return c.embeddings; }},
      {"st_train", [](auto& c, auto, auto v) { c.st_train = std::string(v); },
       [](const auto& c) { return c.st_train.string(); }},
      {"st_test", [](auto& c, auto, auto v) { c.st_test = std::string(v); },
       [](const auto& c) { return c.st_test.string(); }},
      {"ae_checkpoint", [](auto& c, auto, auto v) { c.ae_checkpoint = std::string(v); },
       [](const auto& c) { return c.ae_checkpoint.string(); }},
      {"checkpoint", [](auto& c, auto, auto v) { c.checkpoint = std::string(v); },
       [](const auto& c) { return c.checkpoint.string(); }},
      {"out", [](auto& c, auto, auto v) { c.out_dir = std::string(v); },
       [](const auto& c) { return c.out_dir.string(); }},
  };
  return f;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(lr >= 0.0)) throw InvalidArgument("config: lr must be >= 0");
  if (!(l2_lambda >= 0.0)) throw InvalidArgument("config: l2 must be >= 0");
  if (embed_dim == 0) throw InvalidArgument("config: embed_dim must be positive");
  if (ae_hidden == 0 || alsa_hidden == 0) throw InvalidArgument("config: hidden sizes must be positive");
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) throw InvalidArgument("config: dev_fraction must be in [0, 1)");
  if (task == Task::kAlsa && mode == InputVariant::kTransfer && st_train.empty()) {
    throw InvalidArgument("config: transfer mode needs an S_T cache (st_train)");
  }
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k = normalize_key(key);
  for (const auto& f : fields()) {
    if (k == f.key) {
      f.set(cfg, k, trim(value));
      return;
    }
  }
  throw InvalidArgument("config: unknown key '" + std::string(key) + "'");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    out[normalize_key(trim(t.substr(0, eq)))] = trim(t.substr(eq + 1));
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
  for (const auto& [k, v] : parse_key_values(text)) apply_setting(base, k, v);
  return base;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config_text(text, std::move(base));
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

}  // namespace absa
