#pragma once

// Plain-text run configuration and the per-run manifest.
//
// Config files are line-oriented `key = value` pairs; `#` starts a comment
// and blank lines are skipped. Unknown keys are hard errors. Recognized keys
// (defaults in parentheses):
//
//   learning_rate         (1e-05)   Adam step size
//   batch_size            (32)      minibatch rows
//   kernel_width          (7)       temporal kernel frames, odd
//   weight_decay          (1)       L2 coefficient on kernel weights
//   patience              (3)       epochs without val improvement before stop
//   max_epochs            (200)     epoch cap
//   seed                  (0)       seed for single-model training
//   repetitions           (20)      experiment repetitions
//   base_seed             (0)       repetition r uses base_seed + r
//   methods               (all)     comma list of method names
//   variant               (standard) feature variant for training
//   mistaken_fraction     (0.2365)  generator target
//   fraction_tolerance    (0.03)
//   characters_per_frame  (1.71)    generator target
//   characters_tolerance  (0.3)
//   jobs                  (0)       worker bound, 0 = auto

#include <cstdlib>
#include <string>
#include <vector>

#include "mistaken/eval.hpp"
#include "mistaken/generator.hpp"
#include "mistaken/json_codec.hpp"
#include "mistaken/trainer.hpp"

namespace mistaken {

inline constexpr const char* kArtifactVersion = "1";

inline std::optional<Variant> variant_from_name(const std::string& name) {
  for (Variant v : {Variant::Standard, Variant::Centered, Variant::Flipped,
                    Variant::Rewind})
    if (name == variant_name(v)) return v;
  return std::nullopt;
}

struct RunConfig {
  TrainConfig train;
  int repetitions = 20;
  std::uint64_t base_seed = 0;
  std::vector<MethodId> methods;  // empty means the full roster
  Variant variant = Variant::Standard;
  GenTargets targets;
  int jobs = 0;
};

inline std::vector<MethodId> resolved_methods(const RunConfig& cfg) {
  if (!cfg.methods.empty()) return cfg.methods;
  std::vector<MethodId> all;
  for (int i = 0; i < kMethodCount; ++i) all.push_back(static_cast<MethodId>(i));
  return all;
}

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ValidationError("config key '" + key + "': bad number '" + value + "'");
  return v;
}

inline long long parse_int(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ValidationError("config key '" + key + "': bad integer '" + value + "'");
  return v;
}

inline std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string piece =
        trim(comma == std::string::npos ? value.substr(start)
                                        : value.substr(start, comma - start));
    if (!piece.empty()) parts.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

}  // namespace config_detail

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line =
        nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    const std::string key = config_detail::trim(line.substr(0, eq));
    const std::string value = config_detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");

    using config_detail::parse_double;
    using config_detail::parse_int;
    if (key == "learning_rate") {
      cfg.train.learning_rate = parse_double(key, value);
    } else if (key == "batch_size") {
      cfg.train.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "kernel_width") {
      cfg.train.K = static_cast<int>(parse_int(key, value));
    } else if (key == "weight_decay") {
      cfg.train.weight_decay = parse_double(key, value);
    } else if (key == "patience") {
      cfg.train.patience = static_cast<int>(parse_int(key, value));
    } else if (key == "max_epochs") {
      cfg.train.max_epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      cfg.train.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "repetitions") {
      cfg.repetitions = static_cast<int>(parse_int(key, value));
    } else if (key == "base_seed") {
      cfg.base_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const std::string& name : config_detail::split_csv(value)) {
        const std::optional<MethodId> id = method_from_name(name);
        if (!id)
          throw ValidationError("config key 'methods': unknown method '" + name + "'");
        cfg.methods.push_back(*id);
      }
      if (cfg.methods.empty())
        throw ValidationError("config key 'methods': empty list");
    } else if (key == "variant") {
      const std::optional<Variant> v = variant_from_name(value);
      if (!v)
        throw ValidationError("config key 'variant': unknown variant '" + value + "'");
      cfg.variant = *v;
    } else if (key == "mistaken_fraction") {
      cfg.targets.mistaken_frame_fraction = parse_double(key, value);
    } else if (key == "fraction_tolerance") {
      cfg.targets.fraction_tolerance = parse_double(key, value);
    } else if (key == "characters_per_frame") {
      cfg.targets.mean_characters_per_frame = parse_double(key, value);
    } else if (key == "characters_tolerance") {
      cfg.targets.characters_tolerance = parse_double(key, value);
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(parse_int(key, value));
    } else {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
    }
  }
  if (cfg.train.batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
  if (cfg.train.K < 1 || cfg.train.K % 2 == 0)
    throw ValidationError("config: kernel_width must be odd and positive");
  if (cfg.train.patience < 1) throw ValidationError("config: patience must be >= 1");
  if (cfg.train.max_epochs < 1) throw ValidationError("config: max_epochs must be >= 1");
  if (cfg.repetitions < 1) throw ValidationError("config: repetitions must be >= 1");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

// The resolved configuration as JSON, key-per-key in the text schema's names.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["learning_rate"] = cfg.train.learning_rate;
  j["batch_size"] = cfg.train.batch_size;
  j["kernel_width"] = cfg.train.K;
  j["weight_decay"] = cfg.train.weight_decay;
  j["patience"] = cfg.train.patience;
  j["max_epochs"] = cfg.train.max_epochs;
  j["seed"] = cfg.train.seed;
  j["repetitions"] = cfg.repetitions;
  j["base_seed"] = cfg.base_seed;
  nlohmann::json names = nlohmann::json::array();
  for (MethodId id : resolved_methods(cfg)) names.push_back(method_traits(id).name);
  j["methods"] = names;
  j["variant"] = variant_name(cfg.variant);
  j["mistaken_fraction"] = cfg.targets.mistaken_frame_fraction;
  j["fraction_tolerance"] = cfg.targets.fraction_tolerance;
  j["characters_per_frame"] = cfg.targets.mean_characters_per_frame;
  j["characters_tolerance"] = cfg.targets.characters_tolerance;
  j["jobs"] = cfg.jobs;
  return j;
}

// Every subcommand drops one of these next to its outputs. `outcome` holds
// command-specific facts (counts, seeds, file names); no wall-clock state.
inline void save_manifest(const RunConfig& cfg, const std::string& command,
                          const nlohmann::json& outcome, const std::string& path) {
  nlohmann::json j;
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  j["outcome"] = outcome;
  write_text_file(path, dump_json(j));
}

}  // namespace mistaken
