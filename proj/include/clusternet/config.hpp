#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "clusternet/dataset.hpp"
#include "clusternet/model.hpp"
#include "clusternet/train.hpp"

namespace clusternet {

// One run = one flat-keyed configuration: model.*, metric.*, train.*,
// data.*, and eval.* keys merged from a config file plus --key=value
// overrides. Unknown keys are rejected by name.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  GeneratorSpec data;
  int eval_episodes = 300;
  std::uint64_t eval_seed = 1;

  std::set<std::string> provided;  // dotted keys that were set explicitly

  // Ties dependent fields together: k_max set on only one side is mirrored
  // to the other, and a metric model inherits train.set_size as its tied
  // set size. Call after the last key is applied, before validate().
  void finalize();

  // Sub-config invariants plus cross-checks (model.k_max == data.k_max).
  void validate() const;  // throws std::invalid_argument
};

// Applies one dotted key. Throws std::invalid_argument naming the key for
// unknown keys or unparsable values.
void apply_config_value(RunConfig& config, const std::string& key,
                        const std::string& value);

// `key = value` lines; blank lines and lines starting with # are skipped.
void parse_config(RunConfig& config, std::istream& in);
void load_config_file(RunConfig& config, const std::string& path);

// One command-line override of the form key=value.
void apply_override(RunConfig& config, const std::string& assignment);

// Every recognized key, sorted; used for help output and diagnostics.
std::vector<std::string> config_keys();

}  // namespace clusternet
