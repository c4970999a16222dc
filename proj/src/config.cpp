#include "clusternet/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "clusternet/io_error.hpp"
#include "clusternet/metric.hpp"

namespace clusternet {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* want) {
  throw std::invalid_argument("config: key '" + key + "' needs " + want +
                              ", got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "an integer");
  }
  if (used != value.size()) bad_value(key, value, "an integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
  if (used != value.size()) bad_value(key, value, "a number");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "an unsigned integer");
  }
  if (used != value.size() || value.front() == '-')
    bad_value(key, value, "an unsigned integer");
  return out;
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::vector<Family> parse_families(const std::string& key,
                                   const std::string& value) {
  std::vector<Family> families;
  std::stringstream parts(value);
  std::string item;
  while (std::getline(parts, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    const auto end = item.find_last_not_of(" \t");
    if (begin == std::string::npos)
      bad_value(key, value, "a comma-separated family list");
    try {
      families.push_back(parse_family(item.substr(begin, end - begin + 1)));
    } catch (const std::invalid_argument&) {
      bad_value(key, value, "a comma-separated family list");
    }
  }
  if (families.empty())
    bad_value(key, value, "a comma-separated family list");
  return families;
}

using Setter =
    std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.k_max",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.k_max = parse_int(k, v);
       }},
      {"model.layers",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.layers = parse_int(k, v);
       }},
      {"model.fc_units",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.fc_units = parse_int(k, v);
       }},
      {"model.count_units",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.count_units = parse_int(k, v);
       }},
      {"model.leaky_slope",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.leaky_slope = parse_double(k, v);
       }},
      {"model.param_seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.param_seed = parse_u64(k, v);
       }},
      {"metric.mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           c.model.metric_mode = parse_metric_mode(v);
         } catch (const std::invalid_argument&) {
           bad_value(k, v, "none, euclidean, diagonal, or full");
         }
       }},
      {"metric.concat",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.metric_concat = parse_flag(k, v);
       }},
      {"train.batch_sets",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.batch_sets = parse_int(k, v);
       }},
      {"train.set_size",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.set_size = parse_int(k, v);
       }},
      {"train.lambda",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.lambda = parse_double(k, v);
       }},
      {"train.learning_rate",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.learning_rate = parse_double(k, v);
       }},
      {"train.adadelta_rho",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.adadelta_rho = parse_double(k, v);
       }},
      {"train.adadelta_eps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.adadelta_eps = parse_double(k, v);
       }},
      {"train.steps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.steps = parse_int(k, v);
       }},
      {"train.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.seed = parse_u64(k, v);
       }},
      {"train.clip_norm",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.clip_norm = parse_double(k, v);
       }},
      {"train.checkpoint_interval",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.checkpoint_interval = parse_int(k, v);
       }},
      {"train.checkpoint_dir",
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.train.checkpoint_dir = v;
       }},
      {"train.validation_interval",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.validation_interval = parse_int(k, v);
       }},
      {"train.validation_episodes",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.validation_episodes = parse_int(k, v);
       }},
      {"train.early_stopping",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.early_stopping = parse_flag(k, v);
       }},
      {"train.patience",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.patience = parse_int(k, v);
       }},
      {"data.families",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.families = parse_families(k, v);
       }},
      {"data.k_max",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.k_max = parse_int(k, v);
       }},
      {"data.size_policy",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           c.data.size_policy = parse_size_policy(v);
         } catch (const std::invalid_argument&) {
           bad_value(k, v, "independent-uniform or balanced");
         }
       }},
      {"data.blob_sigma_min",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.blob_sigma_min = parse_double(k, v);
       }},
      {"data.blob_sigma_max",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.blob_sigma_max = parse_double(k, v);
       }},
      {"data.blob_separation",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.blob_separation = parse_double(k, v);
       }},
      {"data.ring_noise",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.ring_noise = parse_double(k, v);
       }},
      {"data.moon_noise",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.moon_noise = parse_double(k, v);
       }},
      {"data.moon_separation",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.moon_separation = parse_double(k, v);
       }},
      {"data.aniso_ratio",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.aniso_ratio = parse_double(k, v);
       }},
      {"data.box_half_min",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.box_half_min = parse_double(k, v);
       }},
      {"data.box_half_max",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.box_half_max = parse_double(k, v);
       }},
      {"data.box_gap",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.data.box_gap = parse_double(k, v);
       }},
      {"eval.episodes",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.eval_episodes = parse_int(k, v);
       }},
      {"eval.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.eval_seed = parse_u64(k, v);
       }},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void RunConfig::finalize() {
  const bool model_k = provided.count("model.k_max") > 0;
  const bool data_k = provided.count("data.k_max") > 0;
  if (model_k && !data_k) data.k_max = model.k_max;
  if (data_k && !model_k) model.k_max = data.k_max;
  if (model.metric_mode != MetricMode::None)
    model.metric_set_size = train.set_size;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  if (model.k_max != data.k_max)
    throw std::invalid_argument(
        "config: model.k_max and data.k_max disagree (" +
        std::to_string(model.k_max) + " vs " + std::to_string(data.k_max) +
        ")");
  if (eval_episodes < 1)
    throw std::invalid_argument("config: eval.episodes must be at least 1");
}

void apply_config_value(RunConfig& config, const std::string& key,
                        const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end())
    throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second(config, key, value);
  config.provided.insert(key);
}

void parse_config(RunConfig& config, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not of the form key = value");
    apply_config_value(config, trim(text.substr(0, eq)),
                       trim(text.substr(eq + 1)));
  }
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  parse_config(config, in);
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("config: override '" + assignment +
                                "' is not of the form key=value");
  apply_config_value(config, trim(assignment.substr(0, eq)),
                     trim(assignment.substr(eq + 1)));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, setter] : setters()) keys.push_back(key);
  return keys;
}

}  // namespace clusternet
