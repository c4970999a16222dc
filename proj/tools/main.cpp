#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clusternet/config.hpp"
#include "clusternet/eval.hpp"
#include "clusternet/io_error.hpp"
#include "clusternet/plot.hpp"
#include "clusternet/rng.hpp"
#include "clusternet/serialize.hpp"
#include "clusternet/train.hpp"

namespace {

using namespace clusternet;
using nlohmann::json;

// Exit codes: 0 ok, 2 validation (bad config, flags, or input content),
// 3 runtime (aborted training, internal failure), 4 io (missing or
// unwritable files, corrupt artifacts).
constexpr int kOkExit = 0;
constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;
constexpr int kIoExit = 4;

int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationExit;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  json parsed = json::parse(in, nullptr, false);
  if (parsed.is_discarded())
    throw std::invalid_argument(path + " is not valid JSON");
  return parsed;
}

// Same per-set frame the generator uses: each dimension min-max scaled to
// [-1, 1]; a dimension with zero spread collapses to 0.
Eigen::Matrix2Xd normalize_unit_box(const Eigen::Matrix2Xd& raw) {
  Eigen::Matrix2Xd scaled = raw;
  for (int d = 0; d < 2; ++d) {
    const double lo = raw.row(d).minCoeff();
    const double hi = raw.row(d).maxCoeff();
    if (hi > lo)
      scaled.row(d) =
          ((raw.row(d).array() - lo) / (hi - lo) * 2.0 - 1.0).matrix();
    else
      scaled.row(d).setZero();
  }
  return scaled;
}

int cmd_generate(const RunConfig& cfg, int count, const std::string& out) {
  if (count < 1)
    throw std::invalid_argument("generate: --count must be at least 1");
  std::vector<LabeledSet> sets;
  sets.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    MiniBatch batch =
        compose_minibatch(cfg.data, 1, cfg.train.set_size,
                          stream_seed(cfg.train.seed, SeedStream::Dataset,
                                      static_cast<std::uint64_t>(i)));
    sets.push_back(std::move(batch.sets.front()));
  }
  write_dataset_file(out, sets);
  std::cout << "wrote " << count << " sets to " << out << "\n";
  return kOkExit;
}

int cmd_train(const RunConfig& cfg, const std::string& out,
              std::string history_path) {
  if (history_path.empty()) history_path = out + ".history.jsonl";
  ModelParameters params = ModelParameters::create(cfg.model);
  const TrainHistory history = train(params, cfg.train, cfg.data);
  write_history_file(history, history_path);
  if (history.aborted) {
    std::cerr << "error: training aborted at step " << history.abort_step
              << " (non-finite loss), batch seed " << history.abort_seed
              << "\n";
    return kRuntimeExit;
  }
  save_model_file(params, out, train_config_digest(cfg.train));
  std::cout << "trained " << history.steps.size() << " steps";
  if (history.best_step > 0)
    std::cout << ", best validation mr " << history.best_mr << " at step "
              << history.best_step;
  std::cout << "\nwrote " << out << " and " << history_path << "\n";
  return kOkExit;
}

int cmd_cluster(const RunConfig& cfg, const std::string& model_path,
                const std::string& in_path, const std::string& out_path,
                bool with_probs) {
  const ModelParameters params = load_model_file(model_path);
  if (cfg.provided.count("model.k_max") > 0 &&
      cfg.model.k_max != params.config.k_max)
    throw std::invalid_argument(
        "cluster: the model was trained with k_max " +
        std::to_string(params.config.k_max) + ", config says " +
        std::to_string(cfg.model.k_max));

  const json input = parse_json_file(in_path);
  if (!input.is_array() || input.size() < 2)
    throw std::invalid_argument(
        "cluster: input must be a JSON array of at least two [x, y] points");
  const int n = static_cast<int>(input.size());
  Eigen::Matrix2Xd raw(2, n);
  for (int i = 0; i < n; ++i) {
    const json& p = input[static_cast<std::size_t>(i)];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() ||
        !p[1].is_number())
      throw std::invalid_argument("cluster: point " + std::to_string(i) +
                                  " is not an [x, y] pair");
    raw(0, i) = p[0].get<double>();
    raw(1, i) = p[1].get<double>();
  }
  if (params.config.metric_mode != MetricMode::None &&
      params.config.metric_set_size != n)
    throw std::invalid_argument(
        "cluster: this metric model is tied to sets of size " +
        std::to_string(params.config.metric_set_size) + ", input has " +
        std::to_string(n));

  const ClusteringOutput out = forward(params, normalize_unit_box(raw));
  const PartitionPrediction pred = predict_partition(out);

  json result;
  result["n"] = n;
  result["k_max"] = out.k_max;
  result["count_distribution"] =
      std::vector<double>(out.count_dist.data(),
                          out.count_dist.data() + out.count_dist.size());
  result["best_k"] = pred.k_pred;
  result["assignments"] = pred.labels;
  json per_k = json::array();
  for (const Partition& part : pred.per_k)
    per_k.push_back(json{{"k", part.k},
                         {"probability", part.probability},
                         {"labels", part.labels}});
  result["per_k"] = std::move(per_k);
  json points = json::array();
  for (int i = 0; i < n; ++i) points.push_back({raw(0, i), raw(1, i)});
  result["points"] = std::move(points);
  if (with_probs) {
    json probs = json::array();
    for (int k = 1; k <= out.k_max; ++k) {
      json rows = json::array();
      for (int i = 0; i < n; ++i) {
        const auto seg =
            out.assign.col(i).segment(ClusteringOutput::group_offset(k), k);
        rows.push_back(std::vector<double>(seg.data(), seg.data() + k));
      }
      probs.push_back(json{{"k", k}, {"probs", std::move(rows)}});
    }
    result["assignment_probs"] = std::move(probs);
  }

  auto file = open_out(out_path);
  file << result.dump(2) << "\n";
  if (!file) throw IoError("write failed: " + out_path);
  std::cout << "wrote " << out_path << " (best_k " << pred.k_pred << ")\n";
  return kOkExit;
}

int cmd_eval(RunConfig cfg, const std::string& model_path,
             const std::string& report_path, const std::string& csv_path,
             int episodes) {
  const ModelParameters params = load_model_file(model_path);
  const bool k_max_pinned = cfg.provided.count("model.k_max") > 0 ||
                            cfg.provided.count("data.k_max") > 0;
  if (k_max_pinned && params.config.k_max != cfg.data.k_max)
    throw std::invalid_argument(
        "eval: the model was trained with k_max " +
        std::to_string(params.config.k_max) + ", config says " +
        std::to_string(cfg.data.k_max));
  cfg.data.k_max = params.config.k_max;
  if (params.config.metric_mode != MetricMode::None) {
    if (cfg.provided.count("train.set_size") > 0 &&
        params.config.metric_set_size != cfg.train.set_size)
      throw std::invalid_argument(
          "eval: this metric model is tied to sets of size " +
          std::to_string(params.config.metric_set_size) +
          ", train.set_size is " + std::to_string(cfg.train.set_size));
    cfg.train.set_size = params.config.metric_set_size;
  }
  if (episodes < 1)
    throw std::invalid_argument("eval: --episodes must be at least 1");

  const EvalReport report = evaluate_model(params, cfg.data, episodes,
                                           cfg.train.set_size, cfg.eval_seed);
  write_report_json_file(report_path, report);
  if (!csv_path.empty()) write_report_csv_file(csv_path, report);

  char line[128];
  std::snprintf(line, sizeof line,
                "mr_mean %.6f\nnmi_mean %.6f\ncount_accuracy %.6f\n",
                report.mr_mean, report.nmi_mean, report.count_accuracy);
  std::cout << line;
  return kOkExit;
}

LabeledSet pick_set(const std::string& path, int index) {
  const std::vector<LabeledSet> sets = read_dataset_file(path);
  if (index < 0 || static_cast<std::size_t>(index) >= sets.size())
    throw std::invalid_argument("plot: --index " + std::to_string(index) +
                                " is outside " + path + " (" +
                                std::to_string(sets.size()) + " sets)");
  return sets[static_cast<std::size_t>(index)];
}

int cmd_plot(const std::string& data_path, const std::string& result_path,
             const std::string& truth_path, int index,
             const std::string& out_path) {
  std::string svg;
  if (!data_path.empty()) {
    const LabeledSet set = pick_set(data_path, index);
    svg = render_scatter_svg(set.points, set.labels);
  } else {
    const json result = parse_json_file(result_path);
    const auto& pts = result.at("points");
    const int n = static_cast<int>(pts.size());
    if (n < 1)
      throw std::invalid_argument("plot: the result holds no points");
    Eigen::Matrix2Xd points(2, n);
    for (int i = 0; i < n; ++i) {
      points(0, i) = pts[static_cast<std::size_t>(i)].at(0).get<double>();
      points(1, i) = pts[static_cast<std::size_t>(i)].at(1).get<double>();
    }
    std::vector<int> labels =
        result.at("assignments").get<std::vector<int>>();
    if (labels.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument(
          "plot: assignments and points disagree in length");

    std::vector<bool> outlined;
    if (!truth_path.empty()) {
      const LabeledSet truth = pick_set(truth_path, index);
      bool same = truth.n() == n;
      for (int i = 0; same && i < n; ++i)
        same = std::abs(truth.points(0, i) - points(0, i)) < 1e-9 &&
               std::abs(truth.points(1, i) - points(1, i)) < 1e-9;
      if (!same)
        throw std::invalid_argument(
            "plot: the result and the truth set describe different points");
      labels = align_labels(labels, truth.labels);
      outlined.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        outlined[static_cast<std::size_t>(i)] =
            labels[static_cast<std::size_t>(i)] !=
            truth.labels[static_cast<std::size_t>(i)];
    }
    svg = render_scatter_svg(points, labels, outlined);
  }

  auto file = open_out(out_path);
  file << svg;
  if (!file) throw IoError("write failed: " + out_path);
  std::cout << "wrote " << out_path << "\n";
  return kOkExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "clusternet: learns to cluster point sets end-to-end from pairwise "
      "same/different labels, predicting a cluster-count distribution and "
      "per-element assignments."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  bool deterministic = false;
  app.add_option("--config", config_path,
                 "configuration file of `key = value` lines");
  auto* seed_opt =
      app.add_option("--seed", seed, "base seed for training and evaluation");
  app.add_flag("--deterministic", deterministic,
               "accepted for compatibility; every run is deterministic");

  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& key : config_keys()) {
    app.add_option_function<std::string>(
           "--" + key,
           [&overrides, key](const std::string& value) {
             overrides.emplace_back(key, value);
           })
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
        ->group("");  // hidden; see the footer
  }
  app.footer(
      "Any configuration key can be overridden as --<key>=<value>; run\n"
      "`clusternet keys` to list them.");

  auto* keys_cmd = app.add_subcommand("keys", "list configuration keys");

  auto* gen = app.add_subcommand("generate", "write labeled sets as JSONL");
  std::string gen_out;
  int gen_count = 0;
  gen->add_option("--out", gen_out, "output dataset path")->required();
  gen->add_option("--count", gen_count, "number of sets")->required();

  auto* tr = app.add_subcommand("train", "train a model");
  std::string train_out;
  std::string train_history;
  tr->add_option("--out", train_out, "model output path")->required();
  tr->add_option("--history", train_history,
                 "training log path (default <out>.history.jsonl)");

  auto* cl = app.add_subcommand("cluster", "cluster one set of points");
  std::string cl_model;
  std::string cl_in;
  std::string cl_out;
  bool cl_probs = false;
  cl->add_option("--model", cl_model, "trained model path")->required();
  cl->add_option("--in", cl_in, "JSON array of [x, y] points")->required();
  cl->add_option("--out", cl_out, "result JSON path")->required();
  cl->add_flag("--probs", cl_probs,
               "include the full per-k assignment probabilities");

  auto* ev = app.add_subcommand("eval", "evaluate a model on fresh episodes");
  std::string ev_model;
  std::string ev_report;
  std::string ev_csv;
  int ev_episodes = 0;
  ev->add_option("--model", ev_model, "trained model path")->required();
  ev->add_option("--report", ev_report, "report JSON path")->required();
  ev->add_option("--csv", ev_csv, "also write per-episode rows as CSV");
  ev->add_option("--episodes", ev_episodes,
                 "episode count (default eval.episodes)");

  auto* pl = app.add_subcommand("plot", "render a set or a result as SVG");
  std::string pl_data;
  std::string pl_result;
  std::string pl_truth;
  int pl_index = 0;
  std::string pl_out;
  pl->add_option("--data", pl_data, "dataset JSONL to plot by true labels");
  pl->add_option("--result", pl_result, "cluster-result JSON to plot");
  pl->add_option("--truth", pl_truth,
                 "dataset JSONL; outlines points the result misassigns");
  pl->add_option("--index", pl_index, "set index within the dataset file");
  pl->add_option("--out", pl_out, "SVG output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationExit;
  }

  return guard([&]() -> int {
    if (*keys_cmd) {
      for (const std::string& key : config_keys()) std::cout << key << "\n";
      return kOkExit;
    }

    RunConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (seed_opt->count() > 0) {
      cfg.train.seed = seed;
      cfg.eval_seed = seed;
    }
    for (const auto& [key, value] : overrides)
      apply_config_value(cfg, key, value);
    cfg.finalize();
    cfg.validate();

    if (*gen) return cmd_generate(cfg, gen_count, gen_out);
    if (*tr) return cmd_train(cfg, train_out, train_history);
    if (*cl) return cmd_cluster(cfg, cl_model, cl_in, cl_out, cl_probs);
    if (*ev)
      return cmd_eval(cfg, ev_model, ev_report, ev_csv,
                      ev_episodes > 0 ? ev_episodes : cfg.eval_episodes);
    if (*pl) {
      if (pl_data.empty() == pl_result.empty())
        throw std::invalid_argument(
            "plot: pass exactly one of --data or --result");
      if (!pl_truth.empty() && pl_result.empty())
        throw std::invalid_argument("plot: --truth goes with --result");
      return cmd_plot(pl_data, pl_result, pl_truth, pl_index, pl_out);
    }
    return kValidationExit;  // unreachable with require_subcommand(1)
  });
}
