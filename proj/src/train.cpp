#include "clusternet/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "clusternet/eval.hpp"
#include "clusternet/io_error.hpp"
#include "clusternet/rng.hpp"
#include "clusternet/serialize.hpp"

namespace clusternet {

namespace {

void append_number(std::string& s, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

void append_number(std::string& s, long long v) {
  s.append(std::to_string(v));
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_sets < 1)
    throw std::invalid_argument("train: batch_sets must be at least 1");
  if (set_size < 2)
    throw std::invalid_argument("train: set_size must be at least 2");
  if (lambda < 0.0)
    throw std::invalid_argument("train: lambda must be non-negative");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("train: learning_rate must be positive");
  if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0))
    throw std::invalid_argument("train: adadelta_rho must be in (0, 1)");
  if (!(adadelta_eps > 0.0))
    throw std::invalid_argument("train: adadelta_eps must be positive");
  if (steps < 0)
    throw std::invalid_argument("train: steps must be non-negative");
  if (clip_norm < 0.0)
    throw std::invalid_argument("train: clip_norm must be non-negative");
  if (checkpoint_interval < 0)
    throw std::invalid_argument("train: checkpoint_interval must be >= 0");
  if (checkpoint_interval > 0 && checkpoint_dir.empty())
    throw std::invalid_argument(
        "train: checkpointing needs a checkpoint_dir");
  if (validation_interval < 0)
    throw std::invalid_argument("train: validation_interval must be >= 0");
  if (validation_interval > 0 && validation_episodes < 1)
    throw std::invalid_argument(
        "train: validation needs at least one episode");
  if (patience < 1)
    throw std::invalid_argument("train: patience must be at least 1");
}

std::string train_config_digest(const TrainConfig& c) {
  std::string canon;
  canon += "N=";
  append_number(canon, static_cast<long long>(c.batch_sets));
  canon += ";n=";
  append_number(canon, static_cast<long long>(c.set_size));
  canon += ";lambda=";
  append_number(canon, c.lambda);
  canon += ";lr=";
  append_number(canon, c.learning_rate);
  canon += ";rho=";
  append_number(canon, c.adadelta_rho);
  canon += ";eps=";
  append_number(canon, c.adadelta_eps);
  canon += ";steps=";
  append_number(canon, static_cast<long long>(c.steps));
  canon += ";seed=";
  canon += std::to_string(c.seed);
  canon += ";clip=";
  append_number(canon, c.clip_norm);
  canon += ";val=";
  append_number(canon, static_cast<long long>(c.validation_interval));
  canon += "x";
  append_number(canon, static_cast<long long>(c.validation_episodes));
  canon += ";early=";
  canon += c.early_stopping ? "1" : "0";
  canon += ";patience=";
  append_number(canon, static_cast<long long>(c.patience));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(canon)));
  return hex;
}

AdadeltaState AdadeltaState::create(const ModelParameters& params) {
  AdadeltaState state;
  for (const ConstTensorView& v : params.tensors()) {
    state.grad_sq.push_back(Eigen::MatrixXd::Zero(v.rows, v.cols));
    state.delta_sq.push_back(Eigen::MatrixXd::Zero(v.rows, v.cols));
  }
  return state;
}

void adadelta_step(AdadeltaState& state, ModelParameters& params,
                   const ModelParameters& grads, double rho, double eps,
                   double lr) {
  auto pv = params.tensors();
  const auto gv = grads.tensors();
  if (gv.size() != pv.size() || state.grad_sq.size() != pv.size())
    throw std::invalid_argument("adadelta_step: shape mismatch");
  for (std::size_t t = 0; t < pv.size(); ++t) {
    if (!pv[t].trainable) continue;
    const Eigen::Index size = pv[t].size();
    Eigen::Map<const Eigen::ArrayXd> g(gv[t].data, size);
    if (!g.allFinite())
      throw std::runtime_error("adadelta_step: non-finite gradient in " +
                               pv[t].name);
    Eigen::Map<Eigen::ArrayXd> x(pv[t].data, size);
    Eigen::Map<Eigen::ArrayXd> eg(state.grad_sq[t].data(), size);
    Eigen::Map<Eigen::ArrayXd> ed(state.delta_sq[t].data(), size);
    eg = rho * eg + (1.0 - rho) * g.square();
    const Eigen::ArrayXd delta = -((ed + eps).sqrt() / (eg + eps).sqrt()) * g;
    ed = rho * ed + (1.0 - rho) * delta.square();
    x += lr * delta;
  }
}

double clip_gradients(ModelParameters& grads, double clip_norm) {
  double sq = 0.0;
  auto views = grads.tensors();
  for (const TensorView& v : views) {
    if (!v.trainable) continue;
    sq += Eigen::Map<const Eigen::VectorXd>(v.data, v.size()).squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (clip_norm > 0.0 && norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (TensorView& v : views) {
      if (!v.trainable) continue;
      Eigen::Map<Eigen::VectorXd>(v.data, v.size()) *= scale;
    }
  }
  return norm;
}

void TrainHistory::append_log(std::ostream& out) const {
  std::string text;
  std::size_t vi = 0;
  for (const StepRecord& s : steps) {
    text += "{\"step\":";
    append_number(text, static_cast<long long>(s.step));
    text += ",\"l_ca\":";
    append_number(text, s.loss.l_ca);
    text += ",\"l_cc\":";
    append_number(text, s.loss.l_cc);
    text += ",\"l_tot\":";
    append_number(text, s.loss.l_tot);
    text += "}\n";
    while (vi < validations.size() && validations[vi].step == s.step + 1) {
      const ValidationRecord& v = validations[vi++];
      text += "{\"step\":";
      append_number(text, static_cast<long long>(v.step));
      text += ",\"validation_mr\":";
      append_number(text, v.mr_mean);
      text += ",\"validation_nmi\":";
      append_number(text, v.nmi_mean);
      text += ",\"count_accuracy\":";
      append_number(text, v.count_accuracy);
      text += ",\"improved\":";
      text += v.improved ? "true" : "false";
      text += "}\n";
    }
  }
  if (aborted) {
    text += "{\"step\":";
    append_number(text, static_cast<long long>(abort_step));
    text += ",\"aborted\":true,\"batch_seed\":\"";
    text += std::to_string(abort_seed);
    text += "\"}\n";
  }
  out << text;
}

void write_history_file(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  history.append_log(out);
  if (!out) throw IoError("history write failed");
}

LossValues batch_loss(const ModelParameters& params, const MiniBatch& batch,
                      const LossWeights& weights, double lambda) {
  if (batch.sets.empty())
    throw std::invalid_argument("batch_loss: empty mini-batch");
  double ca = 0.0;
  double cc = 0.0;
  for (std::size_t i = 0; i < batch.sets.size(); ++i) {
    const ClusteringOutput out = forward(params, batch.sets[i].points);
    const LossValues lv =
        set_loss(out, batch.pairwise[i], batch.sets[i].k, weights, lambda);
    ca += lv.l_ca;
    cc += lv.l_cc;
  }
  const double n = static_cast<double>(batch.sets.size());
  return total_loss(ca / n, cc / n, lambda);
}

void batch_gradients(const ModelParameters& params, const MiniBatch& batch,
                     const LossWeights& weights, double lambda,
                     ModelParameters& grads) {
  if (batch.sets.empty())
    throw std::invalid_argument("batch_gradients: empty mini-batch");
  const double scale = 1.0 / static_cast<double>(batch.sets.size());
  for (std::size_t i = 0; i < batch.sets.size(); ++i) {
    ForwardCache cache;
    const ClusteringOutput out =
        forward(params, batch.sets[i].points, &cache);
    OutputGrad ograd = OutputGrad::zeros(out);
    loss_backward(out, batch.pairwise[i], batch.sets[i].k, weights, lambda,
                  scale, ograd);
    backward(params, cache, ograd, grads);
  }
}

namespace {

void check_train_inputs(const ModelParameters& params,
                        const TrainConfig& config, const GeneratorSpec& spec) {
  config.validate();
  spec.validate();
  params.config.validate();
  if (params.config.k_max != spec.k_max)
    throw std::invalid_argument("train: model and generator k_max differ");
  if (params.config.embedding_dim != 2)
    throw std::invalid_argument(
        "train: the 2-D generator needs embedding_dim == 2");
  if (params.config.metric_mode != MetricMode::None &&
      params.config.metric_set_size != config.set_size)
    throw std::invalid_argument(
        "train: metric block is tied to a different set size");
}

}  // namespace

TrainHistory train_from(ModelParameters& params, AdadeltaState& state,
                        int start_step, const TrainConfig& config,
                        const GeneratorSpec& spec) {
  check_train_inputs(params, config, spec);
  if (start_step < 0 || start_step > config.steps)
    throw std::invalid_argument("train: start_step out of range");
  if (state.grad_sq.size() != params.tensors().size())
    throw std::invalid_argument("train: optimizer state does not match");

  const LossWeights weights = class_balance_weights(
      config.set_size, params.config.k_max, spec.size_policy);
  const bool project_metric =
      params.metric.has_value() && params.metric->metric.trainable();
  if (config.checkpoint_interval > 0)
    std::filesystem::create_directories(config.checkpoint_dir);

  TrainHistory history;
  ModelParameters grads = ModelParameters::zeros(params.config);
  std::optional<ModelParameters> best;
  double best_mr = std::numeric_limits<double>::infinity();
  int stall = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (int step = start_step; step < config.steps; ++step) {
    const std::uint64_t batch_seed =
        stream_seed(config.seed, SeedStream::Train, step);
    const MiniBatch batch =
        compose_minibatch(spec, config.batch_sets, config.set_size,
                          batch_seed);

    grads.set_zero();
    double ca = 0.0;
    double cc = 0.0;
    const double scale = 1.0 / static_cast<double>(config.batch_sets);
    for (std::size_t i = 0; i < batch.sets.size(); ++i) {
      ForwardCache cache;
      const ClusteringOutput out =
          forward(params, batch.sets[i].points, &cache);
      const LossValues lv = set_loss(out, batch.pairwise[i],
                                     batch.sets[i].k, weights, config.lambda);
      ca += lv.l_ca;
      cc += lv.l_cc;
      OutputGrad ograd = OutputGrad::zeros(out);
      loss_backward(out, batch.pairwise[i], batch.sets[i].k, weights,
                    config.lambda, scale, ograd);
      backward(params, cache, ograd, grads);
    }

    const LossValues mean = total_loss(ca * scale, cc * scale, config.lambda);

    if (!std::isfinite(mean.l_tot) || !grads.all_finite()) {
      history.aborted = true;
      history.abort_step = step;
      history.abort_seed = batch_seed;
      break;
    }

    clip_gradients(grads, config.clip_norm);
    adadelta_step(state, params, grads, config.adadelta_rho,
                  config.adadelta_eps, config.learning_rate);
    if (project_metric) params.metric->metric.project();

    history.steps.push_back({step, mean});
    history.elapsed_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());

    const int done = step + 1;
    if (config.checkpoint_interval > 0 &&
        done % config.checkpoint_interval == 0) {
      const auto path = std::filesystem::path(config.checkpoint_dir) /
                        ("checkpoint_" + std::to_string(done) + ".cnet");
      save_checkpoint_file(params, state, done, path.string());
    }

    if (config.validation_interval > 0 &&
        done % config.validation_interval == 0) {
      const std::uint64_t val_seed =
          stream_seed(config.seed, SeedStream::Validation, 0);
      const EvalReport rep =
          evaluate_model(params, spec, config.validation_episodes,
                         config.set_size, val_seed);
      const bool improved = rep.mr_mean < best_mr;
      if (improved) {
        best_mr = rep.mr_mean;
        best = params;
        history.best_step = done;
        history.best_mr = best_mr;
        stall = 0;
      } else {
        ++stall;
      }
      history.validations.push_back(
          {done, rep.mr_mean, rep.nmi_mean, rep.count_accuracy, improved});
      if (config.early_stopping && stall >= config.patience) {
        history.early_stopped = true;
        break;
      }
    }
  }

  if (!history.aborted && config.early_stopping && best.has_value())
    params = *best;
  return history;
}

TrainHistory train(ModelParameters& params, const TrainConfig& config,
                   const GeneratorSpec& spec) {
  AdadeltaState state = AdadeltaState::create(params);
  return train_from(params, state, 0, config, spec);
}

std::string GradientCheckReport::to_string() const {
  std::ostringstream out;
  out.setf(std::ios::scientific);
  out.precision(3);
  for (const GradientGroupReport& g : groups)
    out << "  " << g.name << "  checked=" << g.checked
        << "  max_rel_err=" << g.max_rel_err << "\n";
  out << (pass ? "PASS" : "FAIL") << "  max_rel_err=" << max_rel_err
      << "  tolerance=" << tolerance << "\n";
  return out.str();
}

GradientCheckReport compare_gradients(ModelParameters& params,
                                      const MiniBatch& batch,
                                      const LossWeights& weights,
                                      double lambda,
                                      const ModelParameters& analytic,
                                      double tolerance, double h,
                                      Eigen::Index max_samples) {
  if (!(h > 0.0) || max_samples < 1 || !(tolerance > 0.0))
    throw std::invalid_argument("compare_gradients: bad harness settings");
  auto pv = params.tensors();
  const auto av = analytic.tensors();
  if (av.size() != pv.size())
    throw std::invalid_argument("compare_gradients: gradient shape mismatch");

  const bool diag_metric = params.config.metric_mode == MetricMode::Diagonal;
  // Eligible entries: trainable tensors, restricted to the diagonal for a
  // diagonal metric (its off-diagonal entries are structurally zero).
  const auto eligible = [&](std::size_t t) -> Eigen::Index {
    if (!pv[t].trainable) return 0;
    if (diag_metric && pv[t].name == "metric.a") return pv[t].rows;
    return pv[t].size();
  };
  Eigen::Index total = 0;
  for (std::size_t t = 0; t < pv.size(); ++t) total += eligible(t);
  const Eigen::Index stride =
      std::max<Eigen::Index>(1, (total + max_samples - 1) / max_samples);

  GradientCheckReport report;
  report.tolerance = tolerance;
  Eigen::Index ordinal = 0;
  for (std::size_t t = 0; t < pv.size(); ++t) {
    const Eigen::Index count = eligible(t);
    if (count == 0) continue;
    GradientGroupReport group{pv[t].name, 0, 0.0};
    const bool diag_only = diag_metric && pv[t].name == "metric.a";
    for (Eigen::Index e = 0; e < count; ++e, ++ordinal) {
      if (ordinal % stride != 0) continue;
      const Eigen::Index idx = diag_only ? e * (pv[t].rows + 1) : e;
      double* slot = pv[t].data + idx;
      const double orig = *slot;
      *slot = orig + h;
      const double up = batch_loss(params, batch, weights, lambda).l_tot;
      *slot = orig - h;
      const double down = batch_loss(params, batch, weights, lambda).l_tot;
      *slot = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = av[t].data[idx];
      const double rel = std::abs(exact - numeric) /
                         std::max({std::abs(exact), std::abs(numeric), 1e-6});
      group.max_rel_err = std::max(group.max_rel_err, rel);
      ++group.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, group.max_rel_err);
    report.groups.push_back(std::move(group));
  }
  report.pass = report.max_rel_err <= tolerance;
  return report;
}

GradientCheckReport gradient_check(ModelParameters& params,
                                   const MiniBatch& batch,
                                   const LossWeights& weights, double lambda,
                                   double tolerance, double h,
                                   Eigen::Index max_samples) {
  ModelParameters grads = ModelParameters::zeros(params.config);
  batch_gradients(params, batch, weights, lambda, grads);
  return compare_gradients(params, batch, weights, lambda, grads, tolerance,
                           h, max_samples);
}

}  // namespace clusternet
