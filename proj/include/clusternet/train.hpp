#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clusternet/dataset.hpp"
#include "clusternet/loss.hpp"
#include "clusternet/model.hpp"

namespace clusternet {

struct TrainConfig {
  int batch_sets = 32;  // N, sets per mini-batch
  int set_size = 16;    // n, examples per set
  double lambda = 5.0;
  double learning_rate = 5.0;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-8;
  int steps = 3000;
  std::uint64_t seed = 1;
  double clip_norm = 10.0;  // global gradient-norm cap; 0 disables clipping

  int checkpoint_interval = 0;  // steps between checkpoints; 0 disables
  std::string checkpoint_dir;   // required when checkpoint_interval > 0

  int validation_interval = 100;  // steps between validation passes; 0 disables
  int validation_episodes = 50;
  bool early_stopping = true;
  int patience = 10;  // consecutive validations without improvement

  void validate() const;  // throws std::invalid_argument
};

// Short hex fingerprint of a TrainConfig, stored in saved model containers so
// a model file records what produced it.
std::string train_config_digest(const TrainConfig& config);

// Adadelta accumulators, one pair per parameter tensor in enumeration order.
struct AdadeltaState {
  std::vector<Eigen::MatrixXd> grad_sq;   // running average of g^2
  std::vector<Eigen::MatrixXd> delta_sq;  // running average of update^2

  static AdadeltaState create(const ModelParameters& params);
};

// One Adadelta update, deltas scaled by lr. Non-trainable tensors are left
// untouched. Throws std::runtime_error on a non-finite gradient.
void adadelta_step(AdadeltaState& state, ModelParameters& params,
                   const ModelParameters& grads, double rho, double eps,
                   double lr);

// Scales trainable gradients so their global norm is at most clip_norm.
// Returns the pre-clip norm. clip_norm <= 0 measures without clipping.
double clip_gradients(ModelParameters& grads, double clip_norm);

struct StepRecord {
  int step = 0;
  LossValues loss;  // means over the mini-batch
};

struct ValidationRecord {
  int step = 0;  // steps completed when the pass ran
  double mr_mean = 0.0;
  double nmi_mean = 0.0;
  double count_accuracy = 0.0;
  bool improved = false;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
  std::vector<double> elapsed_seconds;  // per step; kept out of the log so
                                        // equal-seed runs log identically
  bool aborted = false;
  int abort_step = -1;
  std::uint64_t abort_seed = 0;  // mini-batch seed of the offending step
  bool early_stopped = false;
  int best_step = 0;     // steps completed at the best validation
  double best_mr = 1.0;  // best validation mr_mean seen

  void append_log(std::ostream& out) const;  // line-delimited JSON
};

void write_history_file(const TrainHistory& history, const std::string& path);

// Mean loss over the batch's sets, forward only.
LossValues batch_loss(const ModelParameters& params, const MiniBatch& batch,
                      const LossWeights& weights, double lambda);

// Accumulates d(mean L_tot)/dtheta over the batch into grads.
void batch_gradients(const ModelParameters& params, const MiniBatch& batch,
                     const LossWeights& weights, double lambda,
                     ModelParameters& grads);

// Runs the training loop on params in place: compose a mini-batch, average
// forward/backward over its sets, clip, Adadelta-update, and re-project the
// metric when one is trained. Validation passes draw from a stream disjoint
// from training; with early stopping the best-validation snapshot is
// restored at the end. A non-finite loss aborts with the batch seed logged.
TrainHistory train(ModelParameters& params, const TrainConfig& config,
                   const GeneratorSpec& spec);

// Same loop starting mid-run from existing optimizer state; used to resume
// from a checkpoint. Runs steps [start_step, config.steps).
TrainHistory train_from(ModelParameters& params, AdadeltaState& state,
                        int start_step, const TrainConfig& config,
                        const GeneratorSpec& spec);

struct GradientGroupReport {
  std::string name;
  Eigen::Index checked = 0;
  double max_rel_err = 0.0;
};

struct GradientCheckReport {
  double tolerance = 0.0;
  double max_rel_err = 0.0;
  bool pass = false;
  std::vector<GradientGroupReport> groups;

  std::string to_string() const;
};

// Central finite differences of the mean batch loss against the given
// analytic gradients. At most max_samples entries are probed, strided
// deterministically across the trainable tensors; a diagonal metric only has
// its diagonal probed. Relative error uses a 1e-6 denominator floor.
GradientCheckReport compare_gradients(ModelParameters& params,
                                      const MiniBatch& batch,
                                      const LossWeights& weights,
                                      double lambda,
                                      const ModelParameters& analytic,
                                      double tolerance, double h = 1e-5,
                                      Eigen::Index max_samples = 10000);

// compare_gradients against freshly computed batch_gradients.
GradientCheckReport gradient_check(ModelParameters& params,
                                   const MiniBatch& batch,
                                   const LossWeights& weights, double lambda,
                                   double tolerance, double h = 1e-5,
                                   Eigen::Index max_samples = 10000);

}  // namespace clusternet
