#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clusternet/metric.hpp"

namespace clusternet {

// The clustering network: embedding hook, FC projection, a stack of
// residual bidirectional LSTM layers, a per-k assignment head and a
// cluster-count head. Forward passes are pure given parameters; training
// uses the handwritten backward pass below.

enum class EmbeddingKind { Identity2D, Custom };

struct ModelConfig {
  int k_max = 5;
  int layers = 4;        // stacked RBDLSTM layers in the trunk
  int fc_units = 64;     // trunk width; each direction carries fc_units/2
  int count_units = 32;  // count-head BDLSTM width (both directions together)
  double leaky_slope = 0.3;
  EmbeddingKind embedding = EmbeddingKind::Identity2D;
  int embedding_dim = 2;
  std::uint64_t param_seed = 1;

  MetricMode metric_mode = MetricMode::None;
  bool metric_concat = false;  // concat distance features with the projection
  int metric_set_size = 0;     // distance-row width n; required in metric modes

  int assignment_logits() const { return k_max * (k_max + 1) / 2; }
  void validate() const;  // throws std::invalid_argument
};

// Count distribution plus per-element, per-k assignment distributions.
struct ClusteringOutput {
  int k_max = 0;
  int n = 0;
  Eigen::VectorXd count_dist;  // length k_max, P(k) at index k-1
  Eigen::MatrixXd assign;      // k_max(k_max+1)/2 x n; rows grouped by k

  static int group_offset(int k) { return k * (k - 1) / 2; }

  // P(.|x_i, k): the k probabilities of element i under cluster count k.
  auto assignment(int i, int k) const {
    return assign.col(i).segment(group_offset(k), k);
  }

  void validate(double tol = 1e-5) const;  // simplex invariants
};

// Gradient of a scalar loss w.r.t. the output probabilities.
struct OutputGrad {
  Eigen::VectorXd d_count;
  Eigen::MatrixXd d_assign;

  static OutputGrad zeros(const ClusteringOutput& out);
};

struct LstmParams {
  // Gate rows ordered [input; forget; cell; output], each `hidden` wide.
  Eigen::MatrixXd w_x;  // 4h x d
  Eigen::MatrixXd w_h;  // 4h x h
  Eigen::VectorXd b;    // 4h

  int hidden() const { return static_cast<int>(w_h.cols()); }
  int input_dim() const { return static_cast<int>(w_x.cols()); }
};

struct BdLstmParams {
  LstmParams fw;
  LstmParams bw;
};

struct DenseParams {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

struct TensorView {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool trainable;

  Eigen::Index size() const { return rows * cols; }
};

struct ConstTensorView {
  std::string name;
  const double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool trainable;

  Eigen::Index size() const { return rows * cols; }
};

struct ModelParameters {
  ModelConfig config;
  DenseParams proj;
  std::optional<MetricBlockParams> metric;
  std::vector<BdLstmParams> trunk;
  DenseParams assign;
  BdLstmParams count_rnn;
  DenseParams count_fc1;
  DenseParams count_fc2;

  // Seeded initialization: weights uniform in [-s, s] with s = 1/sqrt(fan-in),
  // biases zero except LSTM forget gates at 1, metric matrix at identity.
  static ModelParameters create(const ModelConfig& config);
  // Same shapes, everything zero. Used for gradient accumulators.
  static ModelParameters zeros(const ModelConfig& config);

  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;

  void set_zero();
  Eigen::Index parameter_count() const;
  bool all_finite() const;
};

// Caches for one forward pass, consumed by backward().
struct LstmCache {
  Eigen::MatrixXd x;       // d x T, the inputs this direction saw
  Eigen::MatrixXd gates;   // 4h x T, post-activation [i; f; g; o]
  Eigen::MatrixXd c;       // h x T
  Eigen::MatrixXd tanh_c;  // h x T
  Eigen::MatrixXd h;       // h x T
};

struct BdCache {
  LstmCache fw;
  LstmCache bw;  // stores the reversed sequence
};

struct CountHeadCache {
  BdCache rnn;
  Eigen::VectorXd q;        // concat of first and last BDLSTM outputs
  Eigen::VectorXd fc1_pre;
  Eigen::VectorXd f;
  Eigen::VectorXd logits;
};

struct ForwardCache {
  Eigen::MatrixXd z;         // embedding output
  Eigen::MatrixXd proj_pre;
  Eigen::MatrixXd u;         // projection output
  std::optional<MetricBlockCache> metric;
  std::vector<Eigen::MatrixXd> hs;  // trunk inputs/outputs, layers+1 entries
  std::vector<BdCache> trunk;
  CountHeadCache count;
  Eigen::MatrixXd assign_logits;
  ClusteringOutput out;
};

// Identity for 2D points; custom embeddings are precomputed vectors checked
// against config.embedding_dim.
Eigen::MatrixXd embed(const ModelConfig& config, const Eigen::MatrixXd& raw);

// One residual bidirectional layer: input + concat(forward, backward)
// per step. Requires an even feature dimension.
Eigen::MatrixXd rbdlstm_forward(const BdLstmParams& params,
                                const Eigen::MatrixXd& seq,
                                BdCache* cache = nullptr);

// Per-element logits split into groups of sizes 1..k_max, each group
// softmax-normalized independently.
Eigen::MatrixXd assignment_head(const DenseParams& params,
                                const Eigen::MatrixXd& features, int k_max,
                                Eigen::MatrixXd* logits = nullptr);

// BDLSTM pass, concat of first and last outputs, FC + LeakyReLU, softmax.
Eigen::VectorXd count_head(const BdLstmParams& rnn, const DenseParams& fc1,
                           const DenseParams& fc2,
                           const Eigen::MatrixXd& features, double leaky_slope,
                           CountHeadCache* cache = nullptr);

ClusteringOutput forward(const ModelParameters& params,
                         const Eigen::MatrixXd& raw,
                         ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(parameters) into `grads` given the gradient of the
// loss w.r.t. the output probabilities. `grads` must share the config.
void backward(const ModelParameters& params, const ForwardCache& cache,
              const OutputGrad& ograd, ModelParameters& grads);

// Numerically stable softmax; a single logit maps to exactly 1.0.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace clusternet
