#pragma once

#include <Eigen/Core>
#include <string>

namespace clusternet {

// Explicit metric-learning block: a trainable quadratic-form dissimilarity
// d2_A(z_i, z_j) = (z_i - z_j)^T A (z_i - z_j) whose matrix A is projected
// onto the PSD cone after every optimizer step.

enum class MetricMode { None, Euclidean, Diagonal, Full };

const char* metric_mode_name(MetricMode m);
MetricMode parse_metric_mode(const std::string& name);

struct MetricMatrix {
  Eigen::MatrixXd a;
  MetricMode mode = MetricMode::Euclidean;
  int d = 0;

  static MetricMatrix identity(int d, MetricMode mode);

  bool trainable() const { return mode == MetricMode::Diagonal || mode == MetricMode::Full; }

  // Restores the mode invariants after an optimizer step: euclidean stays
  // the identity, diagonal clamps its diagonal at zero (off-diagonals are
  // kept exactly zero), full applies the Frobenius-nearest PSD projection.
  void project();

  // Symmetric within tol and minimum eigenvalue >= -tol.
  bool satisfies_invariants(double tol = 1e-8) const;
};

// (zi - zj)^T A (zi - zj); requires dim(zi) == dim(zj) == metric.d.
double dissimilarity(const MetricMatrix& metric, const Eigen::VectorXd& zi,
                     const Eigen::VectorXd& zj);

// Frobenius-nearest PSD matrix to the symmetrized input: symmetrize,
// eigendecompose, clamp negative eigenvalues to zero, reconstruct.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a);

// n x n matrix of pairwise dissimilarities, D(i,j) = d2_A(z_i, z_j) for the
// columns of z. Symmetric with a zero diagonal for any A.
Eigen::MatrixXd pairwise_distance_matrix(const MetricMatrix& metric,
                                         const Eigen::MatrixXd& z);

// The block as wired into the network: distance rows through a shared
// FC + LeakyReLU. Weights live here so the block serializes as one unit.
struct MetricBlockParams {
  MetricMatrix metric;
  Eigen::MatrixXd w;  // out_units x n
  Eigen::VectorXd b;  // out_units
};

struct MetricBlockCache {
  Eigen::MatrixXd z;     // d x n block input
  Eigen::MatrixXd dist;  // n x n distance matrix
  Eigen::MatrixXd pre;   // out_units x n pre-activation
};

// Per-element feature vectors: column i is lrelu(W * dist.col(i) + b).
// Requires z to have exactly as many columns as W has input features.
Eigen::MatrixXd metric_block_forward(const MetricBlockParams& params,
                                     const Eigen::MatrixXd& z,
                                     double leaky_slope,
                                     MetricBlockCache* cache = nullptr);

// Backward pass of the block: accumulates parameter gradients into `grads`
// (shapes must match `params`; metric gradient only in trainable modes) and
// the gradient w.r.t. the block input into `dz`.
void metric_block_backward(const MetricBlockParams& params,
                           const MetricBlockCache& cache,
                           const Eigen::MatrixXd& dout, double leaky_slope,
                           MetricBlockParams& grads, Eigen::MatrixXd& dz);

}  // namespace clusternet
